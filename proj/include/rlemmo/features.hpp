#pragma once

// 22-dimensional optimization-status state: 5 population-global features,
// 5 neighborhood features and 12 individual features per individual.

#include "rlemmo/evolution.hpp"

#include <Eigen/Core>

#include <array>

namespace rlemmo::features {

inline constexpr int kGlobalFeatures = 5;
inline constexpr int kNeighborhoodFeatures = 5;
inline constexpr int kPopulationFeatures = kGlobalFeatures + kNeighborhoodFeatures;
inline constexpr int kIndividualFeatures = 12;
inline constexpr int kTotalFeatures = kPopulationFeatures + kIndividualFeatures;
static_assert(kTotalFeatures == 22);

using GlobalFeatures = std::array<double, kGlobalFeatures>;
using NeighborhoodFeatures = std::array<double, kNeighborhoodFeatures>;
using IndividualFeatures = std::array<double, kIndividualFeatures>;

/// Which parts of f_pop reach the policy. Ablated groups are zeroed.
struct StateAblation {
  bool global = true;
  bool neighborhood = true;
};

struct StateFeatures {
  Eigen::MatrixXd population;  // NP x 10: f_g then f_n
  Eigen::MatrixXd individual;  // NP x 12
};

GlobalFeatures extract_global(const evo::Population& population);
NeighborhoodFeatures extract_neighborhood(const evo::Population& population, const evo::Neighborhoods& neighborhoods,
                                          int i);
IndividualFeatures extract_individual(const evo::Population& population, const evo::Neighborhoods& neighborhoods,
                                      int i);
StateFeatures extract_state(const evo::Population& population, const evo::Neighborhoods& neighborhoods,
                            const StateAblation& ablation = {});

}  // namespace rlemmo::features
