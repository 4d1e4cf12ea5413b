#pragma once

// DBSCAN over the population and the population-level rewards built on it.

#include "rlemmo/evolution.hpp"

#include <vector>

namespace rlemmo::cluster {

using bench::Vector;

inline constexpr int kNoise = -1;

struct ClusterLabels {
  std::vector<int> labels;  // cluster id >= 0 or kNoise
  int n_clusters = 0;       // ids are 0..n_clusters-1, numbered in discovery order

  int n_noise() const;
};

/// Standard DBSCAN, Euclidean metric. A core point has at least `min_samples`
/// points (itself included) within `eps`. Points are scanned by ascending
/// index; a border point joins the first cluster that reaches it.
ClusterLabels dbscan(const std::vector<Vector>& points, double eps, int min_samples);

/// Min-max scales positions to [0, 1] per dimension using the search bounds.
std::vector<Vector> normalize_to_bounds(const std::vector<Vector>& positions, const Vector& lower, const Vector& upper);

/// Clusters the population in bound-normalized coordinates.
ClusterLabels cluster_population(const evo::Population& population, double eps, int min_samples);

enum class NoisePolicy { Singleton, Exclude };
enum class RewardScale { Raw, EpisodeMinMax };

struct RewardOptions {
  NoisePolicy noise = NoisePolicy::Singleton;
  RewardScale scale = RewardScale::Raw;
};

/// Sum over clusters of the best objective inside each cluster.
double reward_clb(const evo::Population& population, const ClusterLabels& labels, const RewardOptions& options = {});
/// Best objective in the current population.
double reward_b(const evo::Population& population);
/// Number of clusters (noise points counted as singletons under NoisePolicy::Singleton).
double reward_c(const ClusterLabels& labels, NoisePolicy noise = NoisePolicy::Singleton);

}  // namespace rlemmo::cluster
