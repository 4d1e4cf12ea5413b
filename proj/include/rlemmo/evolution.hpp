#pragma once

// Population of the low-level optimizer: KNN neighborhoods, the five search
// strategies, binomial crossover, bound repair and greedy selection.

#include "rlemmo/benchmark.hpp"
#include "rlemmo/metrics.hpp"
#include "rlemmo/rng.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace rlemmo::evo {

using bench::Vector;

inline constexpr int kNumActions = 5;

/// Which of the strategies A1..A5 the controller may pick.
struct ActionSet {
  std::array<bool, kNumActions> allowed{true, true, true, true, true};

  bool contains(int action) const { return action >= 1 && action <= kNumActions && allowed[action - 1]; }
  static ActionSet all() { return {}; }
  static ActionSet only(std::initializer_list<int> actions);
};

struct EvolutionParams {
  int population_size = 100;
  int k = 4;
  double F = 0.5;
  double Cr = 0.9;
  // A1 standard deviation as a fraction of each dimension's range.
  double sigma_fraction = 0.01;
  bool crossover = true;
  long max_fes = 50000;
  ActionSet actions;

  /// Throws std::invalid_argument for inconsistent settings (e.g. A3 with k < 3).
  void validate() const;
  /// Number of generations after initialization: floor((maxFEs - NP) / NP).
  int horizon() const;
};

struct Individual {
  Vector position;
  double objective = 0.0;
  int stagnation = 0;  // generations since this slot was last replaced
};

struct Neighborhoods {
  std::vector<std::vector<int>> members;  // k indices per individual, nearest first, self excluded
  std::vector<int> best;                  // best member of each neighborhood
  std::vector<int> rank;                  // 0 = neighborhood with the highest best objective

  int size() const { return static_cast<int>(members.size()); }
};

struct Population {
  std::vector<Individual> individuals;
  int generation = 0;
  int horizon = 0;  // T
  Vector lower;
  Vector upper;
  double diameter = 0.0;

  // Historical best over every evaluated point (X*).
  Vector best_position;
  double best_objective = 0.0;
  int global_stagnation = 0;

  // Extremes over every evaluated point in the episode.
  double worst_seen = 0.0;
  double best_seen = 0.0;

  Neighborhoods neighborhoods;
  std::vector<int> neighborhood_stagnation;
  std::vector<double> neighborhood_best;  // best objective inside Φ_i at the last update

  long evaluations = 0;
  long max_fes = 0;
  metrics::PeakArchive archive;

  int size() const { return static_cast<int>(individuals.size()); }
  int dimension() const { return static_cast<int>(lower.size()); }
  /// Index of the best current individual, lowest index on ties.
  int current_best() const;
  /// Gap between historical worst and best objective; 0 when degenerate.
  double objective_range() const { return best_seen - worst_seen; }
  std::vector<Vector> positions() const;
  std::vector<double> objectives() const;
};

/// Samples NP positions uniformly in the bounds and evaluates them.
Population init_population(const bench::Problem& problem, const EvolutionParams& params, std::uint64_t seed);

/// Euclidean k-nearest neighbours (self excluded, distance ties to lower index)
/// plus per-neighborhood best member and rank.
Neighborhoods knn_neighborhoods(const std::vector<Vector>& positions, const std::vector<double>& objectives, int k);
Neighborhoods knn_neighborhoods(const Population& population, int k);

/// Mutant vector of individual i under strategy `action` (1..5).
Vector mutate(int i, int action, const Population& population, const Neighborhoods& neighborhoods, double F,
              const Vector& sigma, Rng& rng);

/// Binomial crossover with one forced mutant dimension.
Vector crossover(const Vector& parent, const Vector& mutant, double Cr, Rng& rng);

/// Reflects each violated coordinate once across its bound, then clamps.
Vector repair_bounds(Vector x, const Vector& lower, const Vector& upper);

/// Advances one generation. Every individual draws from its own stream
/// derived from (seed, generation, index). Returns evaluations used (NP).
/// Throws BudgetExhausted if a full generation no longer fits in max_fes.
int step(Population& population, std::span<const int> actions, const bench::Problem& problem,
         const EvolutionParams& params, std::uint64_t seed);

}  // namespace rlemmo::evo
