#pragma once

// Peak counting and the Peak Ratio / Success Rate metrics.

#include "rlemmo/benchmark.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace rlemmo::metrics {

using bench::Vector;

inline constexpr std::array<double, 5> kAccuracyLevels{1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
/// Loosest tracked accuracy; nothing farther than this from the peak is archived.
inline constexpr double kArchiveAccuracy = 1e-1;

struct ArchivedSolution {
  Vector position;
  double objective;
};

/// Run-scoped store of near-peak solutions. Entries are kept within
/// kArchiveAccuracy of the peak height; a newcomer within the niche radius of
/// an existing entry only survives if it is strictly better. When the
/// capacity (10 x known optima) is exceeded, the lower-objective member of the
/// closest pair is evicted.
class PeakArchive {
 public:
  PeakArchive() = default;
  explicit PeakArchive(const bench::Problem& problem);

  /// Returns true when the solution was stored.
  bool offer(const Vector& position, double objective);

  const std::vector<ArchivedSolution>& entries() const { return entries_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return entries_.size(); }

 private:
  void evict_closest_pair();

  double peak_height_ = 0.0;
  double radius_ = 0.0;
  std::size_t capacity_ = 0;
  std::vector<ArchivedSolution> entries_;
};

/// Number of distinct global optima found at `accuracy`: solutions are visited
/// by objective (descending, ties by position in the input) and a solution is
/// accepted if it is within `accuracy` of the peak and farther than the niche
/// radius from all previously accepted ones. Capped at the known optima count.
int count_peaks(const std::vector<ArchivedSolution>& solutions, const bench::Problem& problem, double accuracy);

struct RunResult {
  int problem_id = 0;
  std::uint64_t seed = 0;
  std::vector<double> accuracies;
  std::vector<int> found;  // NPF per accuracy, same order
  long evaluations = 0;

  int npf(double accuracy) const;
};

double peak_ratio(const std::vector<RunResult>& runs, const bench::Problem& problem, double accuracy);
double success_rate(const std::vector<RunResult>& runs, const bench::Problem& problem, double accuracy);

/// Counts optima at every requested accuracy.
RunResult summarize_run(const std::vector<ArchivedSolution>& solutions, const bench::Problem& problem,
                        const std::vector<double>& accuracies, std::uint64_t seed, long evaluations);

}  // namespace rlemmo::metrics
