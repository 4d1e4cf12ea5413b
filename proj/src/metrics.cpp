#include "rlemmo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace rlemmo::metrics {

PeakArchive::PeakArchive(const bench::Problem& problem)
    : peak_height_(problem.peak_height),
      radius_(problem.niche_radius),
      capacity_(static_cast<std::size_t>(10 * problem.n_global_optima)) {}

bool PeakArchive::offer(const Vector& position, double objective) {
  if (capacity_ == 0 || !(peak_height_ - objective <= kArchiveAccuracy)) return false;

  std::size_t nearest = entries_.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const double d = (entries_[i].position - position).norm();
    if (d < best) {
      best = d;
      nearest = i;
    }
  }
  if (nearest < entries_.size() && best <= radius_) {
    if (objective > entries_[nearest].objective) {
      entries_[nearest] = {position, objective};
      return true;
    }
    return false;
  }
  entries_.push_back({position, objective});
  if (entries_.size() > capacity_) evict_closest_pair();
  return true;
}

void PeakArchive::evict_closest_pair() {
  std::size_t a = 0;
  std::size_t b = 1;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < entries_.size(); ++i)
    for (std::size_t j = i + 1; j < entries_.size(); ++j) {
      const double d = (entries_[i].position - entries_[j].position).squaredNorm();
      if (d < best) {
        best = d;
        a = i;
        b = j;
      }
    }
  const std::size_t victim = entries_[a].objective < entries_[b].objective ? a : b;
  entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(victim));
}

int count_peaks(const std::vector<ArchivedSolution>& solutions, const bench::Problem& problem, double accuracy) {
  std::vector<std::size_t> order(solutions.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return solutions[a].objective > solutions[b].objective; });

  std::vector<std::size_t> seeds;
  for (std::size_t idx : order) {
    if (static_cast<int>(seeds.size()) >= problem.n_global_optima) break;
    const auto& s = solutions[idx];
    if (!(problem.peak_height - s.objective <= accuracy)) continue;
    const bool separated = std::all_of(seeds.begin(), seeds.end(), [&](std::size_t k) {
      return (solutions[k].position - s.position).norm() > problem.niche_radius;
    });
    if (separated) seeds.push_back(idx);
  }
  return static_cast<int>(seeds.size());
}

int RunResult::npf(double accuracy) const {
  for (std::size_t i = 0; i < accuracies.size(); ++i)
    if (accuracies[i] == accuracy) return found[i];
  throw std::invalid_argument("accuracy level not recorded in run result");
}

double peak_ratio(const std::vector<RunResult>& runs, const bench::Problem& problem, double accuracy) {
  if (runs.empty()) throw std::invalid_argument("peak_ratio needs at least one run");
  long total = 0;
  for (const auto& r : runs) total += r.npf(accuracy);
  return static_cast<double>(total) / (static_cast<double>(problem.n_global_optima) * static_cast<double>(runs.size()));
}

double success_rate(const std::vector<RunResult>& runs, const bench::Problem& problem, double accuracy) {
  if (runs.empty()) throw std::invalid_argument("success_rate needs at least one run");
  const auto successes = std::count_if(runs.begin(), runs.end(),
                                       [&](const RunResult& r) { return r.npf(accuracy) == problem.n_global_optima; });
  return static_cast<double>(successes) / static_cast<double>(runs.size());
}

RunResult summarize_run(const std::vector<ArchivedSolution>& solutions, const bench::Problem& problem,
                        const std::vector<double>& accuracies, std::uint64_t seed, long evaluations) {
  RunResult r;
  r.problem_id = problem.id;
  r.seed = seed;
  r.accuracies = accuracies;
  r.evaluations = evaluations;
  for (double acc : accuracies) r.found.push_back(count_peaks(solutions, problem, acc));
  return r;
}

}  // namespace rlemmo::metrics
