#include "rlemmo/clustering.hpp"

#include "rlemmo/errors.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace rlemmo::cluster {

int ClusterLabels::n_noise() const { return static_cast<int>(std::count(labels.begin(), labels.end(), kNoise)); }

ClusterLabels dbscan(const std::vector<Vector>& points, double eps, int min_samples) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (min_samples < 1) throw std::invalid_argument("min_samples must be at least 1");
  const int n = static_cast<int>(points.size());
  const double eps2 = eps * eps;

  std::vector<std::vector<int>> neighbors(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if ((points[i] - points[j]).squaredNorm() <= eps2) neighbors[i].push_back(j);

  constexpr int kUnvisited = -2;
  ClusterLabels out;
  out.labels.assign(n, kUnvisited);
  for (int i = 0; i < n; ++i) {
    if (out.labels[i] != kUnvisited) continue;
    if (static_cast<int>(neighbors[i].size()) < min_samples) {
      out.labels[i] = kNoise;  // may still be claimed as a border point later
      continue;
    }
    const int id = out.n_clusters++;
    out.labels[i] = id;
    std::deque<int> frontier(neighbors[i].begin(), neighbors[i].end());
    while (!frontier.empty()) {
      const int q = frontier.front();
      frontier.pop_front();
      if (out.labels[q] == kNoise) out.labels[q] = id;
      if (out.labels[q] != kUnvisited) continue;
      out.labels[q] = id;
      if (static_cast<int>(neighbors[q].size()) >= min_samples)
        frontier.insert(frontier.end(), neighbors[q].begin(), neighbors[q].end());
    }
  }
  return out;
}

std::vector<Vector> normalize_to_bounds(const std::vector<Vector>& positions, const Vector& lower, const Vector& upper) {
  const Vector span = upper - lower;
  std::vector<Vector> out;
  out.reserve(positions.size());
  for (const auto& p : positions) out.push_back((p - lower).cwiseQuotient(span));
  return out;
}

ClusterLabels cluster_population(const evo::Population& population, double eps, int min_samples) {
  return dbscan(normalize_to_bounds(population.positions(), population.lower, population.upper), eps, min_samples);
}

double reward_clb(const evo::Population& population, const ClusterLabels& labels, const RewardOptions& options) {
  if (population.individuals.empty()) throw InvalidState("reward on an empty population");
  if (labels.labels.size() != population.individuals.size())
    throw std::invalid_argument("label count does not match the population");

  const double range = population.objective_range();
  const auto q = [&](double f) {
    if (options.scale == RewardScale::Raw) return f;
    return range > 0.0 ? (f - population.worst_seen) / range : 0.0;
  };

  std::vector<double> best(labels.n_clusters, 0.0);
  std::vector<bool> seen(labels.n_clusters, false);
  double total = 0.0;
  for (std::size_t i = 0; i < labels.labels.size(); ++i) {
    const double f = population.individuals[i].objective;
    const int c = labels.labels[i];
    if (c == kNoise) {
      if (options.noise == NoisePolicy::Singleton) total += q(f);
      continue;
    }
    if (!seen[c] || f > best[c]) best[c] = f;
    seen[c] = true;
  }
  for (int c = 0; c < labels.n_clusters; ++c)
    if (seen[c]) total += q(best[c]);
  return total;
}

double reward_b(const evo::Population& population) {
  if (population.individuals.empty()) throw InvalidState("reward on an empty population");
  return population.individuals[population.current_best()].objective;
}

double reward_c(const ClusterLabels& labels, NoisePolicy noise) {
  return static_cast<double>(labels.n_clusters + (noise == NoisePolicy::Singleton ? labels.n_noise() : 0));
}

}  // namespace rlemmo::cluster
