#include "rlemmo/features.hpp"

#include <cmath>

namespace rlemmo::features {

namespace {

struct Normalizers {
  double diameter;
  double obj_range;  // 0 => objective features are 0
  double horizon;

  double dist(double d) const { return diameter > 0.0 ? d / diameter : 0.0; }
  double obj(double v) const { return obj_range > 0.0 ? v / obj_range : 0.0; }
  double time(double t) const { return horizon > 0.0 ? t / horizon : 0.0; }
};

Normalizers normalizers(const evo::Population& pop) {
  return {pop.diameter, pop.objective_range(), static_cast<double>(pop.horizon)};
}

double pop_std(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  return std::sqrt(var / static_cast<double>(v.size()));
}

template <typename Dist>
GlobalFeatures global_impl(const evo::Population& pop, const Dist& dist) {
  const Normalizers z = normalizers(pop);
  const int n = pop.size();
  double pair_sum = 0.0;
  long pairs = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      pair_sum += dist(i, j);
      ++pairs;
    }
  std::vector<double> scaled(n);
  double mean_obj = 0.0;
  for (int i = 0; i < n; ++i) {
    scaled[i] = z.obj(pop.individuals[i].objective);
    mean_obj += scaled[i];
  }
  return {z.dist(pairs > 0 ? pair_sum / static_cast<double>(pairs) : 0.0), pop_std(scaled),
          z.time(static_cast<double>(pop.horizon - pop.generation)), z.time(static_cast<double>(pop.global_stagnation)),
          n > 0 ? mean_obj / n : 0.0};
}

template <typename Dist>
NeighborhoodFeatures neighborhood_impl(const evo::Population& pop, const evo::Neighborhoods& nb, int i,
                                       const Dist& dist) {
  const Normalizers z = normalizers(pop);
  const auto& phi = nb.members[i];
  const int k = static_cast<int>(phi.size());
  double pair_sum = 0.0;
  long pairs = 0;
  for (int a = 0; a < k; ++a)
    for (int b = a + 1; b < k; ++b) {
      pair_sum += dist(phi[a], phi[b]);
      ++pairs;
    }
  std::vector<double> scaled;
  scaled.reserve(k);
  double mean_obj = 0.0;
  for (int j : phi) {
    scaled.push_back(z.obj(pop.individuals[j].objective));
    mean_obj += scaled.back();
  }
  const int np = pop.size();
  return {z.dist(pairs > 0 ? pair_sum / static_cast<double>(pairs) : 0.0), pop_std(scaled),
          z.time(static_cast<double>(pop.neighborhood_stagnation[i])), k > 0 ? mean_obj / k : 0.0,
          np > 1 ? static_cast<double>(nb.rank[i]) / (np - 1) : 0.0};
}

template <typename Dist>
IndividualFeatures individual_impl(const evo::Population& pop, const evo::Neighborhoods& nb, int i, int current_best,
                                   const Dist& dist) {
  const Normalizers z = normalizers(pop);
  const auto& xs = pop.individuals;
  const double oi = xs[i].objective;
  const int nbest = nb.best[i];
  const auto& phi = nb.members[i];

  double nb_gap = 0.0;
  double nb_dist = 0.0;
  for (int j : phi) {
    nb_gap += z.obj(oi - xs[j].objective);
    nb_dist += dist(i, j);
  }
  const double kk = phi.empty() ? 1.0 : static_cast<double>(phi.size());

  double all_gap = 0.0;
  double all_dist = 0.0;
  const int n = pop.size();
  for (int j = 0; j < n; ++j) {
    if (j == i) continue;
    all_gap += z.obj(oi - xs[j].objective);
    all_dist += dist(i, j);
  }
  const double others = n > 1 ? static_cast<double>(n - 1) : 1.0;

  return {z.dist(dist(i, current_best)),
          z.dist((xs[i].position - pop.best_position).norm()),
          z.obj(oi - pop.best_objective),
          z.obj(oi - xs[current_best].objective),
          z.dist(dist(i, nbest)),
          z.obj(oi - xs[nbest].objective),
          z.time(static_cast<double>(xs[i].stagnation)),
          z.obj(oi),
          nb_gap / kk,
          z.dist(nb_dist / kk),
          all_gap / others,
          z.dist(all_dist / others)};
}

auto direct_distance(const evo::Population& pop) {
  return [&pop](int a, int b) { return (pop.individuals[a].position - pop.individuals[b].position).norm(); };
}

}  // namespace

GlobalFeatures extract_global(const evo::Population& population) {
  return global_impl(population, direct_distance(population));
}

NeighborhoodFeatures extract_neighborhood(const evo::Population& population, const evo::Neighborhoods& neighborhoods,
                                          int i) {
  return neighborhood_impl(population, neighborhoods, i, direct_distance(population));
}

IndividualFeatures extract_individual(const evo::Population& population, const evo::Neighborhoods& neighborhoods,
                                      int i) {
  return individual_impl(population, neighborhoods, i, population.current_best(), direct_distance(population));
}

StateFeatures extract_state(const evo::Population& population, const evo::Neighborhoods& neighborhoods,
                            const StateAblation& ablation) {
  const int n = population.size();
  Eigen::MatrixXd d(n, n);
  for (int i = 0; i < n; ++i) {
    d(i, i) = 0.0;
    for (int j = i + 1; j < n; ++j)
      d(i, j) = d(j, i) = (population.individuals[i].position - population.individuals[j].position).norm();
  }
  const auto dist = [&d](int a, int b) { return d(a, b); };
  const int best = population.current_best();

  StateFeatures s;
  s.population = Eigen::MatrixXd::Zero(n, kPopulationFeatures);
  s.individual.resize(n, kIndividualFeatures);
  const GlobalFeatures g = global_impl(population, dist);
  for (int i = 0; i < n; ++i) {
    if (ablation.global)
      for (int c = 0; c < kGlobalFeatures; ++c) s.population(i, c) = g[c];
    if (ablation.neighborhood) {
      const auto f = neighborhood_impl(population, neighborhoods, i, dist);
      for (int c = 0; c < kNeighborhoodFeatures; ++c) s.population(i, kGlobalFeatures + c) = f[c];
    }
    const auto f = individual_impl(population, neighborhoods, i, best, dist);
    for (int c = 0; c < kIndividualFeatures; ++c) s.individual(i, c) = f[c];
  }
  return s;
}

}  // namespace rlemmo::features
