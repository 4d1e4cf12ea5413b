#include "rlemmo/evolution.hpp"

#include "rlemmo/errors.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace rlemmo::evo {

namespace {

// Partial Fisher-Yates over `pool`: the first `count` entries become the draw.
std::vector<int> draw_distinct(std::vector<int> pool, int count, Rng& rng) {
  const int n = static_cast<int>(pool.size());
  if (count > n) throw std::invalid_argument("cannot draw " + std::to_string(count) + " distinct indices from " + std::to_string(n));
  for (int s = 0; s < count; ++s) {
    const int j = s + rng.index(n - s);
    std::swap(pool[s], pool[j]);
  }
  pool.resize(count);
  return pool;
}

std::vector<int> others(int n, int exclude) {
  std::vector<int> pool;
  pool.reserve(n - 1);
  for (int j = 0; j < n; ++j)
    if (j != exclude) pool.push_back(j);
  return pool;
}

void observe(Population& pop, const Vector& x, double f) {
  pop.worst_seen = std::min(pop.worst_seen, f);
  pop.best_seen = std::max(pop.best_seen, f);
  pop.archive.offer(x, f);
}

void refresh_neighborhoods(Population& pop, int k, bool reset) {
  pop.neighborhoods = knn_neighborhoods(pop, k);
  const int n = pop.size();
  if (reset) {
    pop.neighborhood_stagnation.assign(n, 0);
    pop.neighborhood_best.assign(n, 0.0);
  }
  for (int i = 0; i < n; ++i) {
    const double best = pop.individuals[pop.neighborhoods.best[i]].objective;
    if (!reset) {
      if (best > pop.neighborhood_best[i])
        pop.neighborhood_stagnation[i] = 0;
      else
        ++pop.neighborhood_stagnation[i];
    }
    pop.neighborhood_best[i] = best;
  }
}

}  // namespace

ActionSet ActionSet::only(std::initializer_list<int> actions) {
  ActionSet s;
  s.allowed.fill(false);
  for (int a : actions) {
    if (a < 1 || a > kNumActions) throw std::invalid_argument("action id out of range: " + std::to_string(a));
    s.allowed[a - 1] = true;
  }
  return s;
}

void EvolutionParams::validate() const {
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  if (population_size <= k)
    throw std::invalid_argument("population size " + std::to_string(population_size) + " must exceed k = " + std::to_string(k));
  if (!(F > 0.0)) throw std::invalid_argument("F must be positive");
  if (!(Cr >= 0.0 && Cr <= 1.0)) throw std::invalid_argument("Cr must lie in [0, 1]");
  if (!(sigma_fraction >= 0.0)) throw std::invalid_argument("sigma fraction must be non-negative");
  if (std::none_of(actions.allowed.begin(), actions.allowed.end(), [](bool b) { return b; }))
    throw std::invalid_argument("action set is empty");
  if (actions.contains(2) && k < 2) throw std::invalid_argument("strategy A2 needs k >= 2");
  if (actions.contains(3) && k < 3) throw std::invalid_argument("strategy A3 needs k >= 3");
  if (actions.contains(4) && population_size < 3) throw std::invalid_argument("strategy A4 needs NP >= 3");
  if (actions.contains(5) && population_size < 4) throw std::invalid_argument("strategy A5 needs NP >= 4");
  if (max_fes < population_size) throw std::invalid_argument("maxFEs smaller than the population size");
}

int EvolutionParams::horizon() const { return static_cast<int>((max_fes - population_size) / population_size); }

int Population::current_best() const {
  int best = 0;
  for (int i = 1; i < size(); ++i)
    if (individuals[i].objective > individuals[best].objective) best = i;
  return best;
}

std::vector<Vector> Population::positions() const {
  std::vector<Vector> out;
  out.reserve(individuals.size());
  for (const auto& ind : individuals) out.push_back(ind.position);
  return out;
}

std::vector<double> Population::objectives() const {
  std::vector<double> out;
  out.reserve(individuals.size());
  for (const auto& ind : individuals) out.push_back(ind.objective);
  return out;
}

Population init_population(const bench::Problem& problem, const EvolutionParams& params, std::uint64_t seed) {
  params.validate();
  Population pop;
  pop.lower = problem.lower;
  pop.upper = problem.upper;
  pop.diameter = problem.diameter();
  pop.horizon = params.horizon();
  pop.max_fes = params.max_fes;
  pop.archive = metrics::PeakArchive(problem);

  Rng rng(derive_seed(seed, {0xA11CEULL}));
  const int np = params.population_size;
  pop.individuals.resize(np);
  for (auto& ind : pop.individuals) {
    ind.position.resize(problem.dimension);
    for (int d = 0; d < problem.dimension; ++d) ind.position[d] = rng.uniform(problem.lower[d], problem.upper[d]);
  }
  for (auto& ind : pop.individuals) ind.objective = problem.evaluate(ind.position);
  pop.evaluations = np;

  pop.worst_seen = pop.best_seen = pop.individuals.front().objective;
  for (const auto& ind : pop.individuals) observe(pop, ind.position, ind.objective);
  const int b = pop.current_best();
  pop.best_position = pop.individuals[b].position;
  pop.best_objective = pop.individuals[b].objective;
  refresh_neighborhoods(pop, params.k, true);
  return pop;
}

Neighborhoods knn_neighborhoods(const std::vector<Vector>& positions, const std::vector<double>& objectives, int k) {
  const int n = static_cast<int>(positions.size());
  if (k < 1 || k >= n) throw std::invalid_argument("k must satisfy 1 <= k < NP");
  Neighborhoods nb;
  nb.members.resize(n);
  nb.best.resize(n);
  nb.rank.resize(n);

  std::vector<std::pair<double, int>> dist;
  dist.reserve(n - 1);
  for (int i = 0; i < n; ++i) {
    dist.clear();
    for (int j = 0; j < n; ++j)
      if (j != i) dist.emplace_back((positions[i] - positions[j]).squaredNorm(), j);
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    auto& m = nb.members[i];
    m.resize(k);
    for (int s = 0; s < k; ++s) m[s] = dist[s].second;
    int best = m.front();
    for (int j : m)
      if (objectives[j] > objectives[best] || (objectives[j] == objectives[best] && j < best)) best = j;
    nb.best[i] = best;
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return objectives[nb.best[a]] > objectives[nb.best[b]]; });
  for (int r = 0; r < n; ++r) nb.rank[order[r]] = r;
  return nb;
}

Neighborhoods knn_neighborhoods(const Population& population, int k) {
  return knn_neighborhoods(population.positions(), population.objectives(), k);
}

Vector mutate(int i, int action, const Population& population, const Neighborhoods& neighborhoods, double F,
              const Vector& sigma, Rng& rng) {
  const auto& x = population.individuals;
  const Vector& xi = x[i].position;
  const int n = population.size();
  switch (action) {
    case 1: {
      Vector u = xi;
      for (Eigen::Index d = 0; d < u.size(); ++d) u[d] += sigma[d] > 0.0 ? rng.normal(0.0, sigma[d]) : 0.0;
      return u;
    }
    case 2: {
      const auto& phi = neighborhoods.members[i];
      const auto r = draw_distinct(phi, 2, rng);
      const Vector& best = x[neighborhoods.best[i]].position;
      return xi + F * (best - xi) + F * (x[r[0]].position - x[r[1]].position);
    }
    case 3: {
      const auto& phi = neighborhoods.members[i];
      const auto r = draw_distinct(phi, 3, rng);
      return x[r[0]].position + F * (x[r[1]].position - x[r[2]].position);
    }
    case 4: {
      const int j = draw_distinct(others(n, i), 1, rng)[0];
      const auto r = draw_distinct(others(n, i), 2, rng);
      const Vector& best = x[neighborhoods.best[j]].position;
      return xi + F * (best - xi) + F * (x[r[0]].position - x[r[1]].position);
    }
    case 5: {
      const auto r = draw_distinct(others(n, i), 3, rng);
      return x[r[0]].position + F * (x[r[1]].position - x[r[2]].position);
    }
    default:
      throw std::invalid_argument("strategy id must be in 1..5, got " + std::to_string(action));
  }
}

Vector crossover(const Vector& parent, const Vector& mutant, double Cr, Rng& rng) {
  const int d = static_cast<int>(parent.size());
  const int forced = rng.index(d);
  Vector trial = parent;
  for (int j = 0; j < d; ++j) {
    const bool take = rng.uniform() < Cr;
    if (take || j == forced) trial[j] = mutant[j];
  }
  return trial;
}

Vector repair_bounds(Vector x, const Vector& lower, const Vector& upper) {
  for (Eigen::Index d = 0; d < x.size(); ++d) {
    if (x[d] < lower[d])
      x[d] = 2.0 * lower[d] - x[d];
    else if (x[d] > upper[d])
      x[d] = 2.0 * upper[d] - x[d];
    x[d] = std::clamp(x[d], lower[d], upper[d]);
  }
  return x;
}

int step(Population& pop, std::span<const int> actions, const bench::Problem& problem, const EvolutionParams& params,
         std::uint64_t seed) {
  const int n = pop.size();
  if (static_cast<int>(actions.size()) != n)
    throw std::invalid_argument("expected " + std::to_string(n) + " actions, got " + std::to_string(actions.size()));
  if (pop.evaluations + n > pop.max_fes)
    throw BudgetExhausted("generation needs " + std::to_string(n) + " evaluations, " +
                          std::to_string(pop.max_fes - pop.evaluations) + " left");

  const Vector sigma = params.sigma_fraction * (pop.upper - pop.lower);
  std::vector<Vector> trials(n);
  for (int i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(pop.generation), static_cast<std::uint64_t>(i)}));
    const int a = actions[i];
    Vector trial = mutate(i, a, pop, pop.neighborhoods, params.F, sigma, rng);
    if (a != 1 && params.crossover) trial = crossover(pop.individuals[i].position, trial, params.Cr, rng);
    trials[i] = repair_bounds(std::move(trial), pop.lower, pop.upper);
  }

  std::vector<double> values(n);
  for (int i = 0; i < n; ++i) values[i] = problem.evaluate(trials[i]);
  pop.evaluations += n;

  bool improved_best = false;
  for (int i = 0; i < n; ++i) {
    observe(pop, trials[i], values[i]);
    if (values[i] > pop.best_objective) {
      pop.best_objective = values[i];
      pop.best_position = trials[i];
      improved_best = true;
    }
    auto& ind = pop.individuals[i];
    if (values[i] >= ind.objective) {
      ind.position = std::move(trials[i]);
      ind.objective = values[i];
      ind.stagnation = 0;
    } else {
      ++ind.stagnation;
    }
  }
  pop.global_stagnation = improved_best ? 0 : pop.global_stagnation + 1;
  ++pop.generation;
  refresh_neighborhoods(pop, params.k, false);
  return n;
}

}  // namespace rlemmo::evo
