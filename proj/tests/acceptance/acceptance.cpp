// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Tolerances and case counts are fixed here and printed with each verdict.

#include "oracles.hpp"
#include "rlemmo/cli.hpp"
#include "rlemmo/clustering.hpp"
#include "rlemmo/errors.hpp"
#include "rlemmo/features.hpp"
#include "rlemmo/metrics.hpp"
#include "rlemmo/policy.hpp"
#include "rlemmo/trainer.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>

using namespace rlemmo;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using bench::Vector;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  int i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("rlemmo_acceptance_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

// ---- 1. Benchmark fidelity -------------------------------------------------

constexpr double kOptimumTol = 1e-6;
constexpr double kGridTol = 1e-3;

// Grid search on a 2-D box, then three zooms around the best cell.
double grid_maximum(const bench::Problem& p, int cells) {
  double lo0 = p.lower[0], hi0 = p.upper[0], lo1 = p.lower[1], hi1 = p.upper[1];
  double best = -1e300, bx = 0, by = 0;
  Vector x(2);
  for (int zoom = 0; zoom < 4; ++zoom) {
    const double h0 = (hi0 - lo0) / cells, h1 = (hi1 - lo1) / cells;
    for (int i = 0; i <= cells; ++i)
      for (int j = 0; j <= cells; ++j) {
        x << lo0 + i * h0, lo1 + j * h1;
        const double f = p.evaluate(x);
        if (f > best) best = f, bx = x[0], by = x[1];
      }
    lo0 = std::max(p.lower[0], bx - 2 * h0), hi0 = std::min(p.upper[0], bx + 2 * h0);
    lo1 = std::max(p.lower[1], by - 2 * h1), hi1 = std::min(p.upper[1], by + 2 * h1);
    cells = 200;
  }
  return best;
}

Verdict criterion1() {
  const auto t0 = Clock::now();
  Verdict v;
  double worst = 0.0;
  int checked = 0;
  auto check = [&](int id, const Vector& x) {
    const auto p = bench::make_problem(id);
    const double gap = std::abs(p.evaluate(x) - p.peak_height);
    worst = std::max(worst, gap);
    ++checked;
    if (gap > kOptimumTol) {
      v.pass = false;
      v.detail += " F" + std::to_string(id) + " gap " + fmt("%.3g", gap) + ";";
    }
  };
  check(1, vec({0.0}));
  check(1, vec({30.0}));
  for (double x : {0.1, 0.3, 0.5, 0.7, 0.9}) check(2, vec({x}));
  check(3, vec({std::pow(0.15, 4.0 / 3.0)}));
  for (const auto& x : oracle::himmelblau_optima()) check(4, x);
  for (const auto& x : oracle::six_hump_optima()) check(5, x);
  const auto hi = oracle::shubert_extrema(+1), lo = oracle::shubert_extrema(-1);
  for (double a : hi)
    for (double b : hi)
      for (double c : lo) {
        check(8, vec({a, b, c}));
        check(8, vec({c, a, b}));
        check(8, vec({a, c, b}));
      }
  for (const auto& x : oracle::rastrigin_optima()) check(10, x);

  const double g5 = grid_maximum(bench::make_problem(5), 2000);
  const double g6 = grid_maximum(bench::make_problem(6), 4000);
  const bool grid_ok = std::abs(g5 - 1.03163) <= kGridTol && std::abs(g6 - 186.731) <= kGridTol;
  const double secs = seconds_since(t0);
  v.pass = v.pass && grid_ok && secs < 60.0;
  v.detail = std::to_string(checked) + " optima, max |f - peak| " + fmt("%.2e", worst) + " (tol 1e-6); grid max F5 " +
             fmt("%.7f", g5) + " vs 1.03163, F6 " + fmt("%.5f", g6) + " vs 186.731 (tol 1e-3); " +
             fmt("%.1f", secs) + " s (limit 60)" + v.detail;
  return v;
}

// ---- 2. Random-strategy policy on easy problems ----------------------------

Verdict criterion2() {
  const auto t0 = Clock::now();
  TrainConfig c;
  c.jobs = std::max(1u, std::thread::hardware_concurrency());
  const auto r = train::evaluate_policy(train::Controller::random(), {1, 3, 4}, 10, {1e-4}, c, c.seed);
  Verdict v;
  for (const auto& row : r.rows) {
    v.detail += "F" + std::to_string(row.problem) + " PR " + fmt("%.3f", row.peak_ratio) + ", ";
    if (row.peak_ratio != 1.0) v.pass = false;
  }
  const double secs = seconds_since(t0);
  v.pass = v.pass && secs < 300.0;
  v.detail += "10 runs at 1e-4, maxFEs 50000, seed " + std::to_string(c.seed) + " (need PR = 1); " + fmt("%.1f", secs) +
              " s (limit 300)";
  return v;
}

// ---- 3. Learning signal at desk scale ----------------------------------------

Verdict criterion3() {
  const auto t0 = Clock::now();
  TrainConfig c;
  c.epochs = 5;
  c.batch_size = 4;
  c.jobs = std::max(1u, std::thread::hardware_concurrency());
  const std::vector<int> problems{1, 4, 10};
  const auto dir = scratch("c3");
  const auto ckpt = train::train(c, problems, dir);
  const auto trained = policy::load(ckpt);
  const auto untrained = train::TrainerState::fresh(c).params;

  constexpr int kEpisodes = 8;
  double r_trained = 0.0, r_untrained = 0.0;
  std::string per_problem;
  for (int id : problems) {
    const auto p = bench::make_problem(id);
    std::vector<double> a(kEpisodes), b(kEpisodes);
    train::parallel_for(kEpisodes, c.jobs, [&](int e) {
      const auto seed = derive_seed(0xE7A1ULL, {static_cast<std::uint64_t>(id), static_cast<std::uint64_t>(e)});
      a[e] = train::rollout(p, train::Controller::sampling(trained), c, seed, false).trajectory.mean_reward();
      b[e] = train::rollout(p, train::Controller::sampling(untrained), c, seed, false).trajectory.mean_reward();
    });
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / kEpisodes;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / kEpisodes;
    per_problem += " F" + std::to_string(id) + " " + fmt("%.4f", mb) + " -> " + fmt("%.4f", ma) + ";";
    r_trained += ma / problems.size();
    r_untrained += mb / problems.size();
  }

  const auto greedy = train::evaluate_policy(train::Controller::greedy(trained), {10}, 10, {1e-4}, c, c.seed);
  const auto random = train::evaluate_policy(train::Controller::random(), {10}, 10, {1e-4}, c, c.seed);
  const double pr_g = greedy.rows[0].peak_ratio, pr_r = random.rows[0].peak_ratio;
  const double secs = seconds_since(t0);
  fs::remove_all(dir);

  Verdict v;
  v.pass = r_trained > r_untrained && pr_g >= pr_r && secs < 1800.0;
  v.detail = "mean R_clb untrained " + fmt("%.4f", r_untrained) + " -> trained " + fmt("%.4f", r_trained) +
             " over 8 paired episodes per problem (" + per_problem + " ); F10 PR@1e-4 greedy " + fmt("%.3f", pr_g) +
             " vs random " + fmt("%.3f", pr_r) + "; " + fmt("%.0f", secs) + " s (limit 1800)";
  return v;
}

// ---- 4. Gradient correctness --------------------------------------------------

constexpr double kFdStep = 1e-5;
constexpr double kGradTol = 1e-4;
// Denominator floor for the relative error, so that entries whose true value
// is at round-off level do not dominate.
constexpr double kGradFloor = 1e-6;

Verdict criterion4() {
  const auto t0 = Clock::now();
  Rng rng(0x6AD);
  double worst = 0.0;
  std::string worst_at;
  long compared = 0;
  for (int draw = 0; draw < 20; ++draw) {
    auto p = policy::init_params(rng.engine()(), draw % 2 == 1);
    std::vector<train::LossSample> batch;
    for (int s = 0; s < 4; ++s) {
      train::LossSample smp;
      smp.f_pop = policy::Matrix::NullaryExpr(6, 10, [&] { return rng.uniform(0.0, 1.0); });
      smp.f_ind = policy::Matrix::NullaryExpr(6, 12, [&] { return rng.uniform(-1.0, 1.0); });
      const auto fc = policy::forward(p, smp.f_pop, smp.f_ind);
      const auto d = policy::sample(fc.logits, rng);
      smp.actions = d.actions;
      // Ratios of about 1.05 (unclipped) and 1.65 (clipped when A > 0), away from the kinks.
      smp.old_log_prob = d.log_prob - (s % 2 == 0 ? 0.05 : 0.5);
      smp.advantage = rng.normal(0.0, 1.0);
      smp.value_target = rng.normal(0.0, 1.0);
      batch.push_back(std::move(smp));
    }
    train::LossWeights w;
    policy::PolicyParams g = policy::PolicyParams::zeros(p.attn_residual);
    train::ppo_loss(p, batch, w, &g);
    auto pt = p.tensors();
    auto gt = g.tensors();
    for (std::size_t t = 0; t < pt.size(); ++t) {
      auto& m = *pt[t].second;
      const int n = static_cast<int>(m.size());
      const int samples = std::min(n, 25);
      for (int s = 0; s < samples; ++s) {
        const int idx = n <= 25 ? s : rng.index(n);
        const double keep = m.data()[idx];
        m.data()[idx] = keep + kFdStep;
        const double up = train::ppo_loss(p, batch, w, nullptr).total;
        m.data()[idx] = keep - kFdStep;
        const double dn = train::ppo_loss(p, batch, w, nullptr).total;
        m.data()[idx] = keep;
        const double fd = (up - dn) / (2 * kFdStep);
        const double an = gt[t].second->data()[idx];
        const double rel = std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), kGradFloor});
        ++compared;
        if (rel > worst) {
          worst = rel;
          worst_at = pt[t].first + "[" + std::to_string(idx) + "] draw " + std::to_string(draw);
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  Verdict v;
  v.pass = worst < kGradTol && secs < 60.0;
  v.detail = std::to_string(compared) + " entries over 20 draws at NP=6, h=1e-5: max relative error " +
             fmt("%.2e", worst) + " at " + worst_at + " (tol 1e-4, floor 1e-6); " + fmt("%.1f", secs) +
             " s (limit 60)";
  return v;
}

// ---- 5. Oracle equivalence ------------------------------------------------------

std::vector<Vector> blobs(Rng& rng, int n, int n_blobs, double spread, int dim) {
  std::vector<Vector> centers;
  for (int b = 0; b < n_blobs; ++b) {
    Vector c(dim);
    for (int d = 0; d < dim; ++d) c[d] = rng.uniform(0.0, 1.0);
    centers.push_back(c);
  }
  std::vector<Vector> pts;
  for (int i = 0; i < n; ++i) {
    Vector p = centers[rng.index(n_blobs)];
    for (int d = 0; d < dim; ++d) p[d] += rng.normal(0.0, spread);
    pts.push_back(p);
  }
  return pts;
}

Verdict criterion5() {
  Rng rng(0x0AC1E);
  Verdict v;
  int knn_bad = 0;
  for (int c = 0; c < 100; ++c) {
    const int n = 5 + rng.index(196), d = 1 + rng.index(5), k = 1 + rng.index(std::min(n - 1, 8));
    std::vector<Vector> pts(n, Vector(d));
    for (auto& p : pts)
      for (int j = 0; j < d; ++j) p[j] = rng.uniform(-3.0, 3.0);
    for (int m = 0; m < n / 10; ++m) pts[rng.index(n)] = pts[rng.index(n)];
    std::vector<double> obj(n);
    for (auto& o : obj) o = rng.uniform(0.0, 1.0);
    if (evo::knn_neighborhoods(pts, obj, k).members != oracle::knn(pts, k)) ++knn_bad;
  }

  int db_bad = 0, all_noise = 0, single = 0;
  for (int c = 0; c < 50; ++c) {
    const int dim = 1 + rng.index(3);
    std::vector<Vector> pts;
    double eps = rng.uniform(0.02, 0.3);
    int ms = 2 + rng.index(5);
    bool want_noise = false, want_single = false;
    switch (c % 5) {
      case 0:  // points on a grid with spacing above eps: every point is noise
        for (int i = 0; i < 20; ++i) pts.push_back(Vector::Constant(dim, i * 1.0));
        eps = 0.5;
        want_noise = true;
        break;
      case 1:
        pts = blobs(rng, 10 + rng.index(60), 1, 0.002, dim);
        eps = 0.1;
        ms = 3;
        want_single = true;
        break;
      case 2: pts = blobs(rng, 1 + rng.index(100), 2, 0.05, dim); break;
      case 3: pts = blobs(rng, 1 + rng.index(100), 1 + rng.index(5), 0.1, dim); break;
      default: pts = blobs(rng, 1 + rng.index(100), 30, 0.0, dim); break;
    }
    const auto got = cluster::dbscan(pts, eps, ms);
    const auto ref = oracle::dbscan(pts, eps, ms);
    if (got.labels != ref) ++db_bad;
    if (want_noise) all_noise += (got.n_clusters == 0 && got.n_noise() == static_cast<int>(pts.size()));
    if (want_single) single += (got.n_clusters == 1 && got.n_noise() == 0);
  }

  int cp_bad = 0, cp_cases = 0;
  for (int c = 0; c < 300; ++c) {
    const auto p = bench::make_problem(1 + rng.index(10));
    const int n = rng.index(16);
    std::vector<metrics::ArchivedSolution> sols;
    std::vector<Vector> pos;
    std::vector<double> obj;
    Vector centre(p.dimension);
    for (int d = 0; d < p.dimension; ++d) centre[d] = rng.uniform(p.lower[d], p.upper[d]);
    for (int i = 0; i < n; ++i) {
      Vector x(p.dimension);
      for (int d = 0; d < p.dimension; ++d) x[d] = centre[d] + rng.uniform(-3.0, 3.0) * p.niche_radius;
      const double o = p.peak_height - 1e-4 * rng.index(6);
      sols.push_back({x, o});
      pos.push_back(x);
      obj.push_back(o);
    }
    const double acc = 3e-4;
    ++cp_cases;
    if (metrics::count_peaks(sols, p, acc) !=
        oracle::count_peaks(pos, obj, p.peak_height, acc, p.niche_radius, p.n_global_optima))
      ++cp_bad;
  }
  v.pass = knn_bad == 0 && db_bad == 0 && cp_bad == 0 && all_noise == 10 && single == 10;
  v.detail = "KNN mismatches " + std::to_string(knn_bad) + "/100; DBSCAN mismatches " + std::to_string(db_bad) +
             "/50 (all-noise sets " + std::to_string(all_noise) + "/10, single-cluster sets " + std::to_string(single) +
             "/10); count_peaks mismatches " + std::to_string(cp_bad) + "/" + std::to_string(cp_cases) +
             " archives of <= 15 points";
  return v;
}

// ---- 6. Invariant suite ----------------------------------------------------------

constexpr int kCases = 200;

evo::Population evolved(int id, int np, int gens, std::uint64_t seed) {
  const auto p = bench::make_problem(id);
  evo::EvolutionParams params;
  params.population_size = np;
  auto pop = evo::init_population(p, params, seed);
  Rng rng(seed + 1);
  for (int g = 0; g < gens; ++g) {
    std::vector<int> a(np);
    for (int& x : a) x = 1 + rng.index(5);
    evo::step(pop, a, p, params, seed + 2);
  }
  return pop;
}

Verdict criterion6() {
  Rng rng(0x1A7);
  std::vector<std::pair<std::string, int>> failures;  // property -> failing cases
  auto tally = [&](const std::string& name, int bad) { failures.emplace_back(name, bad); };

  {  // feature bounds and f_g row equality
    const int bounded[] = {1, 3, 4, 6, 8, 10, 11, 12, 15, 17, 20, 22};  // time, stagnation, distance
    int bad_bounds = 0, bad_rows = 0;
    for (int c = 0; c < kCases; ++c) {
      const int id = 1 + rng.index(20);
      const auto pop = evolved(id, 6 + rng.index(30), rng.index(8), rng.engine()());
      const auto s = features::extract_state(pop, pop.neighborhoods);
      bool ok_b = s.population.allFinite() && s.individual.allFinite(), ok_r = true;
      for (int i = 0; i < pop.size(); ++i) {
        for (int b : bounded) {
          const double f = b <= 10 ? s.population(i, b - 1) : s.individual(i, b - 11);
          if (!(f >= 0.0 && f <= 1.0 + 1e-12)) ok_b = false;
        }
        for (int g = 0; g < features::kGlobalFeatures; ++g)
          if (s.population(i, g) != s.population(0, g)) ok_r = false;
      }
      bad_bounds += !ok_b;
      bad_rows += !ok_r;
    }
    tally("feature bounds", bad_bounds);
    tally("f_g row equality", bad_rows);
  }
  {  // softmax normalization
    int bad = 0;
    for (int c = 0; c < kCases; ++c) {
      const int n = 1 + rng.index(40);
      const double scale = c % 3 == 0 ? 60.0 : 3.0;
      const policy::Matrix logits = policy::Matrix::NullaryExpr(n, 5, [&] { return rng.uniform(-scale, scale); });
      const auto set = c % 2 ? evo::ActionSet::only({1, 4, 5}) : evo::ActionSet::all();
      const auto pr = policy::action_probabilities(logits, set);
      for (int i = 0; i < n; ++i) {
        if (std::abs(pr.row(i).sum() - 1.0) > 1e-12 || pr.row(i).minCoeff() < 0.0) ++bad, i = n;
      }
    }
    tally("softmax normalization", bad);
  }
  {  // permutation equivariance of forward
    int bad = 0;
    for (int c = 0; c < kCases; ++c) {
      const auto p = policy::init_params(rng.engine()(), c % 2 == 1);
      const int n = 1 + rng.index(24);
      const policy::Matrix fp = policy::Matrix::NullaryExpr(n, 10, [&] { return rng.uniform(0.0, 1.0); });
      const policy::Matrix fi = policy::Matrix::NullaryExpr(n, 12, [&] { return rng.uniform(-1.0, 1.0); });
      std::vector<int> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng.engine());
      policy::Matrix pp(n, 10), pi(n, 12);
      for (int i = 0; i < n; ++i) pp.row(i) = fp.row(perm[i]), pi.row(i) = fi.row(perm[i]);
      const auto a = policy::forward(p, fp, fi);
      const auto b = policy::forward(p, pp, pi);
      for (int i = 0; i < n; ++i)
        if ((b.logits.row(i) - a.logits.row(perm[i])).cwiseAbs().maxCoeff() > 1e-12 ||
            std::abs(b.values[i] - a.values[perm[i]]) > 1e-12) {
          ++bad;
          break;
        }
    }
    tally("forward permutation equivariance", bad);
  }
  {  // elitism monotonicity
    int bad = 0;
    for (int c = 0; c < kCases; ++c) {
      const int id = 1 + rng.index(20);
      const auto p = bench::make_problem(id);
      evo::EvolutionParams params;
      params.population_size = 5 + rng.index(40);
      auto pop = evo::init_population(p, params, rng.engine()());
      const std::uint64_t seed = rng.engine()();
      double prev = pop.individuals[pop.current_best()].objective, prev_star = pop.best_objective;
      bool ok = true;
      for (int g = 0; g < 6; ++g) {
        std::vector<int> a(pop.size());
        for (int& x : a) x = 1 + rng.index(5);
        std::vector<double> before = pop.objectives();
        evo::step(pop, a, p, params, seed);
        for (int i = 0; i < pop.size(); ++i)
          if (pop.individuals[i].objective < before[i]) ok = false;
        const double now = pop.individuals[pop.current_best()].objective;
        if (now < prev || pop.best_objective < prev_star) ok = false;
        prev = now;
        prev_star = pop.best_objective;
      }
      bad += !ok;
    }
    tally("elitism monotonicity", bad);
  }
  {  // FE budget
    int bad = 0;
    for (int c = 0; c < kCases; ++c) {
      const int id = 1 + rng.index(10);
      const auto p = bench::make_problem(id);
      evo::EvolutionParams params;
      params.population_size = 10 + rng.index(291);
      params.k = 3;
      auto pop = evo::init_population(p, params, rng.engine()());
      const std::uint64_t seed = rng.engine()();
      std::vector<int> a(pop.size());
      int gens = 0;
      bool exhausted = false;
      while (!exhausted) {
        for (int& x : a) x = 1 + rng.index(5);
        try {
          evo::step(pop, a, p, params, seed);
          ++gens;
        } catch (const BudgetExhausted&) {
          exhausted = true;
        }
        if (pop.evaluations > 50000) break;
      }
      if (!exhausted || pop.evaluations > 50000 || gens != params.horizon() ||
          pop.evaluations != static_cast<long>(params.population_size) * (gens + 1))
        ++bad;
    }
    tally("FE budget <= 50000", bad);
  }
  {  // PR / SR range and monotonicity in accuracy
    int bad = 0;
    const std::vector<double> levels(metrics::kAccuracyLevels.begin(), metrics::kAccuracyLevels.end());
    for (int c = 0; c < kCases; ++c) {
      const auto p = bench::make_problem(1 + rng.index(20));
      std::vector<metrics::RunResult> runs;
      const int nr = 1 + rng.index(8);
      for (int r = 0; r < nr; ++r) {
        std::vector<metrics::ArchivedSolution> sols;
        const int n = rng.index(60);
        for (int i = 0; i < n; ++i) {
          Vector x(p.dimension);
          for (int d = 0; d < p.dimension; ++d) x[d] = rng.uniform(p.lower[d], p.upper[d]);
          sols.push_back({x, p.peak_height - std::pow(10.0, rng.uniform(-7.0, 0.0))});
        }
        runs.push_back(metrics::summarize_run(sols, p, levels, r, 0));
      }
      bool ok = true;
      for (std::size_t k = 0; k < levels.size(); ++k) {
        const double pr = metrics::peak_ratio(runs, p, levels[k]);
        const double sr = metrics::success_rate(runs, p, levels[k]);
        if (!(pr >= 0.0 && pr <= 1.0 && sr >= 0.0 && sr <= 1.0 && sr <= pr + 1e-12)) ok = false;
        if (k > 0 && (pr > metrics::peak_ratio(runs, p, levels[k - 1]) ||
                      sr > metrics::success_rate(runs, p, levels[k - 1])))
          ok = false;
      }
      bad += !ok;
    }
    tally("PR/SR range and accuracy monotonicity", bad);
  }

  Verdict v;
  v.detail = std::to_string(kCases) + " cases each:";
  for (const auto& [name, bad] : failures) {
    v.detail += " " + name + " " + std::to_string(kCases - bad) + "/" + std::to_string(kCases) + ";";
    if (bad != 0) v.pass = false;
  }
  return v;
}

// ---- 7. Determinism through the command-line surface ------------------------------

std::string latest_run(const fs::path& root) {
  std::ifstream in(root / "latest");
  std::string name;
  std::getline(in, name);
  return name;
}

int quiet_cli(const std::vector<std::string>& args) {
  std::ostringstream sink;
  auto* out = std::cout.rdbuf(sink.rdbuf());
  auto* err = std::cerr.rdbuf(sink.rdbuf());
  const int code = run_cli(args);
  std::cout.rdbuf(out);
  std::cerr.rdbuf(err);
  return code;
}

Verdict criterion7() {
  const auto root = scratch("c7");
  const std::vector<std::string> small{"--set", "population_size=20", "--set", "max_fes=600", "--seed", "3"};
  struct Case {
    std::vector<std::string> args;
    std::vector<std::string> files;
  };
  auto with = [&](std::vector<std::string> a, bool budget) {
    if (budget) a.insert(a.end(), small.begin(), small.end());
    return a;
  };
  const std::vector<Case> cases{
      {with({"train", "--problems", "F1,F6", "--epochs", "2", "--batch-size", "2"}, true),
       {"curve.csv", "epoch_001.ckpt"}},
      {with({"evaluate", "--policy", "random", "--problems", "F2,F5,F11", "--runs", "3", "--trace",
             "--dump-features"},
            true),
       {"report.csv", "runs.csv", "trace/F5_run2.csv", "features/F11_run0.csv"}},
      {with({"evaluate", "--policy", "fixed:A3", "--problems", "F4", "--runs", "2"}, true),
       {"report.csv", "runs.csv"}},
      {with({"ablate", "action:An", "--problems", "F1", "--epochs", "1", "--batch-size", "2", "--eval-problems",
             "F2", "--runs", "2"},
            true),
       {"train/curve.csv", "eval/report.csv", "eval/runs.csv"}},
      {with({"bench-info", "all"}, false), {"bench_info.json"}},
  };
  Verdict v;
  int compared = 0;
  std::vector<std::vector<std::string>> run_dirs;
  for (const auto& c : cases) {
    std::vector<std::string> runs;
    for (int rep = 0; rep < 2; ++rep) {
      std::vector<std::string> args{"--output", root.string()};
      args.insert(args.end(), c.args.begin(), c.args.end());
      if (quiet_cli(args) != kExitOk) {
        v.pass = false;
        v.detail += " '" + c.args[0] + "' failed;";
      }
      runs.push_back(latest_run(root));
    }
    for (const auto& f : c.files) {
      const auto a = slurp(root / runs[0] / f), b = slurp(root / runs[1] / f);
      ++compared;
      if (a.empty() || a != b) {
        v.pass = false;
        v.detail += " " + c.args[0] + ":" + f + " differs;";
      }
    }
    run_dirs.push_back(runs);
  }
  // Same command, config and seed with a different worker count.
  {
    std::vector<std::string> args{"--output", root.string()};
    args.insert(args.end(), cases[1].args.begin(), cases[1].args.end());
    args.insert(args.end(), {"--jobs", "3"});
    if (quiet_cli(args) != kExitOk) v.pass = false;
    const auto threaded = latest_run(root);
    for (const auto& f : cases[1].files) {
      ++compared;
      if (slurp(root / run_dirs[1][0] / f) != slurp(root / threaded / f)) {
        v.pass = false;
        v.detail += " evaluate --jobs 3:" + f + " differs;";
      }
    }
  }
  fs::remove_all(root);
  v.detail = std::to_string(compared) + " output files compared across reruns of train, evaluate, ablate and "
             "bench-info (including a --jobs 3 rerun)" + v.detail;
  return v;
}

// ---- 8. Metric arithmetic ------------------------------------------------------------

metrics::RunResult fixture(int id, std::vector<int> found) {
  metrics::RunResult r;
  r.problem_id = id;
  r.accuracies = std::vector<double>(found.size(), 1e-3);
  for (std::size_t i = 0; i < found.size(); ++i) r.accuracies[i] = std::pow(10.0, -1.0 - static_cast<double>(i));
  r.found = std::move(found);
  return r;
}

Verdict criterion8() {
  Verdict v;
  auto expect = [&](const std::string& what, double got, double want) {
    const bool ok = std::abs(got - want) <= 1e-12;
    v.pass = v.pass && ok;
    v.detail += " " + what + " " + fmt("%.6g", got) + (ok ? "" : " (want " + fmt("%.6g", want) + ")") + ";";
  };
  const auto f4 = bench::make_problem(4);
  expect("NPF{4,2} NKP4 PR", metrics::peak_ratio({fixture(4, {4}), fixture(4, {2})}, f4, 1e-1), 0.75);
  expect("SR", metrics::success_rate({fixture(4, {4}), fixture(4, {2})}, f4, 1e-1), 0.5);
  const auto f6 = bench::make_problem(6);
  expect("NPF{18,18,9} NKP18 PR", metrics::peak_ratio({fixture(6, {18}), fixture(6, {18}), fixture(6, {9})}, f6, 1e-1),
         45.0 / 54.0);
  expect("SR", metrics::success_rate({fixture(6, {18}), fixture(6, {18}), fixture(6, {9})}, f6, 1e-1), 2.0 / 3.0);
  const auto f1 = bench::make_problem(1);
  const std::vector<metrics::RunResult> zero{fixture(1, {0, 0}), fixture(1, {1, 0})};
  expect("NPF{0,1} NKP2 PR", metrics::peak_ratio(zero, f1, 1e-1), 0.25);
  expect("SR", metrics::success_rate(zero, f1, 1e-1), 0.0);
  expect("at 1e-2 PR", metrics::peak_ratio(zero, f1, 1e-2), 0.0);

  // The same numbers through peak counting on constructed archives.
  std::vector<metrics::ArchivedSolution> all4, two;
  for (const auto& x : oracle::himmelblau_optima()) all4.push_back({x, f4.evaluate(x)});
  two = {all4[0], all4[1]};
  const std::vector<double> acc{1e-5};
  const std::vector<metrics::RunResult> runs{metrics::summarize_run(all4, f4, acc, 1, 0),
                                             metrics::summarize_run(two, f4, acc, 2, 0)};
  expect("archives {4 optima, 2 optima} PR", metrics::peak_ratio(runs, f4, 1e-5), 0.75);
  expect("SR", metrics::success_rate(runs, f4, 1e-5), 0.5);
  return v;
}

}  // namespace

// With arguments, only the listed criteria (by number) run.
int main(int argc, char** argv) {
  const std::vector<std::string> only(argv + 1, argv + argc);
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"1 benchmark fidelity", criterion1},     {"2 random policy on F1/F3/F4", criterion2},
      {"3 learning signal", criterion3},        {"4 gradient correctness", criterion4},
      {"5 oracle equivalence", criterion5},     {"6 invariant suite", criterion6},
      {"7 determinism", criterion7},            {"8 metric arithmetic", criterion8},
  };
  int failed = 0, ran = 0;
  for (const auto& [name, run] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), name.substr(0, name.find(' '))) == only.end()) continue;
    ++ran;
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    failed += !v.pass;
    std::cout << (v.pass ? "PASS " : "FAIL ") << name << ": " << v.detail << std::endl;
  }
  std::cout << (ran - failed) << "/" << ran << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
