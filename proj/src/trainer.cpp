#include "rlemmo/trainer.hpp"

#include "rlemmo/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace rlemmo::train {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

int count_allowed(const evo::ActionSet& set) {
  return static_cast<int>(std::count(set.allowed.begin(), set.allowed.end(), true));
}

double reward_for(const TrainConfig& config, const evo::Population& pop, const cluster::ClusterLabels& labels) {
  switch (config.reward) {
    case RewardVariant::Clb: return cluster::reward_clb(pop, labels, config.reward_options);
    case RewardVariant::Best: return cluster::reward_b(pop);
    case RewardVariant::Count: return cluster::reward_c(labels, config.reward_options.noise);
  }
  return 0.0;
}

std::vector<metrics::ArchivedSolution> final_population_solutions(const evo::Population& pop) {
  std::vector<metrics::ArchivedSolution> out;
  out.reserve(pop.individuals.size());
  for (const auto& ind : pop.individuals) out.push_back({ind.position, ind.objective});
  return out;
}

void write_text_atomically(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
  }
  fs::rename(tmp, path);
}

std::string curve_csv(const std::vector<CurveRow>& rows) {
  std::ostringstream os;
  os << "epoch,problem,mean_reward,mean_clusters,mean_best_objective\n";
  for (const auto& r : rows)
    os << r.epoch << ",F" << r.problem << ',' << num(r.mean_reward) << ',' << num(r.mean_clusters) << ','
       << num(r.mean_best) << '\n';
  return os.str();
}

std::vector<CurveRow> read_curve(const fs::path& path, int before_epoch) {
  std::vector<CurveRow> rows;
  std::ifstream in(path);
  if (!in) return rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string f[5];
    for (auto& s : f) std::getline(ss, s, ',');
    CurveRow r;
    try {
      r.epoch = std::stoi(f[0]);
      r.problem = bench::parse_problem_id(f[1]);
      r.mean_reward = std::stod(f[2]);
      r.mean_clusters = std::stod(f[3]);
      r.mean_best = std::stod(f[4]);
    } catch (const std::exception&) {
      throw ParseError(path.filename().string(), "malformed row '" + line + "'");
    }
    if (r.epoch < before_epoch) rows.push_back(r);
  }
  return rows;
}

}  // namespace

std::string Controller::name() const {
  switch (kind) {
    case Kind::Sample: return "sample";
    case Kind::Greedy: return "greedy";
    case Kind::Random: return "random";
    case Kind::Fixed: return "fixed:A" + std::to_string(fixed_action);
  }
  return "?";
}

double Trajectory::mean_reward() const {
  if (steps.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : steps) s += r.reward;
  return s / static_cast<double>(steps.size());
}

double Trajectory::mean_clusters() const {
  if (steps.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : steps) s += r.clusters;
  return s / static_cast<double>(steps.size());
}

double Trajectory::final_best() const { return steps.empty() ? 0.0 : steps.back().best_objective; }

Episode rollout(const bench::Problem& problem, const Controller& controller, const TrainConfig& config,
                std::uint64_t seed, bool record_states, const TraceObserver& observer) {
  const auto& ev = config.evolution;
  const bool uses_network = controller.kind == Controller::Kind::Sample || controller.kind == Controller::Kind::Greedy;
  if (uses_network && controller.params == nullptr) throw std::invalid_argument("controller needs policy parameters");
  if (controller.kind == Controller::Kind::Fixed && (controller.fixed_action < 1 || controller.fixed_action > 5))
    throw std::invalid_argument("fixed strategy must be in 1..5");

  Episode ep;
  evo::Population& pop = ep.final_population;
  pop = evo::init_population(problem, ev, derive_seed(seed, {1}));
  Trajectory& traj = ep.trajectory;
  traj.problem_id = problem.id;
  traj.seed = seed;
  traj.horizon = pop.horizon;
  traj.steps.reserve(pop.horizon);

  Rng decision_rng(derive_seed(seed, {2}));
  const std::uint64_t evo_seed = derive_seed(seed, {3});
  const int n = pop.size();
  const int n_allowed = count_allowed(ev.actions);
  std::vector<int> allowed_ids;
  for (int a = 1; a <= evo::kNumActions; ++a)
    if (ev.actions.contains(a)) allowed_ids.push_back(a);

  for (int t = 0; t < pop.horizon; ++t) {
    const bool need_state = uses_network || record_states || observer;
    features::StateFeatures state;
    if (need_state) state = features::extract_state(pop, pop.neighborhoods, config.state);

    StepRecord rec;
    switch (controller.kind) {
      case Controller::Kind::Sample:
      case Controller::Kind::Greedy: {
        const auto fc = policy::forward(*controller.params, state.population, state.individual);
        const auto dec = controller.kind == Controller::Kind::Sample
                             ? policy::sample(fc.logits, decision_rng, ev.actions)
                             : policy::greedy(fc.logits, ev.actions);
        rec.actions = dec.actions;
        rec.log_prob = dec.log_prob;
        rec.value = fc.values.mean();
        break;
      }
      case Controller::Kind::Random:
        rec.actions.resize(n);
        for (int& a : rec.actions) a = allowed_ids[decision_rng.index(n_allowed)];
        rec.log_prob = -n * std::log(static_cast<double>(n_allowed));
        break;
      case Controller::Kind::Fixed:
        rec.actions.assign(n, controller.fixed_action);
        break;
    }

    try {
      evo::step(pop, rec.actions, problem, ev, evo_seed);
    } catch (const BudgetExhausted&) {
      break;
    }
    const auto labels = cluster::cluster_population(pop, config.dbscan_eps, config.dbscan_min_samples);
    rec.reward = reward_for(config, pop, labels);
    if (!std::isfinite(rec.reward)) throw NumericError("non-finite reward at generation " + std::to_string(t));
    rec.clusters = labels.n_clusters;
    rec.best_objective = cluster::reward_b(pop);

    if (observer) {
      GenerationTrace tr;
      tr.generation = pop.generation;
      tr.best_objective = rec.best_objective;
      for (int a : rec.actions) ++tr.action_histogram[a - 1];
      tr.clusters = rec.clusters;
      tr.reward = rec.reward;
      tr.state = &state;
      observer(tr);
    }
    if (record_states) {
      rec.f_pop = std::move(state.population);
      rec.f_ind = std::move(state.individual);
    }
    traj.steps.push_back(std::move(rec));
  }
  return ep;
}

double ValueNorm::stddev() const {
  if (count < 2.0) return 1.0;
  const double s = std::sqrt(m2 / count);
  return s > 1e-8 ? s : 1.0;
}

void ValueNorm::update(std::span<const double> xs) {
  if (xs.empty()) return;
  const double nb = static_cast<double>(xs.size());
  double mean_b = 0.0;
  for (double x : xs) mean_b += x;
  mean_b /= nb;
  double m2_b = 0.0;
  for (double x : xs) m2_b += (x - mean_b) * (x - mean_b);
  const double total = count + nb;
  const double delta = mean_b - mean;
  mean += delta * nb / total;
  m2 += m2_b + delta * delta * count * nb / total;
  count = total;
}

Adam Adam::for_params(const PolicyParams& p) {
  Adam a;
  a.m = PolicyParams::zeros(p.attn_residual);
  a.v = PolicyParams::zeros(p.attn_residual);
  return a;
}

void Adam::apply(PolicyParams& params, const PolicyParams& grads, double lr) {
  ++t;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  auto p = params.tensors();
  auto g = grads.tensors();
  auto mm = m.tensors();
  auto vv = v.tensors();
  for (std::size_t i = 0; i < p.size(); ++i) {
    auto& mi = *mm[i].second;
    auto& vi = *vv[i].second;
    const auto& gi = *g[i].second;
    mi = beta1 * mi + (1.0 - beta1) * gi;
    vi = beta2 * vi + (1.0 - beta2) * gi.cwiseProduct(gi);
    *p[i].second -= (lr * (mi / c1).array() / ((vi / c2).array().sqrt() + eps)).matrix();
  }
}

TrainerState TrainerState::fresh(const TrainConfig& config) {
  TrainerState s;
  s.params = policy::init_params(derive_seed(config.seed, {0x1417ULL}), config.attn_residual);
  s.optimizer = Adam::for_params(s.params);
  return s;
}

void compute_gae(std::span<const double> rewards, std::span<const double> values, double gamma, double lambda,
                 std::vector<double>& advantages, std::vector<double>& returns) {
  const std::size_t n = rewards.size();
  if (values.size() != n) throw std::invalid_argument("rewards and values differ in length");
  advantages.assign(n, 0.0);
  returns.assign(n, 0.0);
  double next_value = 0.0;
  double gae = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const double delta = rewards[k] + gamma * next_value - values[k];
    gae = delta + gamma * lambda * gae;
    advantages[k] = gae;
    returns[k] = gae + values[k];
    next_value = values[k];
  }
}

double clipped_surrogate(double ratio, double advantage, double eps) {
  const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
  return std::min(ratio * advantage, clipped * advantage);
}

LossTerms ppo_loss(const PolicyParams& params, std::span<const LossSample> samples, const LossWeights& w,
                   PolicyParams* grads) {
  LossTerms out;
  if (samples.empty()) return out;
  const double inv_b = 1.0 / static_cast<double>(samples.size());
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const auto& smp = samples[s];
    const auto fc = policy::forward(params, smp.f_pop, smp.f_ind);
    const Eigen::Index n = fc.logits.rows();
    const double inv_n = 1.0 / static_cast<double>(n);
    const Matrix p = policy::action_probabilities(fc.logits, w.actions);

    double log_prob = 0.0;
    double entropy = 0.0;
    Eigen::VectorXd row_entropy(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      log_prob += std::log(p(i, smp.actions[i] - 1));
      double h = 0.0;
      for (int a = 0; a < policy::kActions; ++a)
        if (p(i, a) > 0.0) h -= p(i, a) * std::log(p(i, a));
      row_entropy[i] = h;
      entropy += h;
    }
    entropy *= inv_n;
    const double ratio = std::exp(log_prob - smp.old_log_prob);
    const double surrogate = clipped_surrogate(ratio, smp.advantage, w.clip_eps);
    const double value = fc.values.mean();
    const double verr = value - smp.value_target;

    out.policy += -surrogate * inv_b;
    out.value += verr * verr * inv_b;
    out.entropy += entropy * inv_b;
    out.mean_ratio += ratio * inv_b;
    const bool unclipped = ratio * smp.advantage <= std::clamp(ratio, 1.0 - w.clip_eps, 1.0 + w.clip_eps) * smp.advantage;
    if (!unclipped) out.clip_fraction += inv_b;

    if (grads == nullptr) continue;
    const double d_logp = unclipped ? -smp.advantage * ratio * inv_b : 0.0;
    Matrix d_logits(n, policy::kActions);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int a = 0; a < policy::kActions; ++a) {
        const double pa = p(i, a);
        const double onehot = (smp.actions[i] - 1 == a) ? 1.0 : 0.0;
        // dH_i/dz_a = -p_a (log p_a + H_i); zero for masked actions.
        const double d_h = pa > 0.0 ? -pa * (std::log(pa) + row_entropy[i]) : 0.0;
        d_logits(i, a) = d_logp * (onehot - pa) - w.entropy_coef * inv_b * inv_n * d_h;
      }
    }
    const Eigen::VectorXd d_values = Eigen::VectorXd::Constant(n, w.value_coef * inv_b * 2.0 * verr * inv_n);
    policy::backward(params, fc, d_logits, d_values, *grads);
  }
  out.total = out.policy + w.value_coef * out.value - w.entropy_coef * out.entropy;
  return out;
}

UpdateStats ppo_update(TrainerState& state, const std::vector<Trajectory>& trajectories, const TrainConfig& config,
                       double lr) {
  if (trajectories.empty()) throw std::invalid_argument("ppo_update needs at least one trajectory");
  const bool a2c = config.algo == Algo::A2c;

  std::vector<std::vector<double>> adv(trajectories.size()), ret(trajectories.size());
  std::vector<double> all_returns;
  for (std::size_t b = 0; b < trajectories.size(); ++b) {
    const auto& steps = trajectories[b].steps;
    std::vector<double> rewards, values;
    for (const auto& r : steps) {
      rewards.push_back(r.reward);
      values.push_back(state.value_norm.denormalize(r.value));
    }
    if (a2c) {
      compute_gae(rewards, values, config.gamma, 0.0, adv[b], ret[b]);
    } else {
      compute_gae(rewards, values, config.gamma, config.gae_lambda, adv[b], ret[b]);
    }
    all_returns.insert(all_returns.end(), ret[b].begin(), ret[b].end());
  }
  state.value_norm.update(all_returns);

  if (config.normalize_advantages) {
    double mean = 0.0;
    long count = 0;
    for (const auto& a : adv)
      for (double x : a) mean += x, ++count;
    mean /= static_cast<double>(std::max(count, 1L));
    double var = 0.0;
    for (const auto& a : adv)
      for (double x : a) var += (x - mean) * (x - mean);
    const double sd = std::sqrt(var / static_cast<double>(std::max(count, 1L)));
    for (auto& a : adv)
      for (double& x : a) x = sd > 1e-8 ? (x - mean) / sd : x - mean;
  }

  std::vector<std::vector<LossSample>> batches(trajectories.size());
  for (std::size_t b = 0; b < trajectories.size(); ++b) {
    const auto& steps = trajectories[b].steps;
    batches[b].reserve(steps.size());
    for (std::size_t t = 0; t < steps.size(); ++t) {
      if (steps[t].f_pop.size() == 0) throw std::invalid_argument("trajectory was recorded without states");
      batches[b].push_back({steps[t].f_pop, steps[t].f_ind, steps[t].actions, steps[t].log_prob, adv[b][t],
                            state.value_norm.normalize(ret[b][t])});
    }
  }

  LossWeights w;
  w.clip_eps = a2c ? 1e9 : config.clip_eps;
  w.value_coef = config.value_coef;
  w.entropy_coef = config.entropy_coef;
  w.actions = config.evolution.actions;

  UpdateStats stats;
  const int inner = a2c ? 1 : config.ppo_epochs;
  PolicyParams grads = PolicyParams::zeros(state.params.attn_residual);
  for (int e = 0; e < inner; ++e) {
    for (std::size_t b = 0; b < batches.size(); ++b) {
      if (batches[b].empty()) continue;
      grads.set_zero();
      const LossTerms terms = ppo_loss(state.params, batches[b], w, &grads);
      if (!std::isfinite(terms.total) || !std::isfinite(grads.squared_norm()))
        throw NumericError("non-finite loss at gradient step " + std::to_string(stats.gradient_steps) +
                           ", trajectory " + std::to_string(b) + " (problem F" +
                           std::to_string(trajectories[b].problem_id) + ", seed " +
                           std::to_string(trajectories[b].seed) + ")");
      if (stats.gradient_steps == 0) stats.first_epoch_mean_ratio = terms.mean_ratio;
      const double norm = std::sqrt(grads.squared_norm());
      if (norm > config.max_grad_norm) grads *= config.max_grad_norm / norm;
      state.optimizer.apply(state.params, grads, lr);
      ++stats.gradient_steps;
      stats.policy_loss += terms.policy;
      stats.value_loss += terms.value;
      stats.entropy += terms.entropy;
      stats.clip_fraction += terms.clip_fraction;
    }
  }
  if (stats.gradient_steps > 0) {
    const double k = 1.0 / stats.gradient_steps;
    stats.policy_loss *= k;
    stats.value_loss *= k;
    stats.entropy *= k;
    stats.clip_fraction *= k;
  }
  return stats;
}

void save_checkpoint(const TrainerState& state, const fs::path& path) {
  nlohmann::json j = {{"format", "rlemmo-checkpoint"},
                      {"version", policy::kFormatVersion},
                      {"epochs_done", state.epochs_done},
                      {"policy", policy::to_json(state.params)},
                      {"adam",
                       {{"t", state.optimizer.t},
                        {"m", policy::to_json(state.optimizer.m)},
                        {"v", policy::to_json(state.optimizer.v)}}},
                      {"value_norm",
                       {{"mean", state.value_norm.mean}, {"m2", state.value_norm.m2}, {"count", state.value_norm.count}}}};
  write_text_atomically(path, j.dump() + "\n");
}

TrainerState load_checkpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.filename().string(), "cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.filename().string(), e.what());
  }
  const auto need = [](const nlohmann::json& obj, const char* key) -> const nlohmann::json& {
    if (!obj.is_object() || !obj.contains(key)) throw ParseError(key, "missing field");
    return obj.at(key);
  };
  if (need(j, "format") != "rlemmo-checkpoint") throw ParseError("format", "not an rlemmo checkpoint");
  TrainerState s;
  s.params = policy::from_json(need(j, "policy"));
  s.epochs_done = need(j, "epochs_done").get<int>();
  const auto& adam = need(j, "adam");
  s.optimizer = Adam::for_params(s.params);
  s.optimizer.t = need(adam, "t").get<long>();
  s.optimizer.m = policy::from_json(need(adam, "m"));
  s.optimizer.v = policy::from_json(need(adam, "v"));
  const auto& vn = need(j, "value_norm");
  s.value_norm.mean = need(vn, "mean").get<double>();
  s.value_norm.m2 = need(vn, "m2").get<double>();
  s.value_norm.count = need(vn, "count").get<double>();
  return s;
}

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  if (jobs <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  const int nthreads = std::min(jobs, n);
  for (int w = 0; w < nthreads; ++w)
    workers.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : workers) t.join();
  if (error) std::rethrow_exception(error);
}

fs::path train(const TrainConfig& config, const std::vector<int>& problem_ids, const fs::path& out_dir,
               const Logger& log) {
  config.validate();
  if (problem_ids.empty()) throw std::invalid_argument("no training problems");
  fs::create_directories(out_dir);

  TrainerState state;
  std::vector<CurveRow> curve;
  fs::path last_ckpt;
  const fs::path latest = out_dir / "latest";
  if (fs::exists(latest)) {
    std::ifstream in(latest);
    std::string name;
    std::getline(in, name);
    last_ckpt = out_dir / name;
    state = load_checkpoint(last_ckpt);
    curve = read_curve(out_dir / "curve.csv", state.epochs_done);
    if (log) log("resuming after epoch " + std::to_string(state.epochs_done) + " from " + last_ckpt.string());
  } else {
    state = TrainerState::fresh(config);
  }

  std::vector<bench::Problem> problems;
  for (int id : problem_ids) problems.push_back(bench::make_problem(id, config.data_dir));

  for (int epoch = state.epochs_done; epoch < config.epochs; ++epoch) {
    const double lr = config.learning_rate(epoch);
    std::vector<std::size_t> order(problems.size());
    std::iota(order.begin(), order.end(), 0);
    if (config.shuffle_problems) {
      Rng rng(derive_seed(config.seed, {static_cast<std::uint64_t>(epoch), 0x5u}));
      std::shuffle(order.begin(), order.end(), rng.engine());
    }
    for (std::size_t idx : order) {
      const auto& problem = problems[idx];
      std::vector<Trajectory> batch(config.batch_size);
      const Controller controller = Controller::sampling(state.params);
      parallel_for(config.batch_size, config.jobs, [&](int b) {
        const auto seed = derive_seed(config.seed, {static_cast<std::uint64_t>(epoch),
                                                    static_cast<std::uint64_t>(problem.id),
                                                    static_cast<std::uint64_t>(b)});
        batch[b] = rollout(problem, controller, config, seed).trajectory;
      });
      CurveRow row{epoch, problem.id, 0.0, 0.0, 0.0};
      for (const auto& t : batch) {
        row.mean_reward += t.mean_reward() / config.batch_size;
        row.mean_clusters += t.mean_clusters() / config.batch_size;
        row.mean_best += t.final_best() / config.batch_size;
      }
      const auto stats = ppo_update(state, batch, config, lr);
      curve.push_back(row);
      if (log)
        log("epoch " + std::to_string(epoch) + " F" + std::to_string(problem.id) + " lr " + num(lr) + " reward " +
            num(row.mean_reward) + " clusters " + num(row.mean_clusters) + " best " + num(row.mean_best) +
            " policy_loss " + num(stats.policy_loss) + " value_loss " + num(stats.value_loss) + " entropy " +
            num(stats.entropy));
    }
    state.epochs_done = epoch + 1;
    char name[32];
    std::snprintf(name, sizeof name, "epoch_%03d.ckpt", epoch);
    last_ckpt = out_dir / name;
    save_checkpoint(state, last_ckpt);
    write_text_atomically(out_dir / "curve.csv", curve_csv(curve));
    write_text_atomically(latest, std::string(name) + "\n");
  }
  return last_ckpt;
}

EvalReport evaluate_policy(const Controller& controller, const std::vector<int>& problem_ids, int n_runs,
                           const std::vector<double>& accuracies, const TrainConfig& config, std::uint64_t seed,
                           const EpisodeHook& hook) {
  if (n_runs < 1) throw std::invalid_argument("need at least one run");
  EvalReport report;
  for (int id : problem_ids) {
    const auto problem = bench::make_problem(id, config.data_dir);
    std::vector<metrics::RunResult> runs(n_runs);
    std::vector<double> rewards(n_runs);
    parallel_for(n_runs, config.jobs, [&](int r) {
      const auto run_seed = derive_seed(seed, {static_cast<std::uint64_t>(id), static_cast<std::uint64_t>(r)});
      const auto ep = rollout(problem, controller, config, run_seed, false, hook ? hook(id, r) : TraceObserver{});
      const auto& pop = ep.final_population;
      const auto solutions =
          config.count_from == CountFrom::Archive ? pop.archive.entries() : final_population_solutions(pop);
      runs[r] = metrics::summarize_run(solutions, problem, accuracies, run_seed, pop.evaluations);
      rewards[r] = ep.trajectory.mean_reward();
    });
    for (double acc : accuracies)
      report.rows.push_back({id, acc, metrics::peak_ratio(runs, problem, acc), metrics::success_rate(runs, problem, acc),
                             n_runs});
    report.runs.insert(report.runs.end(), runs.begin(), runs.end());
    report.mean_episode_reward.push_back(std::accumulate(rewards.begin(), rewards.end(), 0.0) / n_runs);
  }
  return report;
}

}  // namespace rlemmo::train
