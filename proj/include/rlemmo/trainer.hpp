#pragma once

// Episodes of the controlled optimizer, PPO updates on the attention policy,
// the epoch loop with checkpointing, and PR/SR evaluation of a controller.

#include "rlemmo/config.hpp"
#include "rlemmo/metrics.hpp"
#include "rlemmo/policy.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rlemmo::train {

using policy::Matrix;
using policy::PolicyParams;

/// How strategies are chosen during an episode.
struct Controller {
  enum class Kind { Sample, Greedy, Random, Fixed };
  Kind kind = Kind::Sample;
  const PolicyParams* params = nullptr;  // required for Sample / Greedy
  int fixed_action = 5;

  static Controller sampling(const PolicyParams& p) { return {Kind::Sample, &p, 0}; }
  static Controller greedy(const PolicyParams& p) { return {Kind::Greedy, &p, 0}; }
  static Controller random() { return {Kind::Random, nullptr, 0}; }
  static Controller fixed(int action) { return {Kind::Fixed, nullptr, action}; }
  std::string name() const;
};

struct StepRecord {
  Matrix f_pop;  // empty unless states are recorded
  Matrix f_ind;
  std::vector<int> actions;
  double log_prob = 0.0;
  double value = 0.0;  // mean critic output (normalized return scale)
  double reward = 0.0;
  int clusters = 0;
  double best_objective = 0.0;
};

struct Trajectory {
  int problem_id = 0;
  std::uint64_t seed = 0;
  int horizon = 0;
  std::vector<StepRecord> steps;

  double mean_reward() const;
  double mean_clusters() const;
  double final_best() const;
};

/// Per-generation snapshot handed to an optional observer (trace dumps).
struct GenerationTrace {
  int generation = 0;
  double best_objective = 0.0;
  std::array<int, evo::kNumActions> action_histogram{};
  int clusters = 0;
  double reward = 0.0;
  const features::StateFeatures* state = nullptr;
};
using TraceObserver = std::function<void(const GenerationTrace&)>;

struct Episode {
  Trajectory trajectory;
  evo::Population final_population;
};

/// One full episode: init, then T x {state -> decision -> step -> cluster -> reward}.
Episode rollout(const bench::Problem& problem, const Controller& controller, const TrainConfig& config,
                std::uint64_t seed, bool record_states = true, const TraceObserver& observer = {});

/// Running mean / variance of discounted returns; the critic regresses
/// returns standardized with these statistics.
struct ValueNorm {
  double mean = 0.0;
  double m2 = 0.0;
  double count = 0.0;

  double stddev() const;
  void update(std::span<const double> xs);
  double normalize(double x) const { return (x - mean) / stddev(); }
  double denormalize(double v) const { return v * stddev() + mean; }
};

struct Adam {
  PolicyParams m;
  PolicyParams v;
  long t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static Adam for_params(const PolicyParams& p);
  void apply(PolicyParams& params, const PolicyParams& grads, double lr);
};

struct TrainerState {
  PolicyParams params;
  Adam optimizer;
  ValueNorm value_norm;
  int epochs_done = 0;

  static TrainerState fresh(const TrainConfig& config);
};

/// Generalized advantage estimates and discounted returns for one episode
/// (terminal after the last step). `values` are on the return scale.
void compute_gae(std::span<const double> rewards, std::span<const double> values, double gamma, double lambda,
                 std::vector<double>& advantages, std::vector<double>& returns);

/// min(r A, clip(r, 1-eps, 1+eps) A).
double clipped_surrogate(double ratio, double advantage, double eps);

struct LossSample {
  Matrix f_pop;
  Matrix f_ind;
  std::vector<int> actions;
  double old_log_prob = 0.0;
  double advantage = 0.0;
  double value_target = 0.0;  // normalized return
};

struct LossWeights {
  double clip_eps = 0.2;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  evo::ActionSet actions;
};

struct LossTerms {
  double total = 0.0;
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double mean_ratio = 0.0;
};

/// Mean over samples of -surrogate + c_v (V - target)^2 - c_e H, with V the mean
/// per-individual critic value and H the mean per-individual entropy. The
/// gradient is accumulated into `grads` when given.
LossTerms ppo_loss(const PolicyParams& params, std::span<const LossSample> samples, const LossWeights& weights,
                   PolicyParams* grads);

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double first_epoch_mean_ratio = 0.0;
  int gradient_steps = 0;
};

/// PPO (or one-pass advantage actor-critic when config.algo is A2c) on the
/// given trajectories. Throws NumericError on a non-finite loss.
UpdateStats ppo_update(TrainerState& state, const std::vector<Trajectory>& trajectories, const TrainConfig& config,
                       double lr);

struct CurveRow {
  int epoch = 0;
  int problem = 0;
  double mean_reward = 0.0;
  double mean_clusters = 0.0;
  double mean_best = 0.0;
};

using Logger = std::function<void(const std::string&)>;

/// Epoch loop. Writes epoch_NNN.ckpt, a `latest` pointer and curve.csv into
/// out_dir, resuming from `latest` when present. Returns the final checkpoint.
std::filesystem::path train(const TrainConfig& config, const std::vector<int>& problem_ids,
                            const std::filesystem::path& out_dir, const Logger& log = {});

void save_checkpoint(const TrainerState& state, const std::filesystem::path& path);
TrainerState load_checkpoint(const std::filesystem::path& path);

struct EvalRow {
  int problem = 0;
  double accuracy = 0.0;
  double peak_ratio = 0.0;
  double success_rate = 0.0;
  int runs = 0;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  std::vector<metrics::RunResult> runs;
  std::vector<double> mean_episode_reward;  // per problem, averaged over runs
};

using EpisodeHook = std::function<TraceObserver(int problem_id, int run)>;

/// n_runs episodes per problem with seeds derived from (seed, problem, run);
/// PR / SR per problem and accuracy.
EvalReport evaluate_policy(const Controller& controller, const std::vector<int>& problem_ids, int n_runs,
                           const std::vector<double>& accuracies, const TrainConfig& config, std::uint64_t seed,
                           const EpisodeHook& hook = {});

/// Runs fn(i) for i in [0, n) on up to `jobs` threads.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

}  // namespace rlemmo::train
