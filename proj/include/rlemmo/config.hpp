#pragma once

// Run configuration: defaults, a key = value file format with unknown-key
// rejection, and command-line overrides.

#include "rlemmo/clustering.hpp"
#include "rlemmo/evolution.hpp"
#include "rlemmo/features.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace rlemmo {

enum class RewardVariant { Clb, Best, Count };
enum class Algo { Ppo, A2c };
enum class CountFrom { Archive, FinalPopulation };

struct TrainConfig {
  // Meta-level training.
  int epochs = 60;
  int batch_size = 4;
  double lr_start = 5e-4;
  double lr_end = 2e-4;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_eps = 0.2;
  int ppo_epochs = 3;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  double max_grad_norm = 0.5;
  bool normalize_advantages = true;
  Algo algo = Algo::Ppo;
  bool attn_residual = false;
  bool shuffle_problems = false;

  // Low-level optimizer.
  evo::EvolutionParams evolution;

  // Clustering and reward.
  double dbscan_eps = 0.2;
  int dbscan_min_samples = 3;
  RewardVariant reward = RewardVariant::Clb;
  cluster::RewardOptions reward_options;

  features::StateAblation state;
  CountFrom count_from = CountFrom::Archive;
  std::optional<std::filesystem::path> data_dir;

  std::uint64_t seed = 1;
  int jobs = 1;

  /// Learning rate for epoch e, linear from lr_start to lr_end.
  double learning_rate(int epoch) const;

  /// Applies one `key = value` setting. Throws ParseError naming the key.
  void set(const std::string& key, const std::string& value);
  /// Every resolved setting as (key, value) strings, in a fixed order.
  std::vector<std::pair<std::string, std::string>> entries() const;
  void validate() const;
};

/// Reads a config file (`key = value`, `#` comments). Unknown keys are rejected.
void apply_config_file(TrainConfig& config, const std::filesystem::path& path);

/// Action-set names used by the ablation surface: all, An, Ag, null or "1,2,3".
evo::ActionSet parse_action_set(const std::string& text);
std::string action_set_name(const evo::ActionSet& set);

}  // namespace rlemmo
