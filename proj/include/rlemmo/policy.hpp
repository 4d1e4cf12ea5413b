#pragma once

// Attention actor-critic over the population: two tanh embedders, a 4-head
// self-attention block with the individuals as tokens, a 5-way actor head and
// a per-individual critic head. Forward and backward are written out by hand.

#include "rlemmo/evolution.hpp"
#include "rlemmo/rng.hpp"

#include <Eigen/Core>
#include <json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace rlemmo::policy {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr int kPopFeatures = 10;
inline constexpr int kIndFeatures = 12;
inline constexpr int kEmbed = 32;
inline constexpr int kModel = 2 * kEmbed;
inline constexpr int kHeads = 4;
inline constexpr int kHeadDim = kModel / kHeads;
inline constexpr int kActions = evo::kNumActions;
inline constexpr int kFormatVersion = 1;

/// Network weights. Also used as the gradient container (same shapes).
struct PolicyParams {
  Matrix w_pe, b_pe;          // 10x32, 1x32
  Matrix w_ie, b_ie;          // 12x32, 1x32
  Matrix w_q, w_k, w_v, w_o;  // 64x64 each, heads are 16-column slices
  Matrix w_actor, b_actor;    // 64x5, 1x5
  Matrix w_critic, b_critic;  // 64x1, 1x1
  bool attn_residual = false;
  std::uint64_t seed = 0;

  static PolicyParams zeros(bool attn_residual = false);

  /// Named views over every tensor, in a fixed order.
  std::vector<std::pair<std::string, Matrix*>> tensors();
  std::vector<std::pair<std::string, const Matrix*>> tensors() const;
  long parameter_count() const;

  void set_zero();
  PolicyParams& operator+=(const PolicyParams& other);
  PolicyParams& operator*=(double s);
  double squared_norm() const;
};

/// Closed-form parameter count of the architecture.
long expected_parameter_count();

/// Fan-in scaled uniform initialization, U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
PolicyParams init_params(std::uint64_t seed, bool attn_residual = false);

struct ForwardCache {
  Matrix f_pop, f_ind;
  Matrix pe, ie, de;                   // embeddings, NP x 32 / 32 / 64
  Matrix q, k, v;                      // NP x 64
  std::array<Matrix, kHeads> attn;     // NP x NP row-stochastic
  Matrix o;                            // concatenated head outputs
  Matrix h;                            // trunk output fed to both heads
  Matrix logits;                       // NP x 5
  Vector values;                       // NP
};

/// Throws std::invalid_argument on shape mismatch.
ForwardCache forward(const PolicyParams& params, const Matrix& f_pop, const Matrix& f_ind);

/// Accumulates into `grads` the gradient of a scalar loss whose partials with
/// respect to the logits and the per-individual values are given.
void backward(const PolicyParams& params, const ForwardCache& cache, const Matrix& d_logits, const Vector& d_values,
              PolicyParams& grads);

struct Decision {
  std::vector<int> actions;  // 1..5
  double log_prob = 0.0;     // joint, sum over individuals
  Matrix probs;              // NP x 5
  Vector values;
};

/// Row softmax restricted to the allowed actions (others get probability 0).
Matrix action_probabilities(const Matrix& logits, const evo::ActionSet& allowed = {});
/// Samples each row independently. Throws NumericError on non-finite logits.
Decision sample(const Matrix& logits, Rng& rng, const evo::ActionSet& allowed = {});
/// Per-row argmax, lowest action id on ties.
Decision greedy(const Matrix& logits, const evo::ActionSet& allowed = {});
/// Joint log-probability of `actions` under the masked softmax.
double joint_log_prob(const Matrix& probs, const std::vector<int>& actions);

nlohmann::json to_json(const PolicyParams& params);
/// Throws ParseError naming the offending field.
PolicyParams from_json(const nlohmann::json& j);
void save(const PolicyParams& params, const std::filesystem::path& path);
/// Accepts a bare policy file or a training checkpoint that embeds one.
PolicyParams load(const std::filesystem::path& path);

}  // namespace rlemmo::policy
