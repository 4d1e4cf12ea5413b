#include "rlemmo/policy.hpp"

#include "rlemmo/errors.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace rlemmo::policy {

namespace {

constexpr double kInvSqrtHeadDim = 0.25;  // 1/sqrt(16)

void softmax_rows_inplace(Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double mx = m.row(r).maxCoeff();
    m.row(r) = (m.row(r).array() - mx).exp();
    m.row(r) /= m.row(r).sum();
  }
}

Matrix add_row_bias(Matrix m, const Matrix& bias) {
  m.rowwise() += bias.row(0);
  return m;
}

}  // namespace

PolicyParams PolicyParams::zeros(bool attn_residual) {
  PolicyParams p;
  p.w_pe = Matrix::Zero(kPopFeatures, kEmbed);
  p.b_pe = Matrix::Zero(1, kEmbed);
  p.w_ie = Matrix::Zero(kIndFeatures, kEmbed);
  p.b_ie = Matrix::Zero(1, kEmbed);
  p.w_q = Matrix::Zero(kModel, kModel);
  p.w_k = Matrix::Zero(kModel, kModel);
  p.w_v = Matrix::Zero(kModel, kModel);
  p.w_o = Matrix::Zero(kModel, kModel);
  p.w_actor = Matrix::Zero(kModel, kActions);
  p.b_actor = Matrix::Zero(1, kActions);
  p.w_critic = Matrix::Zero(kModel, 1);
  p.b_critic = Matrix::Zero(1, 1);
  p.attn_residual = attn_residual;
  return p;
}

std::vector<std::pair<std::string, Matrix*>> PolicyParams::tensors() {
  return {{"w_pe", &w_pe},         {"b_pe", &b_pe},       {"w_ie", &w_ie}, {"b_ie", &b_ie},
          {"w_q", &w_q},           {"w_k", &w_k},         {"w_v", &w_v},   {"w_o", &w_o},
          {"w_actor", &w_actor},   {"b_actor", &b_actor}, {"w_critic", &w_critic}, {"b_critic", &b_critic}};
}

std::vector<std::pair<std::string, const Matrix*>> PolicyParams::tensors() const {
  auto mut = const_cast<PolicyParams*>(this)->tensors();
  std::vector<std::pair<std::string, const Matrix*>> out;
  out.reserve(mut.size());
  for (auto& [name, m] : mut) out.emplace_back(name, m);
  return out;
}

long PolicyParams::parameter_count() const {
  long n = 0;
  for (const auto& [name, m] : tensors()) n += m->size();
  return n;
}

void PolicyParams::set_zero() {
  for (auto& [name, m] : tensors()) m->setZero();
}

PolicyParams& PolicyParams::operator+=(const PolicyParams& other) {
  auto mine = tensors();
  auto theirs = other.tensors();
  for (std::size_t i = 0; i < mine.size(); ++i) *mine[i].second += *theirs[i].second;
  return *this;
}

PolicyParams& PolicyParams::operator*=(double s) {
  for (auto& [name, m] : tensors()) *m *= s;
  return *this;
}

double PolicyParams::squared_norm() const {
  double s = 0.0;
  for (const auto& [name, m] : tensors()) s += m->squaredNorm();
  return s;
}

long expected_parameter_count() {
  return (kPopFeatures + 1L) * kEmbed + (kIndFeatures + 1L) * kEmbed + 4L * kModel * kModel + (kModel + 1L) * kActions +
         (kModel + 1L) * 1;
}

PolicyParams init_params(std::uint64_t seed, bool attn_residual) {
  PolicyParams p = PolicyParams::zeros(attn_residual);
  p.seed = seed;
  Rng rng(derive_seed(seed, {0x9A2A5ULL}));
  const auto fill = [&rng](Matrix& m, int fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = rng.uniform(-bound, bound);
  };
  fill(p.w_pe, kPopFeatures);
  fill(p.b_pe, kPopFeatures);
  fill(p.w_ie, kIndFeatures);
  fill(p.b_ie, kIndFeatures);
  fill(p.w_q, kModel);
  fill(p.w_k, kModel);
  fill(p.w_v, kModel);
  fill(p.w_o, kModel);
  fill(p.w_actor, kModel);
  fill(p.b_actor, kModel);
  fill(p.w_critic, kModel);
  fill(p.b_critic, kModel);
  return p;
}

ForwardCache forward(const PolicyParams& params, const Matrix& f_pop, const Matrix& f_ind) {
  if (f_pop.cols() != kPopFeatures || f_ind.cols() != kIndFeatures || f_pop.rows() != f_ind.rows() || f_pop.rows() == 0)
    throw std::invalid_argument("policy input must be NP x 10 and NP x 12 with NP >= 1");
  const Eigen::Index n = f_pop.rows();
  ForwardCache c;
  c.f_pop = f_pop;
  c.f_ind = f_ind;
  c.pe = add_row_bias(f_pop * params.w_pe, params.b_pe).array().tanh().matrix();
  c.ie = add_row_bias(f_ind * params.w_ie, params.b_ie).array().tanh().matrix();
  c.de.resize(n, kModel);
  c.de << c.pe, c.ie;

  c.q = c.de * params.w_q;
  c.k = c.de * params.w_k;
  c.v = c.de * params.w_v;
  c.o.resize(n, kModel);
  for (int h = 0; h < kHeads; ++h) {
    const auto qh = c.q.middleCols(h * kHeadDim, kHeadDim);
    const auto kh = c.k.middleCols(h * kHeadDim, kHeadDim);
    const auto vh = c.v.middleCols(h * kHeadDim, kHeadDim);
    c.attn[h] = (qh * kh.transpose()) * kInvSqrtHeadDim;
    softmax_rows_inplace(c.attn[h]);
    c.o.middleCols(h * kHeadDim, kHeadDim) = c.attn[h] * vh;
  }
  c.h = c.o * params.w_o;
  if (params.attn_residual) c.h += c.de;
  c.logits = add_row_bias(c.h * params.w_actor, params.b_actor);
  c.values = (c.h * params.w_critic).col(0).array() + params.b_critic(0, 0);
  return c;
}

void backward(const PolicyParams& params, const ForwardCache& c, const Matrix& d_logits, const Vector& d_values,
              PolicyParams& g) {
  const Eigen::Index n = c.h.rows();
  if (d_logits.rows() != n || d_logits.cols() != kActions || d_values.size() != n)
    throw std::invalid_argument("gradient shapes do not match the forward pass");

  g.w_actor.noalias() += c.h.transpose() * d_logits;
  g.b_actor += d_logits.colwise().sum();
  g.w_critic.noalias() += c.h.transpose() * d_values;
  g.b_critic(0, 0) += d_values.sum();

  Matrix d_h = d_logits * params.w_actor.transpose();
  d_h.noalias() += d_values * params.w_critic.transpose();

  g.w_o.noalias() += c.o.transpose() * d_h;
  const Matrix d_o = d_h * params.w_o.transpose();

  Matrix d_q(n, kModel), d_k(n, kModel), d_v(n, kModel);
  for (int h = 0; h < kHeads; ++h) {
    const auto& p = c.attn[h];
    const auto qh = c.q.middleCols(h * kHeadDim, kHeadDim);
    const auto kh = c.k.middleCols(h * kHeadDim, kHeadDim);
    const auto vh = c.v.middleCols(h * kHeadDim, kHeadDim);
    const auto d_oh = d_o.middleCols(h * kHeadDim, kHeadDim);
    const Matrix d_p = d_oh * vh.transpose();
    d_v.middleCols(h * kHeadDim, kHeadDim) = p.transpose() * d_oh;
    // Softmax Jacobian per row: dS = P .* (dP - rowsum(dP .* P)).
    const Eigen::VectorXd row_dot = (d_p.array() * p.array()).rowwise().sum();
    const Matrix d_s = (p.array() * (d_p.colwise() - row_dot).array()).matrix() * kInvSqrtHeadDim;
    d_q.middleCols(h * kHeadDim, kHeadDim) = d_s * kh;
    d_k.middleCols(h * kHeadDim, kHeadDim) = d_s.transpose() * qh;
  }
  g.w_q.noalias() += c.de.transpose() * d_q;
  g.w_k.noalias() += c.de.transpose() * d_k;
  g.w_v.noalias() += c.de.transpose() * d_v;

  Matrix d_de = d_q * params.w_q.transpose();
  d_de.noalias() += d_k * params.w_k.transpose();
  d_de.noalias() += d_v * params.w_v.transpose();
  if (params.attn_residual) d_de += d_h;

  const Matrix d_zp = (d_de.leftCols(kEmbed).array() * (1.0 - c.pe.array().square())).matrix();
  const Matrix d_zi = (d_de.rightCols(kEmbed).array() * (1.0 - c.ie.array().square())).matrix();
  g.w_pe.noalias() += c.f_pop.transpose() * d_zp;
  g.b_pe += d_zp.colwise().sum();
  g.w_ie.noalias() += c.f_ind.transpose() * d_zi;
  g.b_ie += d_zi.colwise().sum();
}

Matrix action_probabilities(const Matrix& logits, const evo::ActionSet& allowed) {
  if (logits.cols() != kActions) throw std::invalid_argument("logits must have 5 columns");
  if (!logits.allFinite()) throw NumericError("non-finite policy logits");
  Matrix p(logits.rows(), kActions);
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < kActions; ++a)
      if (allowed.allowed[a]) mx = std::max(mx, logits(r, a));
    double sum = 0.0;
    for (int a = 0; a < kActions; ++a) {
      p(r, a) = allowed.allowed[a] ? std::exp(logits(r, a) - mx) : 0.0;
      sum += p(r, a);
    }
    p.row(r) /= sum;
  }
  return p;
}

double joint_log_prob(const Matrix& probs, const std::vector<int>& actions) {
  double lp = 0.0;
  for (std::size_t i = 0; i < actions.size(); ++i) lp += std::log(probs(static_cast<Eigen::Index>(i), actions[i] - 1));
  return lp;
}

Decision sample(const Matrix& logits, Rng& rng, const evo::ActionSet& allowed) {
  Decision d;
  d.probs = action_probabilities(logits, allowed);
  d.actions.resize(logits.rows());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double u = rng.uniform();
    double acc = 0.0;
    int chosen = -1;
    for (int a = 0; a < kActions; ++a) {
      if (d.probs(r, a) <= 0.0) continue;
      acc += d.probs(r, a);
      chosen = a;
      if (u < acc) break;
    }
    d.actions[r] = chosen + 1;
  }
  d.log_prob = joint_log_prob(d.probs, d.actions);
  return d;
}

Decision greedy(const Matrix& logits, const evo::ActionSet& allowed) {
  Decision d;
  d.probs = action_probabilities(logits, allowed);
  d.actions.resize(logits.rows());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    int best = -1;
    for (int a = 0; a < kActions; ++a) {
      if (!allowed.allowed[a]) continue;
      if (best < 0 || logits(r, a) > logits(r, best)) best = a;
    }
    d.actions[r] = best + 1;
  }
  d.log_prob = joint_log_prob(d.probs, d.actions);
  return d;
}

nlohmann::json to_json(const PolicyParams& params) {
  nlohmann::json tensors = nlohmann::json::object();
  for (const auto& [name, m] : params.tensors()) {
    std::vector<double> data;
    data.reserve(m->size());
    for (Eigen::Index r = 0; r < m->rows(); ++r)
      for (Eigen::Index c = 0; c < m->cols(); ++c) data.push_back((*m)(r, c));
    tensors[name] = {{"shape", {m->rows(), m->cols()}}, {"data", data}};
  }
  return {{"format", "rlemmo-policy"},
          {"version", kFormatVersion},
          {"seed", params.seed},
          {"attn_residual", params.attn_residual},
          {"parameter_count", params.parameter_count()},
          {"tensors", tensors}};
}

PolicyParams from_json(const nlohmann::json& j) {
  const auto require = [&](const nlohmann::json& obj, const char* key) -> const nlohmann::json& {
    if (!obj.is_object() || !obj.contains(key)) throw ParseError(key, "missing field");
    return obj.at(key);
  };
  if (require(j, "format") != "rlemmo-policy") throw ParseError("format", "not an rlemmo policy");
  if (require(j, "version") != kFormatVersion) throw ParseError("version", "unsupported format version");
  const auto& attn = require(j, "attn_residual");
  if (!attn.is_boolean()) throw ParseError("attn_residual", "expected a boolean");
  PolicyParams p = PolicyParams::zeros(attn.get<bool>());
  const auto& seed = require(j, "seed");
  if (!seed.is_number_unsigned()) throw ParseError("seed", "expected an unsigned integer");
  p.seed = seed.get<std::uint64_t>();
  const auto& tensors = require(j, "tensors");
  for (auto& [name, m] : p.tensors()) {
    if (!tensors.is_object() || !tensors.contains(name)) throw ParseError("tensors." + name, "missing field");
    const auto& t = tensors.at(name);
    if (!t.is_object() || !t.contains("shape")) throw ParseError("tensors." + name + ".shape", "missing field");
    const auto& shape = t.at("shape");
    if (!shape.is_array() || shape.size() != 2 || shape[0] != m->rows() || shape[1] != m->cols())
      throw ParseError("tensors." + name + ".shape", "expected [" + std::to_string(m->rows()) + ", " +
                                                         std::to_string(m->cols()) + "]");
    if (!t.contains("data")) throw ParseError("tensors." + name + ".data", "missing field");
    const auto& data = t.at("data");
    if (!data.is_array() || static_cast<Eigen::Index>(data.size()) != m->size())
      throw ParseError("tensors." + name + ".data", "expected " + std::to_string(m->size()) + " values");
    Eigen::Index idx = 0;
    for (Eigen::Index r = 0; r < m->rows(); ++r)
      for (Eigen::Index c = 0; c < m->cols(); ++c) {
        const auto& v = data[idx++];
        if (!v.is_number()) throw ParseError("tensors." + name + ".data", "non-numeric entry");
        (*m)(r, c) = v.get<double>();
      }
  }
  return p;
}

void save(const PolicyParams& params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json(params).dump() << '\n';
}

PolicyParams load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.filename().string(), "cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.filename().string(), e.what());
  }
  if (j.is_object() && j.contains("policy")) return from_json(j.at("policy"));
  return from_json(j);
}

}  // namespace rlemmo::policy
