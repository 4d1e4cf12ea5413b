#include "rlemmo/benchmark.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rlemmo::bench {

namespace {

constexpr int kWeierstrassKMax = 20;

struct WeierstrassTable {
  std::array<double, kWeierstrassKMax + 1> a{};  // 0.5^k
  std::array<double, kWeierstrassKMax + 1> b{};  // 3^k
  double offset = 0.0;                           // sum_k a_k cos(pi b_k)

  WeierstrassTable() {
    double ak = 1.0;
    double bk = 1.0;
    for (int k = 0; k <= kWeierstrassKMax; ++k) {
      a[k] = ak;
      b[k] = bk;
      offset += ak * std::cos(2.0 * std::numbers::pi * bk * 0.5);
      ak *= 0.5;
      bk *= 3.0;
    }
  }
};

const WeierstrassTable& weierstrass_table() {
  static const WeierstrassTable table;
  return table;
}

double sphere(const Vector& x) { return x.squaredNorm(); }

double griewank(const Vector& x) {
  double sum = 0.0;
  double prod = 1.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    sum += x[i] * x[i] / 4000.0;
    prod *= std::cos(x[i] / std::sqrt(static_cast<double>(i + 1)));
  }
  return sum - prod + 1.0;
}

double rastrigin(const Vector& x) {
  double sum = 0.0;
  for (double v : x) sum += v * v - 10.0 * std::cos(2.0 * std::numbers::pi * v) + 10.0;
  return sum;
}

double weierstrass(const Vector& x) {
  const auto& t = weierstrass_table();
  double sum = 0.0;
  for (double v : x) {
    for (int k = 0; k <= kWeierstrassKMax; ++k) sum += t.a[k] * std::cos(2.0 * std::numbers::pi * t.b[k] * (v + 0.5));
  }
  return sum - static_cast<double>(x.size()) * t.offset;
}

// Griewank applied to the 2-D Rosenbrock value. Arguments are shifted by +1
// so that the minimum of the expanded function sits at the origin.
double f8f2(double x0, double x1) {
  const double u = x0 + 1.0;
  const double v = x1 + 1.0;
  const double f2 = 100.0 * (u * u - v) * (u * u - v) + (u - 1.0) * (u - 1.0);
  return f2 * f2 / 4000.0 - std::cos(f2) + 1.0;
}

double ef8f2(const Vector& x) {
  const Eigen::Index d = x.size();
  if (d == 1) return f8f2(x[0], x[0]);
  double sum = 0.0;
  for (Eigen::Index i = 0; i + 1 < d; ++i) sum += f8f2(x[i], x[i + 1]);
  sum += f8f2(x[d - 1], x[0]);
  return sum;
}

}  // namespace

Primitive primitive_from_name(std::string_view name) {
  if (name == "sphere") return Primitive::Sphere;
  if (name == "griewank") return Primitive::Griewank;
  if (name == "rastrigin") return Primitive::Rastrigin;
  if (name == "weierstrass") return Primitive::Weierstrass;
  if (name == "ef8f2") return Primitive::EF8F2;
  throw std::invalid_argument("unknown primitive '" + std::string(name) + "'");
}

std::string_view primitive_name(Primitive p) {
  switch (p) {
    case Primitive::Sphere: return "sphere";
    case Primitive::Griewank: return "griewank";
    case Primitive::Rastrigin: return "rastrigin";
    case Primitive::Weierstrass: return "weierstrass";
    case Primitive::EF8F2: return "ef8f2";
  }
  return "?";
}

double primitive(Primitive p, const Vector& x) {
  switch (p) {
    case Primitive::Sphere: return sphere(x);
    case Primitive::Griewank: return griewank(x);
    case Primitive::Rastrigin: return rastrigin(x);
    case Primitive::Weierstrass: return weierstrass(x);
    case Primitive::EF8F2: return ef8f2(x);
  }
  throw std::invalid_argument("unknown primitive");
}

double primitive(std::string_view name, const Vector& x) { return primitive(primitive_from_name(name), x); }

void CompositionSpec::validate() const {
  const auto n = functions.size();
  if (n == 0) throw std::invalid_argument("composition has no components");
  if (shifts.size() != n || lambdas.size() != n || rotations.size() != n || biases.size() != n || sigmas.size() != n)
    throw std::invalid_argument("composition component arrays differ in length");
  const auto d = shifts.front().size();
  for (std::size_t i = 0; i < n; ++i) {
    if (shifts[i].size() != d) throw std::invalid_argument("composition shift dimension mismatch");
    if (rotations[i].rows() != d || rotations[i].cols() != d)
      throw std::invalid_argument("composition rotation dimension mismatch");
  }
}

void CompositionSpec::normalize() {
  validate();
  const Vector five = Vector::Constant(dimension(), 5.0);
  fmax.assign(functions.size(), 0.0);
  for (std::size_t i = 0; i < functions.size(); ++i) {
    const Vector z = rotations[i].transpose() * (five / lambdas[i]);
    fmax[i] = std::abs(primitive(functions[i], z));
  }
}

std::vector<double> composition_weights(const CompositionSpec& spec, const Vector& x) {
  const int n = spec.n_components();
  const double d = static_cast<double>(spec.dimension());
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) {
    const double dist2 = (x - spec.shifts[i]).squaredNorm();
    w[i] = std::exp(-dist2 / (2.0 * d * spec.sigmas[i] * spec.sigmas[i]));
  }
  double maxw = 0.0;
  for (double v : w) maxw = std::max(maxw, v);
  const double scale = 1.0 - std::pow(maxw, 10.0);
  for (double& v : w)
    if (v != maxw) v *= scale;
  double sum = 0.0;
  for (double v : w) sum += v;
  for (double& v : w) v = sum == 0.0 ? 1.0 / n : v / sum;
  return w;
}

double evaluate_composition(const CompositionSpec& spec, const Vector& x) {
  if (x.size() != spec.dimension())
    throw std::invalid_argument("composition expects dimension " + std::to_string(spec.dimension()) + ", got " +
                                std::to_string(x.size()));
  if (spec.fmax.size() != spec.functions.size()) throw std::invalid_argument("composition not normalized");
  const auto w = composition_weights(spec, x);
  double total = 0.0;
  for (int i = 0; i < spec.n_components(); ++i) {
    // Row vector (x - o)/lambda times M, i.e. M^T applied to the column.
    const Vector z = spec.rotations[i].transpose() * ((x - spec.shifts[i]) / spec.lambdas[i]);
    const double fi = spec.C * primitive(spec.functions[i], z) / spec.fmax[i];
    total += w[i] * (fi + spec.biases[i]);
  }
  return -total + spec.f_bias;
}

}  // namespace rlemmo::bench
