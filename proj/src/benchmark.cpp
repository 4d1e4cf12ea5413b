#include "rlemmo/benchmark.hpp"

#include "rlemmo/errors.hpp"
#include "rlemmo/rng.hpp"

#include <Eigen/QR>

#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace rlemmo::bench {

namespace {

// Five-Uneven-Peak Trap, x in [0, 30].
double five_uneven_peak_trap(double x) {
  if (x < 2.5) return 80.0 * (2.5 - x);
  if (x < 5.0) return 64.0 * (x - 2.5);
  if (x < 7.5) return 64.0 * (7.5 - x);
  if (x < 12.5) return 28.0 * (x - 7.5);
  if (x < 17.5) return 28.0 * (17.5 - x);
  if (x < 22.5) return 32.0 * (x - 17.5);
  if (x < 27.5) return 32.0 * (27.5 - x);
  return 80.0 * (x - 27.5);
}

double equal_maxima(double x) { return std::pow(std::sin(5.0 * std::numbers::pi * x), 6.0); }

double uneven_decreasing_maxima(double x) {
  const double t = (x - 0.08) / 0.854;
  return std::exp(-2.0 * std::log(2.0) * t * t) *
         std::pow(std::sin(5.0 * std::numbers::pi * (std::pow(x, 0.75) - 0.05)), 6.0);
}

double himmelblau(double x, double y) {
  const double a = x * x + y - 11.0;
  const double b = x + y * y - 7.0;
  return 200.0 - a * a - b * b;
}

// Negated six-hump camel back; peak 1.03163.
double six_hump_camel_back(double x, double y) {
  const double x2 = x * x;
  return -((4.0 - 2.1 * x2 + x2 * x2 / 3.0) * x2 + x * y + (4.0 * y * y - 4.0) * y * y);
}

double shubert(const Vector& x) {
  double prod = 1.0;
  for (double v : x) {
    double sum = 0.0;
    for (int j = 1; j <= 5; ++j) sum += j * std::cos((j + 1) * v + j);
    prod *= sum;
  }
  return -prod;
}

double vincent(const Vector& x) {
  double sum = 0.0;
  for (double v : x) sum += std::sin(10.0 * std::log(v));
  return sum / static_cast<double>(x.size());
}

// Modified Rastrigin with k = (3, 4): 12 global optima in [0,1]^2.
double modified_rastrigin_all(const Vector& x) {
  static constexpr double k[] = {3.0, 4.0};
  double sum = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) sum += 10.0 + 9.0 * std::cos(2.0 * std::numbers::pi * k[i % 2] * x[i]);
  return -sum;
}

struct ProblemRow {
  int base_function;
  int dimension;
  double radius;
  double peak;        // as tabulated (rounded)
  double exact_peak;  // full precision, used for evaluation and counting
  int optima;
};

// Table of the 20 problems: generating function, dimension, niche radius,
// peak height (tabulated and full precision), number of global optima.
constexpr ProblemRow kProblemTable[kNumProblems] = {
    {1, 1, 0.01, 200.0, 200.0, 2},
    {2, 1, 0.01, 1.0, 1.0, 5},
    {3, 1, 0.01, 1.0, 1.0, 1},
    {4, 2, 0.01, 200.0, 200.0, 4},
    {5, 2, 0.5, 1.03163, 1.031628453489877, 2},
    {6, 2, 0.5, 186.731, 186.7309088310239, 18},
    {7, 2, 0.2, 1.0, 1.0, 36},
    {6, 3, 0.5, 2709.0935, 2709.093505572820, 81},
    {7, 3, 0.2, 1.0, 1.0, 216},
    {8, 2, 0.01, -2.0, -2.0, 12},
    {9, 2, 0.01, 0.0, 0.0, 6},
    {10, 2, 0.01, 0.0, 0.0, 8},
    {11, 2, 0.01, 0.0, 0.0, 6},
    {11, 3, 0.01, 0.0, 0.0, 6},
    {12, 3, 0.01, 0.0, 0.0, 8},
    {11, 5, 0.01, 0.0, 0.0, 6},
    {12, 5, 0.01, 0.0, 0.0, 8},
    {11, 10, 0.01, 0.0, 0.0, 6},
    {12, 10, 0.01, 0.0, 0.0, 8},
    {12, 20, 0.01, 0.0, 0.0, 8},
};

// Search-space bounds from the CEC2013 niching technical report.
void set_bounds(Problem& p) {
  const int d = p.dimension;
  switch (p.base_function) {
    case 1:  // [0, 30]
      p.lower = Vector::Constant(d, 0.0);
      p.upper = Vector::Constant(d, 30.0);
      break;
    case 2:  // [0, 1]
    case 3:
    case 8:
      p.lower = Vector::Constant(d, 0.0);
      p.upper = Vector::Constant(d, 1.0);
      break;
    case 4:  // [-6, 6]^2
      p.lower = Vector::Constant(d, -6.0);
      p.upper = Vector::Constant(d, 6.0);
      break;
    case 5:  // x in [-1.9, 1.9], y in [-1.1, 1.1]
      p.lower = Vector(2);
      p.upper = Vector(2);
      p.lower << -1.9, -1.1;
      p.upper << 1.9, 1.1;
      break;
    case 6:  // [-10, 10]^D
      p.lower = Vector::Constant(d, -10.0);
      p.upper = Vector::Constant(d, 10.0);
      break;
    case 7:  // [0.25, 10]^D
      p.lower = Vector::Constant(d, 0.25);
      p.upper = Vector::Constant(d, 10.0);
      break;
    default:  // compositions: [-5, 5]^D
      p.lower = Vector::Constant(d, -5.0);
      p.upper = Vector::Constant(d, 5.0);
      break;
  }
}

struct CompositionTemplate {
  std::vector<Primitive> functions;
  std::vector<double> sigmas;
  std::vector<double> lambdas;
  bool rotated;
};

CompositionTemplate composition_template(int base_function) {
  using P = Primitive;
  switch (base_function) {
    case 9:
      return {{P::Griewank, P::Griewank, P::Weierstrass, P::Weierstrass, P::Sphere, P::Sphere},
              {1, 1, 1, 1, 1, 1},
              {1, 1, 8, 8, 1.0 / 5, 1.0 / 5},
              false};
    case 10:
      return {{P::Rastrigin, P::Rastrigin, P::Weierstrass, P::Weierstrass, P::Griewank, P::Griewank, P::Sphere,
               P::Sphere},
              {1, 1, 1, 1, 1, 1, 1, 1},
              {1, 1, 10, 10, 1.0 / 10, 1.0 / 10, 1.0 / 7, 1.0 / 7},
              false};
    case 11:
      return {{P::EF8F2, P::EF8F2, P::Weierstrass, P::Weierstrass, P::Griewank, P::Griewank},
              {1, 1, 2, 2, 2, 2},
              {1.0 / 4, 1.0 / 10, 2, 1, 2, 5},
              true};
    case 12:
      return {{P::Rastrigin, P::Rastrigin, P::EF8F2, P::EF8F2, P::Weierstrass, P::Weierstrass, P::Griewank,
               P::Griewank},
              {1, 1, 1, 1, 1, 2, 2, 2},
              {4, 1, 4, 1, 1.0 / 10, 1.0 / 5, 1.0 / 10, 1.0 / 40},
              true};
    default:
      throw std::invalid_argument("base function " + std::to_string(base_function) + " is not a composition");
  }
}

Matrix random_rotation(int d, Rng& rng) {
  Matrix g(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) g(r, c) = rng.normal(0.0, 1.0);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int c = 0; c < d; ++c)
    if (r(c, c) < 0.0) q.col(c) = -q.col(c);
  return q;
}

void generate_transforms(CompositionSpec& spec, const Problem& p, bool rotated) {
  Rng rng(composition_seed(p.id));
  const int n = spec.n_components();
  const Vector span = p.upper - p.lower;
  for (int i = 0; i < n; ++i) {
    Vector s(p.dimension);
    for (int d = 0; d < p.dimension; ++d) s[d] = rng.uniform(p.lower[d] + 0.1 * span[d], p.upper[d] - 0.1 * span[d]);
    spec.shifts.push_back(s);
  }
  for (int i = 0; i < n; ++i)
    spec.rotations.push_back(rotated ? random_rotation(p.dimension, rng) : Matrix::Identity(p.dimension, p.dimension));
}

void load_transforms(CompositionSpec& spec, const Problem& p, bool rotated, const std::filesystem::path& dir) {
  const int n = spec.n_components();
  const int d = p.dimension;
  const auto optima_path = dir / "optima.dat";
  const auto optima = read_matrix_file(optima_path);
  if (static_cast<int>(optima.size()) < n)
    throw ParseError(optima_path.filename().string(),
                     "expected at least " + std::to_string(n) + " rows, found " + std::to_string(optima.size()));
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(optima[i].size()) < d)
      throw ParseError(optima_path.filename().string() + " row " + std::to_string(i + 1),
                       "expected at least " + std::to_string(d) + " values, found " + std::to_string(optima[i].size()));
    Vector s(d);
    for (int c = 0; c < d; ++c) s[c] = optima[i][c];
    spec.shifts.push_back(s);
  }
  if (!rotated) {
    for (int i = 0; i < n; ++i) spec.rotations.push_back(Matrix::Identity(d, d));
    return;
  }
  const std::string name = "CF" + std::to_string(p.base_function - 8) + "_M_D" + std::to_string(d) + ".dat";
  const auto rows = read_matrix_file(dir / name);
  if (static_cast<int>(rows.size()) < n * d)
    throw ParseError(name, "expected " + std::to_string(n * d) + " rows, found " + std::to_string(rows.size()));
  for (int i = 0; i < n; ++i) {
    Matrix m(d, d);
    for (int r = 0; r < d; ++r) {
      const auto& row = rows[i * d + r];
      if (static_cast<int>(row.size()) < d)
        throw ParseError(name + " row " + std::to_string(i * d + r + 1),
                         "expected " + std::to_string(d) + " values, found " + std::to_string(row.size()));
      for (int c = 0; c < d; ++c) m(r, c) = row[c];
    }
    // Published matrices are printed with finite precision.
    const double err = (m.transpose() * m - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
    if (err > 1e-6) throw ParseError(name + " matrix " + std::to_string(i + 1), "not orthogonal");
    spec.rotations.push_back(m);
  }
}

}  // namespace

std::uint64_t composition_seed(int id) { return derive_seed(0xCEC2013ULL, {static_cast<std::uint64_t>(id)}); }

std::vector<std::vector<double>> read_matrix_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.filename().string(), "cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::vector<double> row;
    std::string tok;
    while (ss >> tok) {
      try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        row.push_back(v);
      } catch (const std::exception&) {
        throw ParseError(path.filename().string() + " line " + std::to_string(line_no), "not a real number: '" + tok + "'");
      }
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  return rows;
}

int parse_problem_id(std::string_view token) {
  std::string_view digits = token;
  if (!digits.empty() && (digits.front() == 'F' || digits.front() == 'f')) digits.remove_prefix(1);
  if (digits.empty() || digits.size() > 2) throw std::invalid_argument("unknown problem '" + std::string(token) + "'");
  int id = 0;
  for (char c : digits) {
    if (!std::isdigit(static_cast<unsigned char>(c))) throw std::invalid_argument("unknown problem '" + std::string(token) + "'");
    id = id * 10 + (c - '0');
  }
  if (id < 1 || id > kNumProblems) throw std::invalid_argument("unknown problem '" + std::string(token) + "'");
  return id;
}

Problem make_problem(int id, const std::optional<std::filesystem::path>& data_source) {
  if (id < 1 || id > kNumProblems) throw std::invalid_argument("problem id must be in 1..20, got " + std::to_string(id));
  const ProblemRow& row = kProblemTable[id - 1];
  Problem p;
  p.id = id;
  p.base_function = row.base_function;
  p.dimension = row.dimension;
  p.niche_radius = row.radius;
  p.peak_height = row.exact_peak;
  p.tabulated_peak = row.peak;
  p.n_global_optima = row.optima;
  p.kind = row.base_function >= 9 ? ProblemKind::Composition : ProblemKind::Simple;
  set_bounds(p);

  if (p.kind == ProblemKind::Composition) {
    const auto tmpl = composition_template(row.base_function);
    auto spec = std::make_shared<CompositionSpec>();
    spec->functions = tmpl.functions;
    spec->sigmas = tmpl.sigmas;
    spec->lambdas = tmpl.lambdas;
    spec->biases.assign(tmpl.functions.size(), 0.0);
    if (data_source)
      load_transforms(*spec, p, tmpl.rotated, *data_source);
    else
      generate_transforms(*spec, p, tmpl.rotated);
    spec->normalize();
    p.composition = std::move(spec);
  }
  return p;
}

double Problem::evaluate(const Vector& x) const {
  if (x.size() != dimension)
    throw std::invalid_argument("F" + std::to_string(id) + " expects dimension " + std::to_string(dimension) +
                                ", got " + std::to_string(x.size()));
  switch (base_function) {
    case 1: return five_uneven_peak_trap(x[0]);
    case 2: return equal_maxima(x[0]);
    case 3: return uneven_decreasing_maxima(x[0]);
    case 4: return himmelblau(x[0], x[1]);
    case 5: return six_hump_camel_back(x[0], x[1]);
    case 6: return shubert(x);
    case 7: return vincent(x);
    case 8: return modified_rastrigin_all(x);
    default: return evaluate_composition(*composition, x);
  }
}

std::string Problem::label() const {
  return "F" + std::to_string(id) + " (base " + std::to_string(base_function) + ", " + std::to_string(dimension) + "D)";
}

}  // namespace rlemmo::bench
