#pragma once

// CEC2013 niching benchmark: 8 simple functions, the composition framework,
// and the metadata of the 20 problems. All problems are maximized.

#include <Eigen/Core>

#include <array>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rlemmo::bench {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class Primitive { Sphere, Griewank, Rastrigin, Weierstrass, EF8F2 };

Primitive primitive_from_name(std::string_view name);
std::string_view primitive_name(Primitive p);

/// Raw minimization-form value of a composition building block.
double primitive(Primitive p, const Vector& x);
double primitive(std::string_view name, const Vector& x);

struct CompositionSpec {
  std::vector<Primitive> functions;
  std::vector<Vector> shifts;
  std::vector<double> lambdas;
  std::vector<Matrix> rotations;
  std::vector<double> biases;
  std::vector<double> sigmas;  // weight bandwidths
  double f_bias = 0.0;
  double C = 2000.0;
  // |f_i| at x' = 5·1/λ_i·M_i, filled by normalize().
  std::vector<double> fmax;

  int n_components() const { return static_cast<int>(functions.size()); }
  int dimension() const { return shifts.empty() ? 0 : static_cast<int>(shifts.front().size()); }

  /// Computes fmax. Must be called once after the transforms are set.
  void normalize();
  /// Throws std::invalid_argument when component arrays disagree in size.
  void validate() const;
};

/// Maximization-form composition value; global peaks sit at 0.
double evaluate_composition(const CompositionSpec& spec, const Vector& x);

/// Official CEC2013 blending weights at x (exposed for tests).
std::vector<double> composition_weights(const CompositionSpec& spec, const Vector& x);

enum class ProblemKind { Simple, Composition };

struct Problem {
  int id = 0;
  int base_function = 0;  // 1..12, index of the generating function
  int dimension = 0;
  Vector lower;
  Vector upper;
  double niche_radius = 0.0;
  double peak_height = 0.0;     // full precision global maximum
  double tabulated_peak = 0.0;  // the same, rounded as usually published
  int n_global_optima = 0;
  ProblemKind kind = ProblemKind::Simple;
  std::shared_ptr<const CompositionSpec> composition;

  /// Objective under maximization. Throws std::invalid_argument on dimension mismatch.
  double evaluate(const Vector& x) const;
  /// Euclidean length of the bounds-box diagonal.
  double diameter() const { return (upper - lower).norm(); }
  std::string label() const;
};

/// Builds problem `id` (1..20). Composition shift/rotation data is read from
/// `data_source` (directory holding optima.dat and CF*_M_D*.dat) when given,
/// otherwise generated from a fixed per-problem seed.
Problem make_problem(int id, const std::optional<std::filesystem::path>& data_source = std::nullopt);

/// Parses "F6", "f6" or "6". Throws std::invalid_argument for anything outside 1..20.
int parse_problem_id(std::string_view token);

inline constexpr int kNumProblems = 20;
inline constexpr std::array<int, 12> kTrainProblems{1, 3, 4, 6, 8, 9, 10, 12, 13, 17, 19, 20};
inline constexpr std::array<int, 8> kTestProblems{2, 5, 7, 11, 14, 15, 16, 18};

/// Seed used by the fallback shift/rotation generator for problem `id`.
std::uint64_t composition_seed(int id);

/// Reads a whitespace-separated real matrix, one row per non-empty line.
std::vector<std::vector<double>> read_matrix_file(const std::filesystem::path& path);

}  // namespace rlemmo::bench
