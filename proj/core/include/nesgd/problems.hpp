#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "nesgd/geometry.hpp"
#include "nesgd/point.hpp"
#include "nesgd/random.hpp"
#include "nesgd/symmetric_map.hpp"

namespace nesgd {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class NoiseKind { kGaussian, kRademacher };

std::string_view to_string(NoiseKind kind);
NoiseKind parse_noise_kind(std::string_view name);

/// Synthetic quadratic objective f(x) = 1/2 <x - x_opt, A (x - x_opt)> + f_offset
/// with an additive stochastic gradient oracle g(x; z) = grad f(x) + F z, and
/// the structural certificates L, Sigma, M, T in the geometry's operator space.
struct ProblemSpec {
  std::string name;
  OperatorSpace space;
  SymmetricMap hessian;
  Point x_opt;
  double f_offset = 0.0;
  SymmetricMap noise_factor;
  NoiseKind noise = NoiseKind::kGaussian;
  StructuredOperator L;
  StructuredOperator sigma;
  StructuredOperator M;
  StructuredOperator T;
  double radius = kInfinity;
  // Optimal value over the R-ball.
  double f_opt = 0.0;
  bool convex = true;
  Point x0;
};

/// Checks every ProblemSpec invariant: shapes, hessian domination A <= L and
/// A <= M, shared operator space, x0 inside the ball. Throws DomainError or
/// ShapeError.
void validate(const ProblemSpec& p);

struct GradientSample {
  Point value;
  Point noise_part;
  std::uint64_t seed_draw = 0;
};

double f_eval(const ProblemSpec& p, const Point& x);
Point grad_true(const ProblemSpec& p, const Point& x);

/// One noise realization n = F z (z standard normal or Rademacher).
Point draw_noise(const ProblemSpec& p, Rng& rng);
GradientSample grad_sample(const ProblemSpec& p, const Point& x, Rng& rng);

/// Noise factor that saturates the variance bound for Sigma:
/// F = c * Sigma^{1/2} with c = sqrt(trace_norm(Sigma) / dim).
SymmetricMap saturating_noise_factor(const StructuredOperator& sigma);

/// Bregman residual f(x) - f(x') - <grad f(x'), x - x'>.
double bregman_residual(const ProblemSpec& p, const Point& x, const Point& x_prime);

struct StructureReport {
  std::size_t trials = 0;
  // max |D_f(x;x')| / (1/2 ||x - x'||_L^2)
  double smoothness_ratio = 0.0;
  // max ||[H(x) - H(x')](x - x')||^2_{T^-1}; exactly 0 for quadratics.
  double second_order_lhs = 0.0;
  // max E||g(x;z) - g(x';z)||^2_{M^-1} / ||x - x'||^2_M
  double mean_square_ratio = 0.0;
  // Eigen-level certificates.
  double hessian_vs_L = 0.0;
  double hessian_vs_M = 0.0;
  // E||n||^2_{Sigma^-1} / trace_norm(Sigma), computed exactly from F.
  double variance_ratio = 0.0;

  bool ok(double tol = 1e-9) const;
};

StructureReport certify_structure(const ProblemSpec& p, std::size_t trials, Rng& rng);

/// Exact E||n||^2_{H^{-1}} for the problem's noise model.
double expected_noise_sqnorm(const ProblemSpec& p, const StructuredOperator& h);

// Benchmark generators ------------------------------------------------------

using BenchmarkParams = std::map<std::string, double>;

struct BenchmarkInfo {
  std::string name;
  std::string description;
  BenchmarkParams defaults;
};

const std::vector<BenchmarkInfo>& list_benchmarks();

/// Builds one of "sparse-diag", "dense-diag", "lowrank-left", "isotropic".
/// Unknown parameters and invalid dimensions throw DomainError.
ProblemSpec make_benchmark(std::string_view name, const BenchmarkParams& params,
                           std::uint64_t seed);

/// Parses "name:key=value,key=value".
std::pair<std::string, BenchmarkParams> parse_benchmark_ref(std::string_view ref);

/// The same objective and noise recast in the Scalar geometry (normalized
/// SGD). Matrix problems are flattened column-major. Certificates are the
/// tightest scalar ones: L = lambda_max(L) I, M = lambda_max(M) I, Sigma = s I
/// with s^2 = trace(F F^T) / dim, T = I / dim.
ProblemSpec recast_to_scalar(const ProblemSpec& p);

}  // namespace nesgd
