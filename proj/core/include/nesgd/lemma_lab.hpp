#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "nesgd/geometry.hpp"
#include "nesgd/optimizer.hpp"
#include "nesgd/problems.hpp"

namespace nesgd::lab {

/// Outcome of one numerical check. `max_violation` is normalized so that a
/// value <= `tolerance` passes; negative values mean the check held with
/// margin.
struct VerificationReport {
  std::string lemma_id;
  std::size_t trials = 0;
  double max_violation = 0.0;
  double tolerance = 0.0;
  std::string confidence_note;
  std::uint64_t seed = 0;

  bool pass() const { return max_violation <= tolerance; }
};

/// One JSON object per line: {lemma_id, trials, max_violation, seed, pass}.
std::string to_json_line(const VerificationReport& report);

inline constexpr double kDeterministicTol = 1e-9;

// Random elements used by the checks ------------------------------------------

/// Strictly positive definite element of the space with eigenvalues
/// log-uniform in [lo, hi].
StructuredOperator random_positive(const OperatorSpace& space, Rng& rng, double lo = 1e-2,
                                   double hi = 10.0);
Point random_point(const OperatorSpace& space, Rng& rng);
/// Point with R(x) <= radius (uniform direction, radius scaled by u^(1/dim)).
Point random_feasible_point(const OperatorSpace& space, double radius, Rng& rng);
/// Quadratic with random certificates and a hessian A <= L, A <= M that is not
/// itself structured (dense for vector spaces).
ProblemSpec random_quadratic(const OperatorSpace& space, double radius, Rng& rng);

// Geometry --------------------------------------------------------------------

/// sup_{R(y)<=1} <x,y> = R*(x) (random ball samples plus sign-pattern /
/// singular-vector candidates), <x, lmo(x)> = R*(x), R(lmo(x)) <= 1, and
/// <x,y> <= R(x) R*(y).
VerificationReport verify_duality(const OperatorSpace& space, std::size_t trials,
                                  std::uint64_t seed, const LmoFn& oracle = lmo);

/// ||x||_H^2 <= ||H|| R(x)^2 and ||x||_{H^-1}^2 >= R*(x)^2 / ||H||.
VerificationReport verify_sandwich(const OperatorSpace& space, std::size_t trials,
                                   std::uint64_t seed);

/// Norm axioms for R and R*: subadditivity, absolute homogeneity, definiteness.
VerificationReport verify_norm_axioms(const OperatorSpace& space, std::size_t trials,
                                      std::uint64_t seed);

/// Identity membership, projection fixing H F H, order preservation of the
/// projection, and consistency of the rank-1 and general projections.
VerificationReport verify_operator_space(const OperatorSpace& space, std::size_t trials,
                                         std::uint64_t seed);

/// <g, lmo(g)> = R*(g) relative, R(lmo(g)) <= 1, and for LeftMatrix every
/// nonzero singular value of lmo(G) equals sqrt(n).
VerificationReport verify_lmo(const OperatorSpace& space, std::size_t trials,
                              std::uint64_t seed, const LmoFn& oracle = lmo);

/// H <= 4||H|| B and 4||H|| H^-1 >= B^-1 for H in {L, M, Sigma, T}, on random
/// probes and by generalized eigenvalues.
VerificationReport verify_B_bounds(const StructuredOperator& l, const StructuredOperator& m,
                                   const StructuredOperator& sigma, const StructuredOperator& t,
                                   std::size_t trials, std::uint64_t seed);

// Trajectory-level lemmas -----------------------------------------------------

/// Descent inequality along one trajectory, absolute slack.
VerificationReport verify_descent(const ProblemSpec& p, const OptimizerConfig& cfg,
                                  std::uint64_t seed);

/// Iterate bounds on random problems, stationarity probes with analytic
/// constrained solutions, and R * G_R(x) >= f(x) - f* on convex quadratics.
VerificationReport verify_feasibility_and_criterion(const OperatorSpace& space,
                                                    std::size_t trials, std::uint64_t seed);

struct FixedState {
  Point x_k;
  Point m_k;
  double alpha = 0.5;
  double eta = 1e-2;
  double beta = 0.0;
};

/// Monte-Carlo estimate of E||m_{k+1} - grad f(x_{k+1})||^2_{B^-1} against the
/// one-step bound of the chosen momentum option. Passes iff
/// mean <= rhs + 3 standard errors.
VerificationReport verify_momentum_recursion(MomentumOption option, const ProblemSpec& p,
                                             const FixedState& state, std::size_t samples,
                                             std::uint64_t seed);

/// Average of ||m_k - grad f(x_k)||_{B^-1} over independent runs against the
/// decay envelope of the option, pointwise in k (mean + 3 SE rule).
VerificationReport verify_corollary_decay(MomentumOption option, const ProblemSpec& p,
                                          const OptimizerConfig& cfg, std::size_t runs,
                                          std::uint64_t seed);

/// Right-hand side of the one-step momentum-error bound.
double recursion_bound(MomentumOption option, double prev_error_sq, double alpha, double eta,
                       const ProblemConstants& c);
/// Envelope bounding E||m_k - grad f(x_k)||_{B^-1}.
double decay_envelope(MomentumOption option, std::int64_t k, double alpha, double eta,
                      const ProblemConstants& c);

// Suites ----------------------------------------------------------------------

enum class Suite { kGeometry, kLemmas, kAll };
Suite parse_suite(std::string_view name);

struct SuiteOptions {
  std::vector<Index> vector_dims{1, 2, 3, 4};
  std::vector<std::pair<Index, Index>> matrix_shapes{{2, 2}, {2, 3}, {3, 3}};
  std::size_t trials = 1000;
  std::vector<std::uint64_t> seeds{0, 1};
  std::size_t recursion_samples = 10000;
  std::size_t decay_runs = 1000;
  LmoFn oracle = lmo;
};

std::vector<VerificationReport> run_suite(Suite suite, const SuiteOptions& options);

}  // namespace nesgd::lab
