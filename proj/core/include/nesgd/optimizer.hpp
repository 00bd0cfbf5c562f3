#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nesgd/geometry.hpp"
#include "nesgd/problems.hpp"
#include "nesgd/random.hpp"

namespace nesgd {

// Momentum, momentum at an extrapolated point, momentum variance reduction.
enum class MomentumOption { kMomentum, kExtrapolation, kVarianceReduction };

std::string_view to_string(MomentumOption option);
MomentumOption parse_momentum_option(std::string_view name);

struct OptimizerConfig {
  double alpha = 1.0;
  double beta = 0.0;
  double eta = 1e-2;
  std::int64_t K = 1;
  MomentumOption option = MomentumOption::kMomentum;
  double radius = kInfinity;
};

/// Enforces alpha in (0,1], eta > 0, beta in [0,1], K >= 0 and the weight
/// decay coupling beta = eta/radius (beta = 0 for an infinite radius). A
/// mismatched beta is corrected (with a note appended to `warning`) unless
/// `strict`, in which case DomainError is thrown.
OptimizerConfig coupled(OptimizerConfig cfg, bool strict = false, std::string* warning = nullptr);

struct OptimizerState {
  std::int64_t k = 0;
  Point x;
  Point m;
  Point x_prev;
  std::optional<Point> xbar;
  Rng rng;
};

OptimizerState init(const ProblemSpec& p, const OptimizerConfig& cfg, const Point& x0,
                    std::uint64_t seed);

/// x_{k+1} = (1 - beta) x_k - eta * lmo(m_k), the exact minimizer of
/// <m_k, x - x_k> subject to R(x - (1 - beta) x_k) <= eta.
Point trust_region_step(const OperatorSpace& space, const Point& x_k, const Point& m_k,
                        double eta, double beta, const LmoFn& oracle = lmo);

struct MomentumResult {
  Point m_next;
  std::optional<Point> xbar;
};

/// m_{k+1} for the chosen option. One draw is taken from `rng`; the variance
/// reduced option evaluates both gradients with that same draw.
MomentumResult momentum_update(MomentumOption option, double alpha, const Point& x_k,
                               const Point& m_k, const ProblemSpec& p, const Point& x_next,
                               Rng& rng);

/// One full iteration of the method on `state`.
void step(const ProblemSpec& p, const OptimizerConfig& cfg, OptimizerState& state);

// Trajectories ---------------------------------------------------------------

struct TrajectoryRow {
  std::int64_t k = 0;
  double f = 0.0;
  double f_gap = 0.0;
  double criterion = 0.0;
  double R_x = 0.0;
  double momentum_err = 0.0;
  // R(x_k - x_{k-1}); zero at k = 0.
  double step_norm = 0.0;

  friend bool operator==(const TrajectoryRow&, const TrajectoryRow&) = default;
};

struct TrajectoryRecord {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::map<std::string, double> constants;
  std::vector<TrajectoryRow> rows;

  // Not persisted.
  std::int64_t iterations = 0;
  double max_descent_violation = -kInfinity;
  double max_feasibility_violation = -kInfinity;
  std::optional<Point> final_x;
};

/// Everything known about iteration k when it is reported to a callback.
struct IterationEvent {
  const TrajectoryRow& row;
  const Point& x;
  const Point& m;
  const Point& grad;
};

// Return false to stop the run after this iteration.
using IterationCallback = std::function<bool(const IterationEvent&)>;

struct RunOptions {
  // Rows are always kept below this many iterations; above it every
  // ceil(K / kThinnedRows)-th row is kept (plus the last one).
  static constexpr std::int64_t kFullRecordLimit = 100000;
  static constexpr std::int64_t kThinnedRows = 10000;

  IterationCallback on_iteration;
  bool record_rows = true;
  bool strict_coupling = false;
  LmoFn oracle = lmo;
};

/// Runs K iterations from x0 inside the problem's ball (cfg.radius is
/// replaced by p.radius before coupling) and records per-iteration metrics for
/// k = 0..K. Also tracks, at every iteration, the largest violation of the
/// trust-region descent inequality and of the iterate bounds.
TrajectoryRecord run(const ProblemSpec& p, const OptimizerConfig& cfg, const Point& x0,
                     std::uint64_t seed, const RunOptions& options = {});

/// Plain SGD x_{k+1} = x_k - stepsize * g(x_k; z_k), rescaled radially into
/// the ball when the radius is finite. Same row schema as run().
TrajectoryRecord euclidean_baseline(const ProblemSpec& p, std::int64_t steps, double stepsize,
                                    std::uint64_t seed, const RunOptions& options = {});

/// Slack-free terms of the descent inequality at iteration k:
///   lhs = eta * G_{eta/beta}(x_k),
///   rhs = f(x_k) - f(x_{k+1}) + 4 eta ||grad f(x_k) - m_k||_{B^-1} + 2 ||L|| eta^2.
struct DescentTerms {
  double lhs = 0.0;
  double rhs = 0.0;
};

DescentTerms descent_terms(const ProblemSpec& p, const OptimizerConfig& cfg,
                           const StructuredOperator& b_inverse, const Point& x_k,
                           const Point& m_k, const Point& x_next);

// Parameter schedules ----------------------------------------------------------

enum class Theorem { kT1, kT2, kT3 };

struct ScheduleSelector {
  Theorem theorem = Theorem::kT1;
  bool convex = false;

  friend bool operator==(const ScheduleSelector&, const ScheduleSelector&) = default;
};

std::string to_string(const ScheduleSelector& sel);
// "T1-nonconvex", "T3-convex", ...
ScheduleSelector parse_schedule_selector(std::string_view text);
MomentumOption natural_option(Theorem theorem);

struct ProblemConstants {
  double trace_L = 1.0;
  double trace_sigma = 1.0;
  double trace_M = 1.0;
  double trace_T = 1.0;
  double delta0 = 1.0;
  double radius = kInfinity;
};

ProblemConstants constants_of(const ProblemSpec& p);

/// Parameters from the theorem's min{...}/max{...} formulas with every O(.)
/// constant equal to c_mult in alpha and beta, and the iteration count taken
/// as the max{...} expression (times ceil(log(1/eps) + 1) for the convex
/// variants), rounded up.
OptimizerConfig schedule(const ScheduleSelector& sel, double eps, const ProblemConstants& c,
                         double c_mult = 1.0);

}  // namespace nesgd
