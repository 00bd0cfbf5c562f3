#include "nesgd/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nesgd/criterion.hpp"
#include "nesgd/errors.hpp"

namespace nesgd {

namespace {

constexpr double kCouplingTol = 1e-12;

double expected_beta(double eta, double radius) {
  return std::isinf(radius) ? 0.0 : eta / radius;
}

// Radius of G_{eta/beta} with the 1/0 = infinity convention. Under the
// coupling beta = eta/R this is R itself; using R avoids rounding in eta/beta.
double descent_radius(const OptimizerConfig& cfg) {
  if (cfg.beta == 0.0) return kInfinity;
  return std::isinf(cfg.radius) ? cfg.eta / cfg.beta : cfg.radius;
}

DescentTerms descent_terms_from(const ProblemSpec& p, const OptimizerConfig& cfg,
                                const StructuredOperator& b_inverse, const Point& x_k,
                                const Point& grad_k, const Point& m_k, double f_k,
                                double f_next, double trace_l) {
  const double g = grad_criterion(p.space, x_k, grad_k, descent_radius(cfg));
  const double err = std::sqrt(weighted_sqnorm(b_inverse, grad_k - m_k));
  return {cfg.eta * g,
          f_k - f_next + 4.0 * cfg.eta * err + 2.0 * trace_l * cfg.eta * cfg.eta};
}

std::int64_t row_stride(std::int64_t K) {
  if (K < RunOptions::kFullRecordLimit) return 1;
  return (K + RunOptions::kThinnedRows - 1) / RunOptions::kThinnedRows;
}

TrajectoryRow make_row(const ProblemSpec& p, std::int64_t k, const Point& x, const Point& grad,
                       const Point& m, double f, const StructuredOperator& b_inverse,
                       double step_norm) {
  TrajectoryRow row;
  row.k = k;
  row.f = f;
  row.f_gap = f - p.f_opt;
  row.criterion = grad_criterion(p.space, x, grad, p.radius);
  row.R_x = norm_R(p.space, x);
  row.momentum_err = std::sqrt(weighted_sqnorm(b_inverse, m - grad));
  row.step_norm = step_norm;
  return row;
}

}  // namespace

std::string_view to_string(MomentumOption option) {
  switch (option) {
    case MomentumOption::kMomentum:
      return "M1";
    case MomentumOption::kExtrapolation:
      return "M2";
    case MomentumOption::kVarianceReduction:
      return "M3";
  }
  return "M1";
}

MomentumOption parse_momentum_option(std::string_view name) {
  if (name == "M1" || name == "momentum") return MomentumOption::kMomentum;
  if (name == "M2" || name == "extrapolation") return MomentumOption::kExtrapolation;
  if (name == "M3" || name == "mvr") return MomentumOption::kVarianceReduction;
  throw DomainError("unknown momentum option '" + std::string(name) + "'");
}

OptimizerConfig coupled(OptimizerConfig cfg, bool strict, std::string* warning) {
  if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) {
    throw DomainError("alpha must lie in (0, 1]");
  }
  if (!(cfg.eta > 0.0) || !std::isfinite(cfg.eta)) {
    throw DomainError("eta must be positive and finite");
  }
  if (cfg.K < 0) {
    throw DomainError("K must be nonnegative");
  }
  if (!(cfg.radius > 0.0)) {
    throw DomainError("radius must be positive");
  }
  if (!(cfg.beta >= 0.0 && cfg.beta <= 1.0)) {
    throw DomainError("beta must lie in [0, 1]");
  }
  const double want = expected_beta(cfg.eta, cfg.radius);
  if (std::abs(cfg.beta - want) > kCouplingTol * std::max(1.0, want)) {
    if (strict) {
      throw DomainError("beta = " + std::to_string(cfg.beta) +
                        " does not match eta/radius = " + std::to_string(want));
    }
    if (warning != nullptr) {
      *warning += "beta reset from " + std::to_string(cfg.beta) + " to eta/radius = " +
                  std::to_string(want) + "\n";
    }
    cfg.beta = want;
  }
  if (cfg.beta > 1.0) {
    throw DomainError("eta must not exceed the radius (beta = eta/radius <= 1)");
  }
  return cfg;
}

OptimizerState init(const ProblemSpec& p, const OptimizerConfig& cfg, const Point& x0,
                    std::uint64_t seed) {
  p.space.require(x0, "init");
  if (!is_feasible(p.space, x0, cfg.radius)) {
    throw DomainError("init: x0 lies outside the ball of radius " + std::to_string(cfg.radius));
  }
  Rng rng(seed);
  Point m = grad_sample(p, x0, rng).value;
  return OptimizerState{0, x0, std::move(m), x0, std::nullopt, std::move(rng)};
}

Point trust_region_step(const OperatorSpace& space, const Point& x_k, const Point& m_k,
                        double eta, double beta, const LmoFn& oracle) {
  space.require(x_k, "trust_region_step");
  space.require(m_k, "trust_region_step");
  if (!(eta > 0.0)) throw DomainError("trust_region_step: eta must be positive");
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw DomainError("trust_region_step: beta must lie in [0, 1]");
  }
  Point next = (1.0 - beta) * x_k;
  next -= eta * oracle(space, m_k);
  return next;
}

MomentumResult momentum_update(MomentumOption option, double alpha, const Point& x_k,
                               const Point& m_k, const ProblemSpec& p, const Point& x_next,
                               Rng& rng) {
  switch (option) {
    case MomentumOption::kMomentum: {
      const Point g = grad_sample(p, x_next, rng).value;
      return {(1.0 - alpha) * m_k + alpha * g, std::nullopt};
    }
    case MomentumOption::kExtrapolation: {
      Point xbar = x_k + (1.0 / alpha) * (x_next - x_k);
      const Point g = grad_sample(p, xbar, rng).value;
      return {(1.0 - alpha) * m_k + alpha * g, std::move(xbar)};
    }
    case MomentumOption::kVarianceReduction: {
      const Point noise = draw_noise(p, rng);
      const Point g_prev = grad_true(p, x_k) + noise;
      const Point g_next = grad_true(p, x_next) + noise;
      return {(1.0 - alpha) * (m_k - g_prev) + g_next, std::nullopt};
    }
  }
  throw DomainError("unknown momentum option");
}

void step(const ProblemSpec& p, const OptimizerConfig& cfg, OptimizerState& state) {
  Point next = trust_region_step(p.space, state.x, state.m, cfg.eta, cfg.beta);
  MomentumResult mr = momentum_update(cfg.option, cfg.alpha, state.x, state.m, p, next, state.rng);
  state.x_prev = std::move(state.x);
  state.x = std::move(next);
  state.m = std::move(mr.m_next);
  state.xbar = std::move(mr.xbar);
  ++state.k;
}

DescentTerms descent_terms(const ProblemSpec& p, const OptimizerConfig& cfg,
                           const StructuredOperator& b_inverse, const Point& x_k,
                           const Point& m_k, const Point& x_next) {
  return descent_terms_from(p, cfg, b_inverse, x_k, grad_true(p, x_k), m_k, f_eval(p, x_k),
                            f_eval(p, x_next), trace_norm(p.L));
}

TrajectoryRecord run(const ProblemSpec& p, const OptimizerConfig& cfg_in, const Point& x0,
                     std::uint64_t seed, const RunOptions& options) {
  OptimizerConfig cfg = cfg_in;
  cfg.radius = p.radius;
  cfg = coupled(cfg, options.strict_coupling);

  const StructuredOperator b_inverse = combine_B(p.L, p.M, p.sigma, p.T).inverse();
  const double trace_l = trace_norm(p.L);
  const std::int64_t stride = row_stride(cfg.K);

  TrajectoryRecord rec;
  rec.seed = seed;
  rec.constants = {{"alpha", cfg.alpha}, {"beta", cfg.beta}, {"eta", cfg.eta},
                   {"K", static_cast<double>(cfg.K)}};

  OptimizerState state = init(p, cfg, x0, seed);
  if (!std::isinf(cfg.radius)) {
    rec.max_feasibility_violation = norm_R(p.space, x0) - cfg.radius;
  }
  double f_k = f_eval(p, state.x);
  double step_norm = 0.0;

  for (std::int64_t k = 0;; ++k) {
    const Point grad = grad_true(p, state.x);
    const TrajectoryRow row = make_row(p, k, state.x, grad, state.m, f_k, b_inverse, step_norm);
    const bool last = k == cfg.K;
    bool stop = last;
    if (options.on_iteration) {
      stop = !options.on_iteration(IterationEvent{row, state.x, state.m, grad}) || stop;
    }
    if (options.record_rows && (k % stride == 0 || stop)) {
      rec.rows.push_back(row);
    }
    if (stop) {
      rec.iterations = k;
      break;
    }

    Point next = trust_region_step(p.space, state.x, state.m, cfg.eta, cfg.beta, options.oracle);
    const double f_next = f_eval(p, next);
    const DescentTerms terms =
        descent_terms_from(p, cfg, b_inverse, state.x, grad, state.m, f_k, f_next, trace_l);
    rec.max_descent_violation = std::max(rec.max_descent_violation, terms.lhs - terms.rhs);

    step_norm = norm_R(p.space, next - state.x);
    double violation = step_norm - 2.0 * cfg.eta;
    if (!std::isinf(cfg.radius)) {
      violation = std::max(violation, norm_R(p.space, next) - cfg.radius);
    }
    rec.max_feasibility_violation = std::max(rec.max_feasibility_violation, violation);

    MomentumResult mr =
        momentum_update(cfg.option, cfg.alpha, state.x, state.m, p, next, state.rng);
    state.x_prev = std::move(state.x);
    state.x = std::move(next);
    state.m = std::move(mr.m_next);
    state.xbar = std::move(mr.xbar);
    ++state.k;
    f_k = f_next;
  }
  rec.final_x = state.x;
  return rec;
}

TrajectoryRecord euclidean_baseline(const ProblemSpec& p, std::int64_t steps, double stepsize,
                                    std::uint64_t seed, const RunOptions& options) {
  if (steps < 0) throw DomainError("euclidean_baseline: steps must be nonnegative");
  if (!(stepsize >= 0.0) || !std::isfinite(stepsize)) {
    throw DomainError("euclidean_baseline: stepsize must be nonnegative");
  }
  p.space.require(p.x0, "euclidean_baseline");
  const StructuredOperator b_inverse = combine_B(p.L, p.M, p.sigma, p.T).inverse();
  const std::int64_t stride = row_stride(steps);

  TrajectoryRecord rec;
  rec.seed = seed;
  rec.constants = {{"stepsize", stepsize}, {"K", static_cast<double>(steps)}};

  Rng rng(seed);
  Point x = p.x0;
  if (!std::isinf(p.radius)) {
    rec.max_feasibility_violation = norm_R(p.space, x) - p.radius;
  }
  double step_norm = 0.0;
  for (std::int64_t k = 0;; ++k) {
    const Point grad = grad_true(p, x);
    const Point g = grad + draw_noise(p, rng);
    const TrajectoryRow row = make_row(p, k, x, grad, g, f_eval(p, x), b_inverse, step_norm);
    bool stop = k == steps;
    if (options.on_iteration) {
      stop = !options.on_iteration(IterationEvent{row, x, g, grad}) || stop;
    }
    if (options.record_rows && (k % stride == 0 || stop)) {
      rec.rows.push_back(row);
    }
    if (stop) {
      rec.iterations = k;
      break;
    }
    Point next = x - stepsize * g;
    if (!std::isinf(p.radius)) {
      const double r = norm_R(p.space, next);
      if (r > p.radius) next *= p.radius / r;
      rec.max_feasibility_violation =
          std::max(rec.max_feasibility_violation, norm_R(p.space, next) - p.radius);
    }
    step_norm = norm_R(p.space, next - x);
    x = std::move(next);
  }
  rec.final_x = x;
  return rec;
}

}  // namespace nesgd
