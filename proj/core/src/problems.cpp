#include "nesgd/problems.hpp"

#include <cmath>
#include <string>

#include "nesgd/criterion.hpp"
#include "nesgd/errors.hpp"

namespace nesgd {

std::string_view to_string(NoiseKind kind) {
  return kind == NoiseKind::kGaussian ? "gaussian" : "rademacher";
}

NoiseKind parse_noise_kind(std::string_view name) {
  if (name == "gaussian") return NoiseKind::kGaussian;
  if (name == "rademacher") return NoiseKind::kRademacher;
  throw DomainError("unknown noise kind '" + std::string(name) + "'");
}

void validate(const ProblemSpec& p) {
  p.space.require(p.x_opt, "ProblemSpec x_opt");
  p.space.require(p.x0, "ProblemSpec x0");
  if (!p.hessian.accepts(p.x_opt) || !p.noise_factor.accepts(p.x_opt)) {
    throw ShapeError("ProblemSpec: hessian or noise factor does not fit the point shape");
  }
  for (const StructuredOperator* op : {&p.L, &p.sigma, &p.M, &p.T}) {
    if (!(op->space() == p.space)) {
      throw ShapeError("ProblemSpec: certificate lives in a different operator space");
    }
    if (!op->is_positive_definite()) {
      throw DomainError("ProblemSpec: certificates must be positive definite");
    }
  }
  const double scale = std::max(1.0, p.hessian.max_eigenvalue());
  if (p.hessian.min_eigenvalue() < -1e-12 * scale) {
    throw DomainError("ProblemSpec: hessian must be positive semidefinite");
  }
  if (domination_ratio(p.hessian, p.L) > 1.0 + 1e-9) {
    throw DomainError("ProblemSpec: hessian is not dominated by L");
  }
  if (domination_ratio(p.hessian, p.M) > 1.0 + 1e-9) {
    throw DomainError("ProblemSpec: hessian is not dominated by M");
  }
  if (!(p.radius > 0.0)) {
    throw DomainError("ProblemSpec: radius must be positive (or infinite)");
  }
  if (!is_feasible(p.space, p.x0, p.radius)) {
    throw DomainError("ProblemSpec: x0 lies outside the constraint ball");
  }
  if (is_feasible(p.space, p.x_opt, p.radius) &&
      std::abs(p.f_opt - p.f_offset) > 1e-12 * std::max(1.0, std::abs(p.f_offset))) {
    throw DomainError("ProblemSpec: f_opt must equal f(x_opt) when x_opt is feasible");
  }
}

double f_eval(const ProblemSpec& p, const Point& x) {
  p.space.require(x, "f_eval");
  const Point e = x - p.x_opt;
  return 0.5 * dot(e, p.hessian.apply(e)) + p.f_offset;
}

Point grad_true(const ProblemSpec& p, const Point& x) {
  p.space.require(x, "grad_true");
  return p.hessian.apply(x - p.x_opt);
}

Point draw_noise(const ProblemSpec& p, Rng& rng) {
  Point z = Point::zeros_like(p.x_opt);
  if (p.noise == NoiseKind::kGaussian) {
    z.values() = rng.normal_matrix(z.rows(), z.cols());
  } else {
    for (Index j = 0; j < z.cols(); ++j) {
      for (Index i = 0; i < z.rows(); ++i) {
        z.values()(i, j) = rng.rademacher();
      }
    }
  }
  return p.noise_factor.apply(z);
}

GradientSample grad_sample(const ProblemSpec& p, const Point& x, Rng& rng) {
  const std::uint64_t draw = rng.draws();
  Point noise = draw_noise(p, rng);
  Point value = grad_true(p, x) + noise;
  return GradientSample{std::move(value), std::move(noise), draw};
}

SymmetricMap saturating_noise_factor(const StructuredOperator& sigma) {
  const double c = std::sqrt(sigma.trace_norm() / static_cast<double>(sigma.space().dim()));
  const StructuredOperator root = sigma.sqrt();
  switch (sigma.space().kind()) {
    case SpaceKind::kScalar:
      return SymmetricMap::scaled_identity(c * root.payload()(0, 0));
    case SpaceKind::kDiagonal:
      return SymmetricMap::diagonal(c * root.payload().col(0));
    case SpaceKind::kLeftMatrix:
      return SymmetricMap::left_multiply(c * root.payload());
  }
  throw DomainError("unknown space kind");
}

double bregman_residual(const ProblemSpec& p, const Point& x, const Point& x_prime) {
  return f_eval(p, x) - f_eval(p, x_prime) - dot(grad_true(p, x_prime), x - x_prime);
}

double expected_noise_sqnorm(const ProblemSpec& p, const StructuredOperator& h) {
  // E||F z||^2_{H^-1} = trace(F H^{-1} F) for E[z z^T] = I.
  const OperatorSpace& space = h.space();
  const SymmetricMap& f = p.noise_factor;
  using Kind = SymmetricMap::Kind;
  if (space.kind() == SpaceKind::kScalar) {
    return f.squared_frobenius(space.dim()) / h.payload()(0, 0);
  }
  if (f.kind() == Kind::kScaledIdentity) {
    const double c = f.data()(0, 0);
    return c * c * h.inverse().trace_norm();
  }
  if (space.kind() == SpaceKind::kDiagonal && f.kind() == Kind::kDiagonal) {
    return f.data().col(0).cwiseAbs2().cwiseQuotient(h.payload().col(0)).sum();
  }
  if (space.kind() == SpaceKind::kLeftMatrix && f.kind() == Kind::kLeftMultiply &&
      f.data().rows() == space.rows()) {
    const Eigen::MatrixXd hinv = h.inverse().payload();
    return static_cast<double>(space.cols()) * (f.data() * hinv * f.data()).trace();
  }
  const Eigen::MatrixXd fd = f.to_dense(space.dim());
  return (fd * h.inverse().dense() * fd).trace();
}

bool StructureReport::ok(double tol) const {
  return smoothness_ratio <= 1.0 + tol && mean_square_ratio <= 1.0 + tol &&
         hessian_vs_L <= 1.0 + tol && hessian_vs_M <= 1.0 + tol && variance_ratio <= 1.0 + tol &&
         second_order_lhs <= tol;
}

StructureReport certify_structure(const ProblemSpec& p, std::size_t trials, Rng& rng) {
  StructureReport report;
  report.trials = trials;
  report.hessian_vs_L = domination_ratio(p.hessian, p.L);
  report.hessian_vs_M = domination_ratio(p.hessian, p.M);
  report.variance_ratio = expected_noise_sqnorm(p, p.sigma) / p.sigma.trace_norm();

  const double scale = std::isfinite(p.radius) ? p.radius : 1.0;
  for (std::size_t t = 0; t < trials; ++t) {
    Point x = Point::zeros_like(p.x_opt);
    Point xp = Point::zeros_like(p.x_opt);
    x.values() = scale * rng.normal_matrix(x.rows(), x.cols());
    xp.values() = scale * rng.normal_matrix(x.rows(), x.cols());
    const Point delta = x - xp;
    const double denom = weighted_sqnorm(p.L, delta);
    if (denom <= 0.0) {
      continue;
    }
    report.smoothness_ratio =
        std::max(report.smoothness_ratio, std::abs(bregman_residual(p, x, xp)) / (0.5 * denom));

    // The hessian of a quadratic is the same map at x and x'.
    const Point second_order = p.hessian.apply(delta) - p.hessian.apply(delta);
    report.second_order_lhs =
        std::max(report.second_order_lhs, weighted_sqnorm(p.T, second_order, true));

    // g(x; z) - g(x'; z) with one shared draw z.
    Rng shared = rng;
    const GradientSample gx = grad_sample(p, x, shared);
    shared = rng;
    const GradientSample gxp = grad_sample(p, xp, shared);
    rng = shared;
    report.mean_square_ratio =
        std::max(report.mean_square_ratio, weighted_sqnorm(p.M, gx.value - gxp.value, true) /
                                               weighted_sqnorm(p.M, delta));
  }
  return report;
}

}  // namespace nesgd
