#include "nesgd/lemma_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <string>

#include "nesgd/criterion.hpp"
#include "nesgd/errors.hpp"

namespace nesgd::lab {

namespace {

constexpr double kTiny = 1e-300;
constexpr double kNoViolation = -std::numeric_limits<double>::infinity();
constexpr std::size_t kBallSamplesPerTrial = 8;

std::string tagged(const std::string& id, const OperatorSpace& space) {
  return id + "[" + space.describe() + "]";
}

VerificationReport make_report(std::string id, std::size_t trials, std::uint64_t seed,
                               double tolerance, std::string note = {}) {
  VerificationReport r;
  r.lemma_id = std::move(id);
  r.trials = trials;
  r.max_violation = kNoViolation;
  r.tolerance = tolerance;
  r.confidence_note = std::move(note);
  r.seed = seed;
  return r;
}

void worse(VerificationReport& r, double violation) {
  if (std::isnan(violation)) {
    r.max_violation = std::numeric_limits<double>::infinity();
    return;
  }
  r.max_violation = std::max(r.max_violation, violation);
}

// Relative excess of `lhs` over `rhs`, normalized by the larger magnitude.
double excess(double lhs, double rhs) {
  return (lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), kTiny});
}

double rel_diff(double a, double b) { return std::abs(excess(a, b)); }

double max_abs(const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double payload_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return max_abs(a - b) / std::max({max_abs(a), max_abs(b), 1.0});
}

Eigen::MatrixXd random_orthogonal(Index m, Rng& rng) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(rng.normal_matrix(m, m));
  return qr.householderQ() * Eigen::MatrixXd::Identity(m, m);
}

double log_uniform(Rng& rng, double lo, double hi) {
  return std::exp(rng.uniform(std::log(lo), std::log(hi)));
}

Eigen::VectorXd flat_values(const Point& x) {
  return Eigen::Map<const Eigen::VectorXd>(x.values().data(), x.size());
}

// Euclidean projection onto the R-ball of radius r.
Point project_to_ball(const OperatorSpace& space, const Point& c, double r) {
  Point out = c;
  switch (space.kind()) {
    case SpaceKind::kScalar: {
      const double norm = norm_R(space, c);
      if (norm > r) out *= r / norm;
      break;
    }
    case SpaceKind::kDiagonal:
      out.values() = c.values().cwiseMax(-r).cwiseMin(r);
      break;
    case SpaceKind::kLeftMatrix: {
      const double cap = r * std::sqrt(static_cast<double>(space.cols()));
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(c.values(), Eigen::ComputeThinU | Eigen::ComputeThinV);
      const Eigen::VectorXd s = svd.singularValues().cwiseMin(cap);
      out.values() = svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
      break;
    }
  }
  return out;
}

std::vector<OperatorSpace> suite_spaces(const SuiteOptions& options) {
  std::vector<OperatorSpace> spaces;
  for (Index d : options.vector_dims) spaces.push_back(OperatorSpace::scalar(d));
  for (Index d : options.vector_dims) spaces.push_back(OperatorSpace::diagonal(d));
  for (const auto& [m, n] : options.matrix_shapes) {
    spaces.push_back(OperatorSpace::left_matrix(m, n));
  }
  return spaces;
}

std::string option_suffix(MomentumOption option) {
  switch (option) {
    case MomentumOption::kMomentum:
      return "lemma8-momentum";
    case MomentumOption::kExtrapolation:
      return "lemma9-extrapolation";
    case MomentumOption::kVarianceReduction:
      return "lemma10-mvr";
  }
  return "";
}

std::string corollary_id(MomentumOption option) {
  switch (option) {
    case MomentumOption::kMomentum:
      return "corollary1-decay";
    case MomentumOption::kExtrapolation:
      return "corollary2-decay";
    case MomentumOption::kVarianceReduction:
      return "corollary3-decay";
  }
  return "";
}

}  // namespace

std::string to_json_line(const VerificationReport& report) {
  nlohmann::ordered_json j;
  j["lemma_id"] = report.lemma_id;
  j["trials"] = report.trials;
  j["max_violation"] = report.max_violation;
  j["seed"] = report.seed;
  j["pass"] = report.pass();
  return j.dump();
}

StructuredOperator random_positive(const OperatorSpace& space, Rng& rng, double lo, double hi) {
  switch (space.kind()) {
    case SpaceKind::kScalar:
      return StructuredOperator::scalar(space, log_uniform(rng, lo, hi));
    case SpaceKind::kDiagonal: {
      Eigen::VectorXd h(space.rows());
      for (Index i = 0; i < h.size(); ++i) h(i) = log_uniform(rng, lo, hi);
      return StructuredOperator::diagonal(space, std::move(h));
    }
    case SpaceKind::kLeftMatrix: {
      const Index m = space.rows();
      Eigen::VectorXd e(m);
      for (Index i = 0; i < m; ++i) e(i) = log_uniform(rng, lo, hi);
      const Eigen::MatrixXd q = random_orthogonal(m, rng);
      Eigen::MatrixXd b = q * e.asDiagonal() * q.transpose();
      return StructuredOperator::left(space, 0.5 * (b + b.transpose()));
    }
  }
  throw DomainError("unknown space kind");
}

Point random_point(const OperatorSpace& space, Rng& rng) {
  Point x = space.zero_point();
  x.values() = rng.normal_matrix(x.rows(), x.cols());
  return x;
}

Point random_feasible_point(const OperatorSpace& space, double radius, Rng& rng) {
  Point x = random_point(space, rng);
  if (std::isinf(radius)) return x;
  const double r = norm_R(space, x);
  const double target =
      radius * std::pow(rng.uniform(0.0, 1.0), 1.0 / static_cast<double>(space.dim()));
  if (r > 0.0) x *= target / r;
  return x;
}

ProblemSpec random_quadratic(const OperatorSpace& space, double radius, Rng& rng) {
  const StructuredOperator l = random_positive(space, rng, 0.1, 10.0);
  const Index dim = space.dim();
  const Eigen::MatrixXd root = l.sqrt().dense();
  const Eigen::MatrixXd g = rng.normal_matrix(dim, dim);
  Eigen::MatrixXd w = g * g.transpose();
  w /= Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(w, Eigen::EigenvaluesOnly)
           .eigenvalues()
           .maxCoeff();
  w *= rng.uniform(0.2, 1.0);
  Eigen::MatrixXd a = root * w * root;
  a = 0.5 * (a + a.transpose());

  const StructuredOperator m = l + random_positive(space, rng, 0.01, 1.0);
  const StructuredOperator sigma = random_positive(space, rng, 0.1, 2.0);
  const StructuredOperator t = random_positive(space, rng, 0.1, 2.0);
  const double offset = rng.uniform(-1.0, 1.0);
  Point x_opt = random_feasible_point(space, 0.5 * radius, rng);
  Point x0 = random_feasible_point(space, radius, rng);
  ProblemSpec p{
      .name = "random-quadratic",
      .space = space,
      .hessian = SymmetricMap::dense(std::move(a)),
      .x_opt = std::move(x_opt),
      .f_offset = offset,
      .noise_factor = saturating_noise_factor(sigma),
      .noise = NoiseKind::kGaussian,
      .L = l,
      .sigma = sigma,
      .M = m,
      .T = t,
      .radius = radius,
      .f_opt = offset,
      .convex = true,
      .x0 = std::move(x0),
  };
  validate(p);
  return p;
}

VerificationReport verify_duality(const OperatorSpace& space, std::size_t trials,
                                  std::uint64_t seed, const LmoFn& oracle) {
  VerificationReport r = make_report(tagged("lemma1-duality", space), trials, seed,
                                     kDeterministicTol);
  Rng rng(derive_seed(seed, 101));
  const Point zero = space.zero_point();
  worse(r, norm_R_star(space, zero));
  worse(r, max_abs(oracle(space, zero).values()));

  for (std::size_t t = 0; t < trials; ++t) {
    const Point x = random_point(space, rng);
    const double dual = norm_R_star(space, x);
    const double primal = norm_R(space, x);
    const Point u = oracle(space, x);
    worse(r, rel_diff(dot(x, u), dual));
    worse(r, norm_R(space, u) - 1.0);

    // Random ball points never beat the dual norm; random pairs obey
    // <x,y> <= R(x) R*(y).
    for (std::size_t s = 0; s < kBallSamplesPerTrial; ++s) {
      Point y = random_point(space, rng);
      worse(r, excess(dot(x, y), primal * norm_R_star(space, y)));
      const double ry = norm_R(space, y);
      if (ry > 0.0) {
        y *= 1.0 / ry;
        worse(r, excess(dot(x, y), dual));
      }
    }

    // Extremal candidates computed independently of the oracle.
    double best = kNoViolation;
    switch (space.kind()) {
      case SpaceKind::kScalar: {
        const double d = static_cast<double>(space.dim());
        best = std::sqrt(d) * x.values().norm();
        break;
      }
      case SpaceKind::kDiagonal: {
        const Index d = space.dim();
        if (d <= 12) {
          for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << d); ++mask) {
            double value = 0.0;
            for (Index i = 0; i < d; ++i) {
              value += ((mask >> i) & 1U) ? x.values()(i) : -x.values()(i);
            }
            best = std::max(best, value);
          }
        } else {
          best = x.values().cwiseAbs().sum();
        }
        break;
      }
      case SpaceKind::kLeftMatrix: {
        Eigen::BDCSVD<Eigen::MatrixXd> svd(x.values(), Eigen::ComputeThinU | Eigen::ComputeThinV);
        Point y = x;
        y.values() = std::sqrt(static_cast<double>(space.cols())) * svd.matrixU() *
                     svd.matrixV().transpose();
        worse(r, norm_R(space, y) - 1.0);
        best = dot(x, y);
        break;
      }
    }
    worse(r, rel_diff(best, dual));
  }
  return r;
}

VerificationReport verify_sandwich(const OperatorSpace& space, std::size_t trials,
                                   std::uint64_t seed) {
  VerificationReport r = make_report(tagged("lemma2-sandwich", space), trials, seed,
                                     kDeterministicTol);
  Rng rng(derive_seed(seed, 102));
  const bool flat_probe = !space.is_matrix() || space.rows() <= space.cols();
  for (std::size_t t = 0; t < trials; ++t) {
    const StructuredOperator h = random_positive(space, rng);
    const double tn = trace_norm(h);
    const Point x = random_point(space, rng);
    const double rx = norm_R(space, x);
    const double rsx = norm_R_star(space, x);
    worse(r, excess(weighted_sqnorm(h, x), tn * rx * rx));
    worse(r, excess(rsx * rsx / tn, weighted_sqnorm(h, x, true)));

    if (flat_probe) {
      // Points with a flat R-profile make both inequalities tight.
      const Point u = lmo(space, random_point(space, rng));
      worse(r, rel_diff(weighted_sqnorm(h, u), tn * std::pow(norm_R(space, u), 2.0)));
      const Point hu = h.apply(u);
      worse(r, rel_diff(weighted_sqnorm(h, hu, true), std::pow(norm_R_star(space, hu), 2.0) / tn));
    }
  }
  return r;
}

VerificationReport verify_norm_axioms(const OperatorSpace& space, std::size_t trials,
                                      std::uint64_t seed) {
  VerificationReport r = make_report(tagged("norm-axioms", space), trials, seed,
                                     kDeterministicTol);
  Rng rng(derive_seed(seed, 103));
  using NormFn = double (*)(const OperatorSpace&, const Point&);
  const NormFn norms[] = {&norm_R, &norm_R_star};
  for (NormFn norm : norms) {
    worse(r, norm(space, space.zero_point()));
  }
  for (std::size_t t = 0; t < trials; ++t) {
    const Point x = random_point(space, rng);
    const Point y = random_point(space, rng);
    const double s = rng.uniform(-3.0, 3.0);
    for (NormFn norm : norms) {
      const double nx = norm(space, x);
      const double ny = norm(space, y);
      worse(r, excess(norm(space, x + y), nx + ny));
      worse(r, rel_diff(norm(space, s * x), std::abs(s) * nx));
      worse(r, nx > 0.0 ? -1.0 : 1.0);
    }
  }
  return r;
}

VerificationReport verify_operator_space(const OperatorSpace& space, std::size_t trials,
                                         std::uint64_t seed) {
  VerificationReport r = make_report(tagged("operator-space", space), trials, seed,
                                     kDeterministicTol);
  if (space.is_matrix() && space.dim() > kMaxDenseLeftMatrixDim) {
    r.confidence_note = "skipped: dense representation too large";
    r.max_violation = 0.0;
    return r;
  }
  Rng rng(derive_seed(seed, 104));
  const Index dim = space.dim();
  const StructuredOperator identity = StructuredOperator::identity(space);
  worse(r, payload_diff(project_general(space, Eigen::MatrixXd::Identity(dim, dim)).payload(),
                        identity.payload()));

  for (std::size_t t = 0; t < trials; ++t) {
    const StructuredOperator h = random_positive(space, rng);
    const StructuredOperator f = random_positive(space, rng);
    const Eigen::MatrixXd hd = h.dense();

    // The projection fixes the subspace, and H F H stays in it.
    worse(r, payload_diff(project_general(space, hd).payload(), h.payload()));
    const Eigen::MatrixXd product = hd * f.dense() * hd;
    const StructuredOperator sandwich = h.sandwich(f);
    worse(r, max_abs(sandwich.dense() - product) / std::max(max_abs(product), 1.0));
    worse(r, payload_diff(project_general(space, product).payload(), sandwich.payload()));

    // Order preservation: a positive definite dense operator projects to a
    // positive definite element.
    const Eigen::MatrixXd g = rng.normal_matrix(dim, dim);
    const Eigen::MatrixXd pd = g * g.transpose() + 1e-3 * Eigen::MatrixXd::Identity(dim, dim);
    const StructuredOperator projected = project_general(space, pd);
    worse(r, projected.min_payload_eigenvalue() > 0.0 ? -1.0 : 1.0);

    // Rank-one projection agrees with the general one and generates R, R*.
    const Point x = random_point(space, rng);
    const Eigen::VectorXd v = flat_values(x);
    const StructuredOperator rank1 = project_rank1(space, x);
    worse(r, payload_diff(rank1.payload(), project_general(space, v * v.transpose()).payload()));
    const StructuredOperator root = rank1.sqrt();
    worse(r, rel_diff(root.max_payload_eigenvalue(), norm_R(space, x)));
    worse(r, rel_diff(trace_norm(root), norm_R_star(space, x)));
  }
  return r;
}

VerificationReport verify_lmo(const OperatorSpace& space, std::size_t trials,
                              std::uint64_t seed, const LmoFn& oracle) {
  VerificationReport r = make_report(tagged("lmo-exactness", space), trials, seed,
                                     kDeterministicTol);
  Rng rng(derive_seed(seed, 105));
  const double sqrt_n = std::sqrt(static_cast<double>(space.cols()));
  for (std::size_t t = 0; t < trials; ++t) {
    Point g = random_point(space, rng);
    if (space.is_matrix() && t % 4 == 3 && space.rows() > 1) {
      // Rank-deficient input exercises the truncation.
      g.values().col(0).setZero();
      g.values().row(0).setZero();
    }
    const Point u = oracle(space, g);
    worse(r, rel_diff(dot(g, u), norm_R_star(space, g)));
    worse(r, norm_R(space, u) - 1.0);
    if (space.is_matrix()) {
      const Eigen::VectorXd s =
          Eigen::JacobiSVD<Eigen::MatrixXd>(u.values()).singularValues();
      for (Index i = 0; i < s.size(); ++i) {
        if (s(i) > 1e-6 * sqrt_n) worse(r, std::abs(s(i) - sqrt_n) / sqrt_n);
      }
    }
  }
  return r;
}

VerificationReport verify_B_bounds(const StructuredOperator& l, const StructuredOperator& m,
                                   const StructuredOperator& sigma, const StructuredOperator& t,
                                   std::size_t trials, std::uint64_t seed) {
  const OperatorSpace& space = l.space();
  VerificationReport r = make_report(tagged("lemma6-B-bounds", space), trials, seed,
                                     kDeterministicTol);
  const StructuredOperator b = combine_B(l, m, sigma, t);
  const StructuredOperator b_inv = b.inverse();
  worse(r, std::abs(trace_norm(b) - 1.0));

  const StructuredOperator* ops[] = {&l, &m, &sigma, &t};
  for (const StructuredOperator* h : ops) {
    const double four_tn = 4.0 * trace_norm(*h);
    worse(r, domination_ratio(*h, b) / four_tn - 1.0);
    worse(r, domination_ratio(b_inv, h->inverse()) / four_tn - 1.0);
  }

  Rng rng(derive_seed(seed, 106));
  for (std::size_t k = 0; k < trials; ++k) {
    const Point x = random_point(space, rng);
    const double xb = weighted_sqnorm(b, x);
    const double xb_inv = weighted_sqnorm(b_inv, x);
    for (const StructuredOperator* h : ops) {
      const double four_tn = 4.0 * trace_norm(*h);
      worse(r, excess(weighted_sqnorm(*h, x), four_tn * xb));
      worse(r, excess(xb_inv, four_tn * weighted_sqnorm(*h, x, true)));
    }
  }
  return r;
}

VerificationReport verify_descent(const ProblemSpec& p, const OptimizerConfig& cfg,
                                  std::uint64_t seed) {
  RunOptions options;
  options.record_rows = false;
  const TrajectoryRecord rec = run(p, cfg, p.x0, seed, options);
  VerificationReport r =
      make_report(tagged("lemma7-descent", p.space), static_cast<std::size_t>(rec.iterations),
                  seed, kDeterministicTol, "absolute slack");
  r.max_violation = rec.iterations > 0 ? rec.max_descent_violation : 0.0;
  return r;
}

VerificationReport verify_feasibility_and_criterion(const OperatorSpace& space,
                                                    std::size_t trials, std::uint64_t seed) {
  VerificationReport r = make_report(tagged("lemma3-4-5-feasibility-criterion", space), trials,
                                     seed, kDeterministicTol);
  Rng rng(derive_seed(seed, 107));
  constexpr std::int64_t kSteps = 50;
  constexpr std::size_t kTrialsPerProblem = 20;
  const MomentumOption options[] = {MomentumOption::kMomentum, MomentumOption::kExtrapolation,
                                    MomentumOption::kVarianceReduction};

  // Iterate bounds along short runs, including beta = 1.
  const std::size_t runs = std::max<std::size_t>(1, trials / kSteps);
  for (std::size_t i = 0; i < runs; ++i) {
    const double radius = rng.uniform(0.5, 2.0);
    const ProblemSpec p = random_quadratic(space, radius, rng);
    OptimizerConfig cfg;
    cfg.alpha = rng.uniform(0.1, 1.0);
    cfg.eta = radius * (i % 10 == 9 ? 1.0 : rng.uniform(0.01, 1.0));
    cfg.K = kSteps;
    cfg.option = options[i % 3];
    cfg.radius = radius;
    cfg.beta = cfg.eta / radius;
    RunOptions ro;
    ro.record_rows = false;
    const TrajectoryRecord rec = run(p, cfg, p.x0, derive_seed(seed, 1000 + i), ro);
    worse(r, rec.max_feasibility_violation);
  }

  std::optional<ProblemSpec> convex;
  for (std::size_t t = 0; t < trials; ++t) {
    const double radius = rng.uniform(0.5, 2.0);

    // Stationarity at the constrained minimizer of a/2 ||x - c||^2 with c
    // outside the ball: the minimizer is the Euclidean projection.
    Point c = random_point(space, rng);
    c *= radius * rng.uniform(1.2, 3.0) / norm_R(space, c);
    const double a = rng.uniform(0.5, 2.0);
    const Point x_star = project_to_ball(space, c, radius);
    const Point g_star = a * (x_star - c);
    worse(r, std::abs(grad_criterion(space, x_star, g_star, radius)) /
                 std::max(norm_R_star(space, g_star), kTiny));

    // Nonnegativity on the ball.
    const Point x = random_feasible_point(space, radius, rng);
    const Point g = random_point(space, rng);
    worse(r, -grad_criterion(space, x, g, radius) / std::max(norm_R_star(space, g), kTiny));

    // Gap domination on a convex quadratic with an interior minimizer.
    if (t % kTrialsPerProblem == 0) {
      convex = random_quadratic(space, radius, rng);
    }
    const Point y = random_feasible_point(space, convex->radius, rng);
    const double bound = convex_gap_bound(space, y, grad_true(*convex, y), convex->radius);
    const double gap = f_eval(*convex, y) - convex->f_opt;
    worse(r, (gap - bound) / std::max(1.0, std::abs(bound)));
  }
  return r;
}

double recursion_bound(MomentumOption option, double prev_error_sq, double alpha, double eta,
                       const ProblemConstants& c) {
  const double s2 = c.trace_sigma * c.trace_sigma;
  switch (option) {
    case MomentumOption::kMomentum:
      return (1.0 - alpha) * prev_error_sq +
             64.0 * c.trace_L * c.trace_L * eta * eta / alpha + 4.0 * alpha * alpha * s2;
    case MomentumOption::kExtrapolation:
      return (1.0 - alpha) * prev_error_sq +
             192.0 * c.trace_T * c.trace_T * std::pow(eta, 4.0) / std::pow(alpha, 3.0) +
             4.0 * alpha * alpha * s2;
    case MomentumOption::kVarianceReduction:
      return (1.0 - alpha) * (1.0 - alpha) * prev_error_sq +
             128.0 * c.trace_M * c.trace_M * eta * eta + 8.0 * alpha * alpha * s2;
  }
  return 0.0;
}

double decay_envelope(MomentumOption option, std::int64_t k, double alpha, double eta,
                      const ProblemConstants& c) {
  const double kd = static_cast<double>(k);
  switch (option) {
    case MomentumOption::kMomentum:
      return 2.0 * (std::pow(1.0 - alpha / 2.0, kd) + std::sqrt(alpha)) * c.trace_sigma +
             8.0 * (eta / alpha) * c.trace_L;
    case MomentumOption::kExtrapolation:
      return 2.0 * (std::pow(1.0 - alpha / 2.0, kd) + std::sqrt(alpha)) * c.trace_sigma +
             8.0 * std::sqrt(3.0) * (eta / alpha) * (eta / alpha) * c.trace_T;
    case MomentumOption::kVarianceReduction:
      return 2.0 * (std::pow(1.0 - alpha, kd) + std::sqrt(2.0 * alpha)) * c.trace_sigma +
             8.0 * std::sqrt(2.0 / alpha) * c.trace_M * eta;
  }
  return 0.0;
}

VerificationReport verify_momentum_recursion(MomentumOption option, const ProblemSpec& p,
                                             const FixedState& state, std::size_t samples,
                                             std::uint64_t seed) {
  VerificationReport r = make_report(
      tagged(option_suffix(option), p.space), samples, seed, 0.0,
      "total expectation at a fixed state; one-sided mean + 3 SE, normalized by the bound");
  if (samples < 2) throw DomainError("verify_momentum_recursion needs at least 2 samples");
  const StructuredOperator b_inv = combine_B(p.L, p.M, p.sigma, p.T).inverse();
  const Point x_next = trust_region_step(p.space, state.x_k, state.m_k, state.eta, state.beta);
  const Point grad_next = grad_true(p, x_next);
  const double prev = weighted_sqnorm(b_inv, state.m_k - grad_true(p, state.x_k));
  const double rhs = recursion_bound(option, prev, state.alpha, state.eta, constants_of(p));

  Rng rng(derive_seed(seed, 108));
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const MomentumResult mr =
        momentum_update(option, state.alpha, state.x_k, state.m_k, p, x_next, rng);
    const double v = weighted_sqnorm(b_inv, mr.m_next - grad_next);
    const double delta = v - mean;
    mean += delta / static_cast<double>(s + 1);
    m2 += delta * (v - mean);
  }
  const double se = std::sqrt(m2 / static_cast<double>(samples - 1) / static_cast<double>(samples));
  r.max_violation = (mean - 3.0 * se - rhs) / std::max(rhs, kTiny);
  return r;
}

VerificationReport verify_corollary_decay(MomentumOption option, const ProblemSpec& p,
                                          const OptimizerConfig& cfg, std::size_t runs,
                                          std::uint64_t seed) {
  VerificationReport r = make_report(
      tagged(corollary_id(option), p.space), runs, seed, 0.0,
      "pointwise in k; one-sided mean + 3 SE over runs, normalized by the envelope");
  if (runs < 2) throw DomainError("verify_corollary_decay needs at least 2 runs");
  OptimizerConfig c = cfg;
  c.option = option;
  const std::size_t len = static_cast<std::size_t>(c.K) + 1;
  std::vector<double> sum(len, 0.0);
  std::vector<double> sum_sq(len, 0.0);
  for (std::size_t i = 0; i < runs; ++i) {
    RunOptions ro;
    ro.record_rows = false;
    ro.on_iteration = [&](const IterationEvent& e) {
      const auto k = static_cast<std::size_t>(e.row.k);
      sum[k] += e.row.momentum_err;
      sum_sq[k] += e.row.momentum_err * e.row.momentum_err;
      return true;
    };
    run(p, c, p.x0, derive_seed(seed, i), ro);
  }
  const ProblemConstants constants = constants_of(p);
  const double n = static_cast<double>(runs);
  for (std::size_t k = 0; k < len; ++k) {
    const double mean = sum[k] / n;
    const double var = std::max(0.0, (sum_sq[k] - n * mean * mean) / (n - 1.0));
    const double se = std::sqrt(var / n);
    const double env =
        decay_envelope(option, static_cast<std::int64_t>(k), c.alpha, c.eta, constants);
    worse(r, (mean - 3.0 * se - env) / env);
  }
  return r;
}

Suite parse_suite(std::string_view name) {
  if (name == "geometry") return Suite::kGeometry;
  if (name == "lemmas") return Suite::kLemmas;
  if (name == "all") return Suite::kAll;
  throw DomainError("unknown suite '" + std::string(name) + "'");
}

std::vector<VerificationReport> run_suite(Suite suite, const SuiteOptions& options) {
  if (options.trials == 0) throw DomainError("run_suite: trials must be positive");
  std::vector<VerificationReport> out;
  const std::vector<OperatorSpace> spaces = suite_spaces(options);
  const bool geometry = suite != Suite::kLemmas;
  const bool lemmas = suite != Suite::kGeometry;
  const MomentumOption all_options[] = {MomentumOption::kMomentum,
                                        MomentumOption::kExtrapolation,
                                        MomentumOption::kVarianceReduction};

  for (std::uint64_t seed : options.seeds) {
    for (const OperatorSpace& space : spaces) {
      if (geometry) {
        out.push_back(verify_duality(space, options.trials, seed, options.oracle));
        out.push_back(verify_lmo(space, options.trials, seed, options.oracle));
        out.push_back(verify_sandwich(space, options.trials, seed));
        out.push_back(verify_norm_axioms(space, options.trials, seed));
        out.push_back(verify_operator_space(space, options.trials, seed));
      }
      if (!lemmas) continue;

      Rng rng(derive_seed(seed, 200));
      out.push_back(verify_B_bounds(random_positive(space, rng), random_positive(space, rng),
                                    random_positive(space, rng), random_positive(space, rng),
                                    options.trials, seed));
      out.push_back(verify_feasibility_and_criterion(space, options.trials, seed));

      // Constrained and unconstrained descent runs.
      for (double radius : {1.0, kInfinity}) {
        const ProblemSpec p = random_quadratic(space, radius, rng);
        OptimizerConfig cfg;
        cfg.alpha = 0.5;
        cfg.eta = 0.05;
        cfg.K = static_cast<std::int64_t>(options.trials);
        cfg.option = all_options[seed % 3];
        cfg.radius = radius;
        cfg.beta = std::isinf(radius) ? 0.0 : cfg.eta / radius;
        out.push_back(verify_descent(p, cfg, seed));
      }

      // Monte-Carlo lemmas.
      const ProblemSpec p = random_quadratic(space, 1.0, rng);
      for (MomentumOption option : all_options) {
        FixedState state{random_feasible_point(space, 1.0, rng), random_point(space, rng), 0.3,
                         0.1, 0.1};
        out.push_back(
            verify_momentum_recursion(option, p, state, options.recursion_samples, seed));
        OptimizerConfig cfg;
        cfg.alpha = 0.2;
        cfg.eta = 0.02;
        cfg.beta = 0.02;
        cfg.radius = 1.0;
        cfg.K = 40;
        out.push_back(verify_corollary_decay(option, p, cfg, options.decay_runs, seed));
      }
    }
  }
  return out;
}

}  // namespace nesgd::lab
