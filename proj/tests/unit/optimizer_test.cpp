#include <gtest/gtest.h>

#include <cmath>

#include "nesgd/criterion.hpp"
#include "nesgd/errors.hpp"
#include "nesgd/lemma_lab.hpp"
#include "nesgd/optimizer.hpp"
#include "test_util.hpp"

using namespace nesgd;
using nesgd::testing::diagonal_quadratic;
using nesgd::testing::mat;
using nesgd::testing::vec;

namespace {

ProblemSpec noiseless(ProblemSpec p) {
  p.noise_factor = SymmetricMap::scaled_identity(0.0);
  return p;
}

ProblemSpec separable(double radius) {
  Eigen::VectorXd a(3), xo(3);
  a << 2.0, 1.0, 0.5;
  xo << 0.4, -0.3, 0.2;
  return diagonal_quadratic(a, xo, 0.1, radius);
}

}  // namespace

TEST(TrustRegionStep, DiagonalExampleMatchesGridSearch) {
  const auto space = OperatorSpace::diagonal(2);
  const Point x = trust_region_step(space, vec({0, 0}), vec({2, -1}), 0.1, 0.0);
  EXPECT_TRUE(x.values().isApprox(vec({-0.1, 0.1}).values()));
  double best = 1e300;
  const int n = 200;
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n; ++j) {
      const double y0 = 0.1 * (-1.0 + 2.0 * i / n);
      const double y1 = 0.1 * (-1.0 + 2.0 * j / n);
      best = std::min(best, 2 * y0 - y1);
    }
  }
  EXPECT_NEAR(dot(vec({2, -1}), x), best, 1e-12);
}

TEST(TrustRegionStep, ZeroMomentumIsPureDecay) {
  const auto space = OperatorSpace::scalar(2);
  const Point x = trust_region_step(space, vec({1, -2}), vec({0, 0}), 0.3, 0.25);
  EXPECT_TRUE(x.values().isApprox(vec({0.75, -1.5}).values()));
}

TEST(TrustRegionStep, LeftMatrixExample) {
  const auto space = OperatorSpace::left_matrix(2, 2);
  const Point x = trust_region_step(space, mat({{0, 0}, {0, 0}}), mat({{3, 0}, {0, 0}}), 1.0, 0.0);
  EXPECT_TRUE(x.values().isApprox(mat({{-std::sqrt(2.0), 0}, {0, 0}}).values(), 1e-14));
}

TEST(TrustRegionStep, ConstraintIsActiveAndMinimizes) {
  Rng rng(41);
  for (const auto& space : nesgd::testing::small_spaces()) {
    for (int t = 0; t < 30; ++t) {
      const Point xk = lab::random_feasible_point(space, 1.0, rng);
      const Point m = lab::random_point(space, rng);
      const double eta = 0.2, beta = 0.2;
      const Point next = trust_region_step(space, xk, m, eta, beta);
      const Point center = (1.0 - beta) * xk;
      EXPECT_NEAR(norm_R(space, next - center), eta, 1e-12);
      for (int s = 0; s < 30; ++s) {
        const Point y = center + lab::random_feasible_point(space, eta, rng);
        EXPECT_LE(dot(m, next), dot(m, y) + 1e-12);
      }
    }
  }
}

TEST(TrustRegionStep, Errors) {
  const auto space = OperatorSpace::diagonal(2);
  EXPECT_THROW(trust_region_step(space, vec({0, 0}), vec({1, 1}), 0.0, 0.0), DomainError);
  EXPECT_THROW(trust_region_step(space, vec({0, 0}), vec({1, 1}), 0.1, 1.5), DomainError);
  EXPECT_THROW(trust_region_step(space, vec({0, 0}), vec({1}), 0.1, 0.0), ShapeError);
}

TEST(MomentumUpdate, AlphaOneCollapsesM1AndM2) {
  const auto p = separable(1.0);
  const Point xk = vec({0.1, 0.1, 0.1});
  const Point mk = vec({5, 5, 5});
  const Point xn = vec({0.0, 0.2, -0.1});
  Rng r1(3), r2(3), r3(3);
  const auto m1 = momentum_update(MomentumOption::kMomentum, 1.0, xk, mk, p, xn, r1);
  const auto m2 = momentum_update(MomentumOption::kExtrapolation, 1.0, xk, mk, p, xn, r2);
  const auto g = grad_sample(p, xn, r3).value;
  EXPECT_EQ(m1.m_next.values(), g.values());
  EXPECT_EQ(m2.m_next.values(), g.values());
  EXPECT_EQ(m2.xbar->values(), xn.values());
}

TEST(MomentumUpdate, ExtrapolatedPoint) {
  const auto p = noiseless(diagonal_quadratic(Eigen::VectorXd::Ones(2), Eigen::VectorXd::Zero(2),
                                              1.0, 1.0));
  Rng rng(0);
  const auto r = momentum_update(MomentumOption::kExtrapolation, 0.5, vec({0, 0}), vec({0, 0}),
                                 p, vec({0.1, 0}), rng);
  EXPECT_TRUE(r.xbar->values().isApprox(vec({0.2, 0}).values()));
  EXPECT_TRUE(r.m_next.values().isApprox(vec({0.1, 0}).values()));
}

TEST(MomentumUpdate, NoiselessMvrContractsError) {
  const auto p = noiseless(separable(1.0));
  const Point xk = vec({0.1, -0.2, 0.3});
  const Point mk = vec({1, 2, 3});
  const Point xn = vec({0.05, 0.0, 0.2});
  Rng rng(0);
  const double alpha = 0.3;
  const auto r = momentum_update(MomentumOption::kVarianceReduction, alpha, xk, mk, p, xn, rng);
  const Point lhs = r.m_next - grad_true(p, xn);
  const Point rhs = (1 - alpha) * (mk - grad_true(p, xk));
  EXPECT_LT((lhs.values() - rhs.values()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(MomentumUpdate, MvrUsesOneSharedDraw) {
  const auto p = separable(1.0);
  const Point x = vec({0.1, -0.2, 0.3});
  Rng rng(8);
  // Same point twice: the noise cancels in g_next - (1 - alpha) g_prev for alpha = 0.
  const auto r = momentum_update(MomentumOption::kVarianceReduction, 1e-300, x, vec({1, 1, 1}),
                                 p, x, rng);
  EXPECT_TRUE(r.m_next.values().isApprox(vec({1, 1, 1}).values(), 1e-12));
}

TEST(Init, NoiselessMomentumIsGradient) {
  const auto p = noiseless(separable(1.0));
  OptimizerConfig cfg;
  cfg.radius = 1.0;
  const auto s = init(p, cfg, p.x_opt, 0);
  EXPECT_LT(s.m.values().cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_THROW(init(p, cfg, vec({2, 0, 0}), 0), DomainError);
}

TEST(Coupled, CorrectsOrRejects) {
  OptimizerConfig cfg;
  cfg.alpha = 0.5;
  cfg.eta = 0.1;
  cfg.radius = 2.0;
  cfg.beta = 0.3;
  std::string warning;
  EXPECT_DOUBLE_EQ(coupled(cfg, false, &warning).beta, 0.05);
  EXPECT_FALSE(warning.empty());
  EXPECT_THROW(coupled(cfg, true), DomainError);
  cfg.beta = 0.05;
  EXPECT_NO_THROW(coupled(cfg, true));
  cfg.alpha = 0.0;
  EXPECT_THROW(coupled(cfg), DomainError);
  cfg.alpha = 1.0;
  cfg.eta = 3.0;
  EXPECT_THROW(coupled(cfg), DomainError);
  cfg.radius = kInfinity;
  cfg.eta = 3.0;
  EXPECT_EQ(coupled(cfg).beta, 0.0);
  cfg.K = -1;
  EXPECT_THROW(coupled(cfg), DomainError);
  EXPECT_EQ(parse_momentum_option("mvr"), MomentumOption::kVarianceReduction);
  EXPECT_EQ(to_string(MomentumOption::kExtrapolation), "M2");
  EXPECT_THROW(parse_momentum_option("M4"), DomainError);
}

TEST(Run, ZeroIterationsReturnsStart) {
  const auto p = separable(1.0);
  OptimizerConfig cfg;
  cfg.K = 0;
  cfg.eta = 0.1;
  const auto rec = run(p, cfg, p.x0, 1);
  EXPECT_EQ(rec.rows.size(), 1u);
  EXPECT_EQ(rec.final_x->values(), p.x0.values());
  EXPECT_EQ(rec.iterations, 0);
}

TEST(Run, NoiselessSignDescentMatchesReference) {
  const auto p = noiseless(separable(kInfinity));
  OptimizerConfig cfg;
  cfg.alpha = 1.0;
  cfg.eta = 0.01;
  cfg.K = 200;
  cfg.option = MomentumOption::kMomentum;
  const auto rec = run(p, cfg, p.x0, 5);

  // x <- x - eta * sign(A (x - x_opt)), evaluated coordinate by coordinate.
  const double a[3] = {2.0, 1.0, 0.5};
  const double xo[3] = {0.4, -0.3, 0.2};
  double x[3] = {0, 0, 0};
  for (int k = 0; k < 200; ++k) {
    for (int i = 0; i < 3; ++i) {
      const double g = a[i] * (x[i] - xo[i]);
      x[i] -= 0.01 * (g > 0 ? 1.0 : g < 0 ? -1.0 : 0.0);
    }
  }
  for (int i = 0; i < 3; ++i) EXPECT_EQ(rec.final_x->values()(i, 0), x[i]);
  EXPECT_EQ(rec.constants.at("beta"), 0.0);
}

TEST(Run, SameSeedIsBitIdentical) {
  const auto p = make_benchmark("lowrank-left", {{"m", 3}, {"n", 4}}, 2);
  const auto cfg = schedule({Theorem::kT3, true}, 0.2, constants_of(p));
  const auto a = run(p, cfg, p.x0, 9);
  const auto b = run(p, cfg, p.x0, 9);
  EXPECT_EQ(a.rows, b.rows);
  EXPECT_EQ(a.final_x->values(), b.final_x->values());
  const auto c = run(p, cfg, p.x0, 10);
  EXPECT_NE(a.final_x->values(), c.final_x->values());
}

TEST(Run, StaysFeasibleAndSatisfiesDescent) {
  for (const char* name : {"sparse-diag", "dense-diag", "lowrank-left", "isotropic"}) {
    BenchmarkParams params;
    if (std::string(name) == "sparse-diag") params = {{"d", 16}, {"delta", 0.01}};
    if (std::string(name) == "lowrank-left") params = {{"m", 4}, {"n", 3}};
    const auto p = make_benchmark(name, params, 1);
    for (auto thm : {Theorem::kT1, Theorem::kT2, Theorem::kT3}) {
      auto cfg = schedule({thm, true}, 0.3, constants_of(p));
      cfg.K = std::min<std::int64_t>(cfg.K, 500);
      const auto rec = run(p, cfg, p.x0, 3);
      EXPECT_LE(rec.max_feasibility_violation, 1e-12) << name;
      EXPECT_LE(rec.max_descent_violation, 1e-9) << name;
      for (const auto& row : rec.rows) EXPECT_LE(row.R_x, p.radius * (1 + 1e-12));
    }
  }
}

TEST(Run, CallbackStopsEarlyAndThinningKeepsLastRow) {
  const auto p = separable(1.0);
  OptimizerConfig cfg;
  cfg.alpha = 0.5;
  cfg.eta = 0.01;
  cfg.beta = 0.01;
  cfg.K = 100;
  RunOptions opts;
  opts.on_iteration = [](const IterationEvent& e) { return e.row.k < 7; };
  const auto rec = run(p, cfg, p.x0, 0, opts);
  EXPECT_EQ(rec.iterations, 7);
  EXPECT_EQ(rec.rows.back().k, 7);

  cfg.K = 250000;
  cfg.eta = 1e-4;
  cfg.beta = 1e-4;
  const auto big = run(p, cfg, p.x0, 0);
  EXPECT_LE(big.rows.size(), static_cast<std::size_t>(RunOptions::kThinnedRows + 1));
  EXPECT_EQ(big.rows.back().k, 250000);
}

TEST(DescentTerms, NoiselessStationaryStart) {
  const auto p = noiseless(separable(1.0));
  OptimizerConfig cfg;
  cfg.alpha = 1.0;
  cfg.eta = 0.01;
  cfg.beta = 0.01;
  cfg.radius = 1.0;
  const auto binv = combine_B(p.L, p.M, p.sigma, p.T).inverse();
  const Point zero = Point::zeros_vector(3);
  const auto t = descent_terms(p, cfg, binv, p.x_opt, zero, (1 - 0.01) * p.x_opt);
  EXPECT_DOUBLE_EQ(t.lhs, 0.0);
  EXPECT_LE(t.lhs, t.rhs);
}

TEST(EuclideanBaseline, NoiselessDecreasesAndStaysFeasible) {
  const auto p = noiseless(separable(1.0));
  const auto rec = euclidean_baseline(p, 100, 0.1, 0);
  for (std::size_t i = 1; i < rec.rows.size(); ++i) {
    EXPECT_LE(rec.rows[i].f, rec.rows[i - 1].f + 1e-15);
  }
  EXPECT_LE(rec.max_feasibility_violation, 1e-12);

  // Matches (I - gamma A)^k applied to x0 - x_opt when the ball is inactive.
  Eigen::VectorXd e = p.x0.values().col(0) - p.x_opt.values().col(0);
  Eigen::VectorXd a(3);
  a << 2.0, 1.0, 0.5;
  for (int k = 0; k < 100; ++k) e = e - 0.1 * a.cwiseProduct(e);
  const Eigen::VectorXd got = rec.final_x->values().col(0) - p.x_opt.values().col(0);
  EXPECT_LT((got - e).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(EuclideanBaseline, ZeroStepIsConstant) {
  const auto p = separable(1.0);
  const auto rec = euclidean_baseline(p, 20, 0.0, 4);
  EXPECT_EQ(rec.final_x->values(), p.x0.values());
  EXPECT_THROW(euclidean_baseline(p, -1, 0.1, 0), DomainError);
}
