#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "nesgd/errors.hpp"
#include "nesgd/harness.hpp"
#include "nesgd/persist.hpp"
#include "test_util.hpp"

using namespace nesgd;
using nlohmann::json;

namespace {

json small_config() {
  return json::parse(R"({
    "problem": {"name": "dense-diag", "params": {"d": 4, "level": 0.5, "sigma": 0.05}},
    "thm": "T3-convex",
    "eps_list": [0.2, 0.1, 0.05],
    "seeds": [0, 1]
  })");
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST(FitRate, ExactPowerLaw) {
  std::vector<std::pair<double, double>> pts;
  for (double eps : {0.2, 0.1, 0.05, 0.025}) pts.emplace_back(eps, 3.0 / std::pow(eps, 4));
  const auto fit = fit_rate(pts);
  EXPECT_NEAR(fit.slope, 4.0, 1e-9);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
  EXPECT_NEAR(fit.intercept, std::log(3.0), 1e-9);
  EXPECT_NEAR(fit.slope_stderr, 0.0, 1e-9);
}

TEST(FitRate, NoisySquareLaw) {
  Rng rng(61);
  std::vector<std::pair<double, double>> pts;
  for (double eps = 0.5; eps > 1e-3; eps /= 1.5) {
    pts.emplace_back(eps, 10.0 / (eps * eps) * (1.0 + 0.1 * rng.uniform(-1, 1)));
  }
  const auto fit = fit_rate(pts);
  EXPECT_NEAR(fit.slope, 2.0, 0.2);
  EXPECT_GT(fit.slope_stderr, 0.0);
}

TEST(FitRate, Preconditions) {
  using Points = std::vector<std::pair<double, double>>;
  EXPECT_THROW(fit_rate(Points{{0.1, 10.0}}), DomainError);
  EXPECT_THROW(fit_rate(Points{{0.1, 10.0}, {0.1, 20.0}}), DomainError);
  EXPECT_THROW(fit_rate(Points{{0.1, 10.0}, {0.05, 0.0}}), DomainError);
}

TEST(ExperimentConfig, ParsesAndRoundTrips) {
  const auto cfg = parse_experiment_config(small_config());
  EXPECT_EQ(cfg.problem.name, "dense-diag");
  EXPECT_EQ(cfg.thm, (ScheduleSelector{Theorem::kT3, true}));
  EXPECT_FALSE(cfg.option.has_value());
  EXPECT_EQ(cfg.eps_list.size(), 3u);
  const auto again = parse_experiment_config(to_json(cfg));
  EXPECT_EQ(to_json(again), to_json(cfg));
}

TEST(ExperimentConfig, ErrorsNameTheField) {
  auto expect_field = [](json doc, const std::string& field) {
    try {
      parse_experiment_config(doc);
      ADD_FAILURE() << "expected FormatError for " << field;
    } catch (const FormatError& e) {
      EXPECT_NE(std::string(e.what()).find(field), std::string::npos) << e.what();
    }
  };
  json doc = small_config();
  doc["colour"] = 1;
  expect_field(doc, "colour");
  doc = small_config();
  doc.erase("thm");
  expect_field(doc, "thm");
  doc = small_config();
  doc["eps_list"] = {0.1, 0.2};
  expect_field(doc, "eps_list");
  doc = small_config();
  doc["seeds"] = "zero";
  expect_field(doc, "seeds");
  doc = small_config();
  doc["geometry"] = "euclid";
  expect_field(doc, "geometry");
  doc = small_config();
  doc["workers"] = 0;
  expect_field(doc, "workers");
  EXPECT_THROW(load_experiment_config("/nonexistent/cfg.json"), FormatError);
}

TEST(ConfigHash, StableAndSensitive) {
  EXPECT_EQ(config_hash(small_config()), config_hash(small_config()));
  EXPECT_EQ(config_hash(small_config()).size(), 16u);
  json other = small_config();
  other["seeds"] = {0, 2};
  EXPECT_NE(config_hash(other), config_hash(small_config()));
}

TEST(RunSweep, EasyProblemHitsQuickly) {
  auto cfg = parse_experiment_config(small_config());
  const auto s = run_sweep(cfg);
  ASSERT_EQ(s.points.size(), 3u);
  for (const auto& pt : s.points) {
    EXPECT_FALSE(pt.censored);
    for (const auto& r : pt.runs) {
      EXPECT_LT(r.K_hit, r.K);
      EXPECT_LE(r.max_descent_violation, 1e-9);
      EXPECT_LE(r.max_feasibility_violation, 1e-12);
    }
  }
  EXPECT_LE(s.points[0].mean_K_hit, s.points[2].mean_K_hit);
}

TEST(RunSweep, DuplicateSeedsGiveIdenticalHits) {
  auto doc = small_config();
  doc["seeds"] = {3, 3};
  const auto s = run_sweep(parse_experiment_config(doc));
  for (const auto& pt : s.points) EXPECT_EQ(pt.runs[0].K_hit, pt.runs[1].K_hit);
}

TEST(RunSweep, OutputIsByteIdentical) {
  const auto a = nesgd::testing::scratch_dir("sweep_a");
  const auto b = nesgd::testing::scratch_dir("sweep_b");
  auto doc = small_config();
  doc["output_dir"] = a.string();
  run_sweep(parse_experiment_config(doc));
  doc["output_dir"] = b.string();
  doc["workers"] = 2;
  run_sweep(parse_experiment_config(doc));
  EXPECT_EQ(slurp(a / "summary.json"), slurp(b / "summary.json"));
  EXPECT_EQ(slurp(a / "ratefit.json"), slurp(b / "ratefit.json"));
  std::size_t files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(a / "runs")) {
    EXPECT_EQ(slurp(entry.path()), slurp(b / "runs" / entry.path().filename()));
    ++files;
  }
  EXPECT_EQ(files, 6u);

  const auto summary = summary_from_json(read_json(a / "summary.json"));
  EXPECT_EQ(to_json(summary), read_json(a / "summary.json"));
  const auto rec = read_trajectory_csv(a / summary.points[0].runs[0].csv);
  EXPECT_EQ(rec.config_hash, summary.points[0].runs[0].run_hash);
  EXPECT_EQ(rec.rows.back().k, summary.points[0].runs[0].K_hit);
}

TEST(RunSweep, CensoredRunsCountAtK) {
  const auto dir = nesgd::testing::scratch_dir("sweep_censored");
  auto doc = small_config();
  doc["c_mult"] = 1e-9;
  doc["eps_list"] = {0.1, 0.05};
  doc["output_dir"] = dir.string();
  const auto s = run_sweep(parse_experiment_config(doc));
  for (const auto& pt : s.points) {
    EXPECT_TRUE(pt.censored);
    for (const auto& r : pt.runs) EXPECT_EQ(r.K_hit, r.K);
  }
  EXPECT_TRUE(std::filesystem::exists(dir / "summary.json"));
  EXPECT_FALSE(std::filesystem::exists(dir / "ratefit.json"));
  EXPECT_THROW(fit_rate(s), DomainError);
}

TEST(RunSweep, ScalarGeometryRecasts) {
  auto doc = small_config();
  doc["geometry"] = "scalar";
  const auto cfg = parse_experiment_config(doc);
  EXPECT_EQ(build_problem(cfg).space.kind(), SpaceKind::kScalar);
  const auto s = run_sweep(cfg);
  EXPECT_EQ(s.geometry, "scalar");
}

TEST(CompareGeometries, SparseDiagPredictedRatio) {
  BenchmarkRef ref{"sparse-diag", {{"d", 256}, {"delta", 1e-3}}, 0};
  const auto table = compare_geometries(ref, {Theorem::kT3, true}, 0.2, {0, 1});
  EXPECT_NEAR(table.predicted_ratio, 256.0 / 1.255, 1e-9);
  ASSERT_EQ(table.rows.size(), 3u);
  EXPECT_EQ(table.rows[0].label, "native");
  EXPECT_EQ(table.rows[1].label, "scalar");
  EXPECT_EQ(table.rows[2].label, "euclidean");
  EXPECT_GT(table.observed_ratio, 1.0);
  EXPECT_LE(table.max_descent_violation, 1e-9);
}

TEST(CompareGeometries, DenseDiagHasNoStructuralGain) {
  BenchmarkRef ref{"dense-diag", {{"d", 8}}, 0};
  const auto table = compare_geometries(ref, {Theorem::kT3, true}, 0.2, {0});
  EXPECT_NEAR(table.predicted_ratio, 1.0, 1e-12);
}

TEST(CompareGeometries, LowRankPredictedRatio) {
  BenchmarkRef ref{"lowrank-left", {{"m", 32}, {"n", 4}, {"rank", 2}, {"delta", 1e-9}}, 0};
  const auto native = make_benchmark(ref.name, ref.params, 0);
  const auto scalar = recast_to_scalar(native);
  EXPECT_NEAR(trace_norm(scalar.L) / trace_norm(native.L), 16.0, 1e-5);
}
