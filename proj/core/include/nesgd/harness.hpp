#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nesgd/optimizer.hpp"
#include "nesgd/problems.hpp"

namespace nesgd {

struct BenchmarkRef {
  std::string name;
  BenchmarkParams params;
  std::uint64_t seed = 0;
};

enum class Geometry { kNative, kScalar };

struct ExperimentConfig {
  BenchmarkRef problem;
  ScheduleSelector thm;
  std::optional<MomentumOption> option;  // defaults to the theorem's option
  std::vector<double> eps_list;
  std::vector<std::uint64_t> seeds;
  double c_mult = 1.0;
  std::string output_dir;
  Geometry geometry = Geometry::kNative;
  // Stop each run at its hitting time instead of running the full schedule.
  bool stop_at_hit = true;
  unsigned workers = 1;
};

/// Parses the JSON config document
///   {problem:{name,params,seed?}, thm, option?, eps_list, seeds, c_mult?,
///    output_dir?, geometry?, stop_at_hit?, workers?}
/// Throws FormatError naming the offending field.
ExperimentConfig parse_experiment_config(const nlohmann::json& doc);
nlohmann::json to_json(const ExperimentConfig& cfg);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Builds the (possibly recast) problem named by the config.
ProblemSpec build_problem(const ExperimentConfig& cfg);

struct RunOutcome {
  double eps = 0.0;
  std::uint64_t seed = 0;
  std::int64_t K = 0;
  std::int64_t K_hit = 0;
  bool censored = false;
  double alpha = 0.0;
  double beta = 0.0;
  double eta = 0.0;
  double max_descent_violation = 0.0;
  double max_feasibility_violation = 0.0;
  std::string run_hash;
  std::string csv;  // relative to output_dir; empty when not persisted
};

struct EpsPoint {
  double eps = 0.0;
  double mean_K_hit = 0.0;
  // Every run at this eps was censored.
  bool censored = false;
  std::vector<RunOutcome> runs;
};

struct SweepSummary {
  std::string config_hash;
  std::string problem;
  std::string thm;
  std::string option;
  std::string geometry;
  ProblemConstants constants;
  std::vector<EpsPoint> points;
};

nlohmann::json to_json(const SweepSummary& s);
SweepSummary summary_from_json(const nlohmann::json& doc);

/// For each (eps, seed): schedule, run, K_hit = first k with running-min
/// criterion <= eps (non-convex) or f_gap <= eps (convex). Censored runs count
/// at K. Writes runs/<hash>_<seed>.csv, summary.json and (with >= 2
/// uncensored points) ratefit.json under output_dir when it is non-empty.
SweepSummary run_sweep(const ExperimentConfig& cfg);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_stderr = 0.0;
  std::vector<std::pair<double, double>> points;  // (eps, K_hit)
};

/// Least squares of log K_hit on log(1/eps). Needs >= 2 points.
RateFit fit_rate(const std::vector<std::pair<double, double>>& points);
/// Fits the uncensored points of a summary; throws DomainError when fewer
/// than two remain.
RateFit fit_rate(const SweepSummary& summary);
nlohmann::json to_json(const RateFit& fit);

struct ComparisonRow {
  std::string label;  // "native", "scalar" or "euclidean"
  double mean_K_hit = 0.0;
  std::size_t censored_runs = 0;
  ProblemConstants constants;
};

struct ComparisonTable {
  std::string problem;
  double eps = 0.0;
  std::vector<ComparisonRow> rows;
  // trace_L(scalar) / trace_L(native): the constant-factor gain the theory
  // predicts on the L-dependent term.
  double predicted_ratio = 0.0;
  // mean K_hit(scalar) / mean K_hit(native).
  double observed_ratio = 0.0;
  double max_descent_violation = -kInfinity;
};

/// Same objective run in its native geometry, in the Scalar geometry, and
/// with plain SGD, under matched theorem schedules at one eps.
ComparisonTable compare_geometries(const BenchmarkRef& problem, const ScheduleSelector& thm,
                                   double eps, const std::vector<std::uint64_t>& seeds,
                                   double c_mult = 1.0);
nlohmann::json to_json(const ComparisonTable& table);

/// FNV-1a 64-bit of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& doc);

}  // namespace nesgd
