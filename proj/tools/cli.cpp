#include "cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "nesgd/errors.hpp"
#include "nesgd/harness.hpp"
#include "nesgd/lemma_lab.hpp"
#include "nesgd/persist.hpp"

namespace nesgd::cli {

namespace {

constexpr double kInvariantTol = 1e-9;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<Index> parse_dims(const std::string& text) {
  std::vector<Index> dims;
  for (const std::string& item : split_list(text)) {
    const long v = std::stol(item);
    if (v < 1) throw DomainError("--dims entries must be positive");
    dims.push_back(v);
  }
  return dims;
}

std::vector<std::pair<Index, Index>> parse_shapes(const std::string& text) {
  std::vector<std::pair<Index, Index>> shapes;
  for (const std::string& item : split_list(text)) {
    const auto x = item.find('x');
    if (x == std::string::npos) throw DomainError("--shapes entries look like 2x3");
    const long m = std::stol(item.substr(0, x));
    const long n = std::stol(item.substr(x + 1));
    if (m < 1 || n < 1) throw DomainError("--shapes entries must be positive");
    shapes.emplace_back(m, n);
  }
  return shapes;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  for (const std::string& item : split_list(text)) seeds.push_back(std::stoull(item));
  if (seeds.empty()) throw DomainError("at least one seed is required");
  return seeds;
}

// Test hook: a deliberately wrong oracle that drops the dimension factor.
LmoFn faulty_oracle(const std::string& fault) {
  if (fault == "lmo-no-sqrt-n") {
    return [](const OperatorSpace& space, const Point& g) {
      Point u = lmo(space, g);
      if (space.kind() == SpaceKind::kLeftMatrix) {
        u *= 1.0 / std::sqrt(static_cast<double>(space.cols()));
      } else if (space.kind() == SpaceKind::kScalar) {
        u *= 1.0 / std::sqrt(static_cast<double>(space.dim()));
      }
      return u;
    };
  }
  throw DomainError("unknown fault '" + fault + "'");
}

struct RunArgs {
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  double eps = 0.0;
};

int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err) {
  const ExperimentConfig cfg = load_experiment_config(args.config);
  const double eps = args.eps > 0.0 ? args.eps : cfg.eps_list.back();
  const ProblemSpec p = build_problem(cfg);
  OptimizerConfig sched = schedule(cfg.thm, eps, constants_of(p), cfg.c_mult);
  sched.option = cfg.option.value_or(natural_option(cfg.thm.theorem));

  TrajectoryRecord rec = run(p, sched, p.x0, args.seed);
  nlohmann::json hashed = to_json(cfg);
  hashed.erase("output_dir");
  hashed.erase("workers");
  rec.config_hash = config_hash({{"config", config_hash(hashed)}, {"eps", eps}});
  rec.constants["eps"] = eps;

  const std::filesystem::path dir = args.out.empty() ? cfg.output_dir : args.out;
  if (dir.empty()) throw DomainError("no output directory: pass --out or set output_dir");
  const std::filesystem::path csv =
      dir / "runs" / (rec.config_hash + "_" + std::to_string(args.seed) + ".csv");
  write_trajectory_csv(rec, csv);

  const TrajectoryRow& last = rec.rows.back();
  out << "K=" << sched.K << " f_gap=" << format_real(last.f_gap)
      << " criterion=" << format_real(last.criterion) << " csv=" << csv.string() << "\n";
  if (rec.max_feasibility_violation > kInvariantTol) {
    err << "feasibility invariant violated by " << format_real(rec.max_feasibility_violation)
        << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

struct SweepArgs {
  std::string config;
  std::string out;
  unsigned workers = 0;
};

int cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg = load_experiment_config(args.config);
  if (!args.out.empty()) cfg.output_dir = args.out;
  if (args.workers > 0) cfg.workers = args.workers;
  if (cfg.output_dir.empty()) throw DomainError("no output directory: pass --out or set output_dir");
  const SweepSummary summary = run_sweep(cfg);

  double worst_descent = -kInfinity;
  double worst_feasibility = -kInfinity;
  for (const EpsPoint& pt : summary.points) {
    out << "eps=" << format_real(pt.eps) << " mean_K_hit=" << format_real(pt.mean_K_hit)
        << (pt.censored ? " (censored)" : "") << "\n";
    for (const RunOutcome& r : pt.runs) {
      worst_descent = std::max(worst_descent, r.max_descent_violation);
      worst_feasibility = std::max(worst_feasibility, r.max_feasibility_violation);
    }
  }
  try {
    const RateFit fit = fit_rate(summary);
    out << "slope=" << format_real(fit.slope) << " stderr=" << format_real(fit.slope_stderr)
        << "\n";
  } catch (const DomainError&) {
    out << "slope unavailable: fewer than two uncensored points\n";
  }
  if (worst_descent > kInvariantTol || worst_feasibility > kInvariantTol) {
    err << "invariant violated: descent " << format_real(worst_descent) << ", feasibility "
        << format_real(worst_feasibility) << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

struct RatesArgs {
  std::string input;
  std::string out;
};

int cmd_rates(const RatesArgs& args, std::ostream& out, std::ostream& err) {
  const SweepSummary summary = summary_from_json(read_json(args.input));
  RateFit fit;
  try {
    fit = fit_rate(summary);
  } catch (const DomainError& e) {
    err << e.what() << "\n";
    return kExitFailure;
  }
  out << "slope = " << format_real(fit.slope) << " +/- " << format_real(fit.slope_stderr)
      << " (r^2 = " << format_real(fit.r_squared) << ", " << fit.points.size() << " points)\n";
  if (!args.out.empty()) write_json(to_json(fit), args.out);
  return kExitOk;
}

struct VerifyArgs {
  std::string suite = "all";
  std::string dims = "1,2,3,4";
  std::string shapes = "2x2,2x3,3x3";
  std::size_t trials = 1000;
  std::string seeds = "0,1";
  std::size_t samples = 10000;
  std::size_t runs = 1000;
  std::string out;
  std::string fault;
};

int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err) {
  if (args.trials == 0) throw DomainError("--trials must be positive");
  if (args.samples < 2 || args.runs < 2) throw DomainError("--samples and --runs must be >= 2");
  lab::SuiteOptions options;
  options.vector_dims = parse_dims(args.dims);
  options.matrix_shapes = parse_shapes(args.shapes);
  options.trials = args.trials;
  options.seeds = parse_seeds(args.seeds);
  options.recursion_samples = args.samples;
  options.decay_runs = args.runs;
  if (!args.fault.empty()) options.oracle = faulty_oracle(args.fault);

  const std::vector<lab::VerificationReport> reports =
      lab::run_suite(lab::parse_suite(args.suite), options);

  std::ofstream file;
  if (!args.out.empty()) {
    const std::filesystem::path path = args.out;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    file.open(path, std::ios::binary);
    if (!file) throw DomainError("cannot open '" + args.out + "' for writing");
  }
  std::vector<std::string> failing;
  for (const lab::VerificationReport& r : reports) {
    if (file.is_open()) file << lab::to_json_line(r) << "\n";
    if (!r.pass()) failing.push_back(r.lemma_id);
  }
  out << reports.size() - failing.size() << "/" << reports.size() << " checks passed\n";
  if (!failing.empty()) {
    err << "failing:";
    for (const std::string& id : failing) err << " " << id;
    err << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

struct CompareArgs {
  std::string problem = "sparse-diag";
  std::string thm = "T3-convex";
  double eps = 0.05;
  std::string seeds = "0,1,2,3,4";
  double c_mult = 1.0;
  std::string out;
};

int cmd_compare(const CompareArgs& args, std::ostream& out, std::ostream& err) {
  const auto [name, params] = parse_benchmark_ref(args.problem);
  const BenchmarkRef ref{name, params, 0};
  const ComparisonTable table = compare_geometries(ref, parse_schedule_selector(args.thm),
                                                   args.eps, parse_seeds(args.seeds), args.c_mult);
  for (const ComparisonRow& row : table.rows) {
    out << std::left << std::setw(10) << row.label << " mean_K_hit=" << format_real(row.mean_K_hit)
        << " censored=" << row.censored_runs << "\n";
  }
  out << "observed_ratio=" << format_real(table.observed_ratio)
      << " predicted_ratio=" << format_real(table.predicted_ratio) << "\n";
  if (!args.out.empty()) write_json(to_json(table), args.out);
  if (table.max_descent_violation > kInvariantTol) {
    err << "descent inequality violated by " << format_real(table.max_descent_violation) << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

int cmd_bench_list(std::ostream& out) {
  for (const BenchmarkInfo& info : list_benchmarks()) {
    out << info.name << "\n  " << info.description << "\n  defaults:";
    for (const auto& [key, value] : info.defaults) out << " " << key << "=" << format_real(value);
    out << "\n";
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Non-Euclidean SGD with momentum and weight decay: runs, sweeps, verification"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Execute one trajectory and write its CSV");
  run->add_option("--config", run_args.config, "Experiment config (JSON)")->required();
  run->add_option("--seed", run_args.seed, "Random seed");
  run->add_option("--out", run_args.out, "Output directory (defaults to the config's)");
  run->add_option("--eps", run_args.eps, "Target accuracy (defaults to the smallest in eps_list)");

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "Run an eps sweep and write summary.json");
  sweep->add_option("--config", sweep_args.config, "Experiment config (JSON)")->required();
  sweep->add_option("--out", sweep_args.out, "Output directory (overrides the config)");
  sweep->add_option("--workers", sweep_args.workers, "Worker threads (results do not depend on it)");

  VerifyArgs verify_args;
  auto* verify = app.add_subcommand("verify", "Run the lemma conformance suite");
  verify->add_option("--suite", verify_args.suite, "geometry, lemmas or all")
      ->check(CLI::IsMember({"geometry", "lemmas", "all"}));
  verify->add_option("--dims", verify_args.dims, "Vector dimensions, comma separated");
  verify->add_option("--shapes", verify_args.shapes, "Matrix shapes such as 2x2,2x3");
  verify->add_option("--trials", verify_args.trials, "Trials per deterministic check");
  verify->add_option("--seed", verify_args.seeds, "Seeds, comma separated");
  verify->add_option("--samples", verify_args.samples, "Monte-Carlo samples per recursion check");
  verify->add_option("--runs", verify_args.runs, "Trajectories per decay check");
  verify->add_option("--out", verify_args.out, "JSON lines report file");
  verify->add_option("--fault", verify_args.fault)->group("");

  RatesArgs rates_args;
  auto* rates = app.add_subcommand("rates", "Fit the eps exponent of a sweep summary");
  rates->add_option("--input", rates_args.input, "summary.json from a sweep")->required();
  rates->add_option("--out", rates_args.out, "Write the fit as JSON");

  CompareArgs compare_args;
  auto* compare = app.add_subcommand("compare", "Native vs scalar geometry vs plain SGD");
  compare->add_option("--problem", compare_args.problem, "Benchmark as name:key=value,...");
  compare->add_option("--thm", compare_args.thm, "Schedule such as T3-convex");
  compare->add_option("--eps", compare_args.eps, "Target accuracy");
  compare->add_option("--seeds", compare_args.seeds, "Seeds, comma separated");
  compare->add_option("--c-mult", compare_args.c_mult, "Multiplier on the schedule constants");
  compare->add_option("--out", compare_args.out, "Write the table as JSON");

  auto* bench_list = app.add_subcommand("bench-list", "List benchmark generators");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run) return cmd_run(run_args, out, err);
    if (*sweep) return cmd_sweep(sweep_args, out, err);
    if (*verify) return cmd_verify(verify_args, out, err);
    if (*rates) return cmd_rates(rates_args, out, err);
    if (*compare) return cmd_compare(compare_args, out, err);
    if (*bench_list) return cmd_bench_list(out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace nesgd::cli
