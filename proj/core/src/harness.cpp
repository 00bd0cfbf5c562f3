#include "nesgd/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <set>
#include <thread>

#include "nesgd/errors.hpp"
#include "nesgd/persist.hpp"

namespace nesgd {

namespace {

using nlohmann::json;

const std::set<std::string> kConfigKeys{"problem",  "thm",        "option",      "eps_list",
                                        "seeds",    "c_mult",     "output_dir",  "geometry",
                                        "stop_at_hit", "workers"};

const json& required(const json& doc, const char* key) {
  if (!doc.contains(key)) throw FormatError(std::string("config: missing field '") + key + "'");
  return doc.at(key);
}

template <typename T>
T get_as(const json& value, const char* key) {
  try {
    return value.get<T>();
  } catch (const json::exception&) {
    throw FormatError(std::string("config: field '") + key + "' has the wrong type");
  }
}

std::string_view geometry_name(Geometry g) { return g == Geometry::kNative ? "native" : "scalar"; }

json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double from_nullable(const json& v) { return v.is_null() ? -kInfinity : v.get<double>(); }

json constants_json(const ProblemConstants& c) {
  return {{"trace_L", c.trace_L}, {"trace_sigma", c.trace_sigma}, {"trace_M", c.trace_M},
          {"trace_T", c.trace_T}, {"delta0", c.delta0},
          {"radius", std::isinf(c.radius) ? json("inf") : json(c.radius)}};
}

ProblemConstants constants_from_json(const json& doc) {
  ProblemConstants c;
  c.trace_L = doc.at("trace_L").get<double>();
  c.trace_sigma = doc.at("trace_sigma").get<double>();
  c.trace_M = doc.at("trace_M").get<double>();
  c.trace_T = doc.at("trace_T").get<double>();
  c.delta0 = doc.at("delta0").get<double>();
  const json& r = doc.at("radius");
  c.radius = r.is_string() ? kInfinity : r.get<double>();
  return c;
}

// Fields that change results; output location and worker count do not.
json hashed_part(const ExperimentConfig& cfg) {
  json doc = to_json(cfg);
  doc.erase("output_dir");
  doc.erase("workers");
  return doc;
}

struct HitResult {
  TrajectoryRecord record;
  std::int64_t K_hit = 0;
  bool censored = true;
};

HitResult run_to_hit(const ProblemSpec& p, const OptimizerConfig& sched, double eps, bool convex,
                     std::uint64_t seed, bool stop_at_hit, bool record_rows) {
  HitResult out;
  double running_min = kInfinity;
  RunOptions options;
  options.record_rows = record_rows;
  options.on_iteration = [&](const IterationEvent& e) {
    if (!out.censored) return true;
    running_min = std::min(running_min, e.row.criterion);
    const bool hit = convex ? e.row.f_gap <= eps : running_min <= eps;
    if (hit) {
      out.censored = false;
      out.K_hit = e.row.k;
      return !stop_at_hit;
    }
    return true;
  };
  out.record = run(p, sched, p.x0, seed, options);
  if (out.censored) out.K_hit = sched.K;
  return out;
}

template <typename Job>
void parallel_for(std::size_t count, unsigned workers, const Job& job) {
  workers = std::max(1U, std::min<unsigned>(workers, static_cast<unsigned>(count)));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> threads;
  for (unsigned w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < count; i = next++) job(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

std::string config_hash(const json& doc) {
  const std::string text = doc.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentConfig parse_experiment_config(const json& doc) {
  if (!doc.is_object()) throw FormatError("config: expected a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!kConfigKeys.count(key)) throw FormatError("config: unknown field '" + key + "'");
  }
  ExperimentConfig cfg;
  const json& problem = required(doc, "problem");
  if (!problem.is_object()) throw FormatError("config: field 'problem' must be an object");
  cfg.problem.name = get_as<std::string>(required(problem, "name"), "problem.name");
  if (problem.contains("params")) {
    const json& params = problem.at("params");
    if (!params.is_object()) throw FormatError("config: field 'problem.params' must be an object");
    for (const auto& [key, value] : params.items()) {
      if (!value.is_number()) {
        throw FormatError("config: problem parameter '" + key + "' must be a number");
      }
      cfg.problem.params[key] = value.get<double>();
    }
  }
  if (problem.contains("seed")) {
    cfg.problem.seed = get_as<std::uint64_t>(problem.at("seed"), "problem.seed");
  }
  try {
    cfg.thm = parse_schedule_selector(get_as<std::string>(required(doc, "thm"), "thm"));
    if (doc.contains("option")) {
      cfg.option = parse_momentum_option(get_as<std::string>(doc.at("option"), "option"));
    }
  } catch (const DomainError& e) {
    throw FormatError(std::string("config: ") + e.what());
  }
  cfg.eps_list = get_as<std::vector<double>>(required(doc, "eps_list"), "eps_list");
  if (cfg.eps_list.empty()) throw FormatError("config: field 'eps_list' must not be empty");
  for (std::size_t i = 0; i < cfg.eps_list.size(); ++i) {
    if (!(cfg.eps_list[i] > 0.0)) throw FormatError("config: field 'eps_list' must be positive");
    if (i > 0 && !(cfg.eps_list[i] < cfg.eps_list[i - 1])) {
      throw FormatError("config: field 'eps_list' must be strictly decreasing");
    }
  }
  cfg.seeds = get_as<std::vector<std::uint64_t>>(required(doc, "seeds"), "seeds");
  if (cfg.seeds.empty()) throw FormatError("config: field 'seeds' must not be empty");
  if (doc.contains("c_mult")) {
    cfg.c_mult = get_as<double>(doc.at("c_mult"), "c_mult");
    if (!(cfg.c_mult > 0.0)) throw FormatError("config: field 'c_mult' must be positive");
  }
  if (doc.contains("output_dir")) {
    cfg.output_dir = get_as<std::string>(doc.at("output_dir"), "output_dir");
  }
  if (doc.contains("geometry")) {
    const auto g = get_as<std::string>(doc.at("geometry"), "geometry");
    if (g == "native") {
      cfg.geometry = Geometry::kNative;
    } else if (g == "scalar") {
      cfg.geometry = Geometry::kScalar;
    } else {
      throw FormatError("config: field 'geometry' must be \"native\" or \"scalar\"");
    }
  }
  if (doc.contains("stop_at_hit")) {
    cfg.stop_at_hit = get_as<bool>(doc.at("stop_at_hit"), "stop_at_hit");
  }
  if (doc.contains("workers")) {
    cfg.workers = get_as<unsigned>(doc.at("workers"), "workers");
    if (cfg.workers == 0) throw FormatError("config: field 'workers' must be positive");
  }
  return cfg;
}

json to_json(const ExperimentConfig& cfg) {
  json params = json::object();
  for (const auto& [key, value] : cfg.problem.params) params[key] = value;
  json doc = {
      {"problem", {{"name", cfg.problem.name}, {"params", params}, {"seed", cfg.problem.seed}}},
      {"thm", to_string(cfg.thm)},
      {"eps_list", cfg.eps_list},
      {"seeds", cfg.seeds},
      {"c_mult", cfg.c_mult},
      {"output_dir", cfg.output_dir},
      {"geometry", std::string(geometry_name(cfg.geometry))},
      {"stop_at_hit", cfg.stop_at_hit},
      {"workers", cfg.workers},
  };
  if (cfg.option) doc["option"] = std::string(to_string(*cfg.option));
  return doc;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw FormatError("config file '" + path.string() + "' does not exist");
  }
  return parse_experiment_config(read_json(path));
}

ProblemSpec build_problem(const ExperimentConfig& cfg) {
  ProblemSpec p = make_benchmark(cfg.problem.name, cfg.problem.params, cfg.problem.seed);
  return cfg.geometry == Geometry::kScalar ? recast_to_scalar(p) : p;
}

json to_json(const SweepSummary& s) {
  json points = json::array();
  for (const EpsPoint& pt : s.points) {
    json runs = json::array();
    for (const RunOutcome& r : pt.runs) {
      runs.push_back({{"eps", r.eps},
                      {"seed", r.seed},
                      {"K", r.K},
                      {"K_hit", r.K_hit},
                      {"censored", r.censored},
                      {"alpha", r.alpha},
                      {"beta", r.beta},
                      {"eta", r.eta},
                      {"max_descent_violation", nullable(r.max_descent_violation)},
                      {"max_feasibility_violation", nullable(r.max_feasibility_violation)},
                      {"run_hash", r.run_hash},
                      {"csv", r.csv}});
    }
    points.push_back({{"eps", pt.eps},
                      {"mean_K_hit", pt.mean_K_hit},
                      {"censored", pt.censored},
                      {"runs", runs}});
  }
  return {{"config_hash", s.config_hash}, {"problem", s.problem},
          {"thm", s.thm},                 {"option", s.option},
          {"geometry", s.geometry},       {"constants", constants_json(s.constants)},
          {"points", points}};
}

SweepSummary summary_from_json(const json& doc) {
  try {
    SweepSummary s;
    s.config_hash = doc.at("config_hash").get<std::string>();
    s.problem = doc.at("problem").get<std::string>();
    s.thm = doc.at("thm").get<std::string>();
    s.option = doc.at("option").get<std::string>();
    s.geometry = doc.at("geometry").get<std::string>();
    s.constants = constants_from_json(doc.at("constants"));
    for (const json& pt : doc.at("points")) {
      EpsPoint p;
      p.eps = pt.at("eps").get<double>();
      p.mean_K_hit = pt.at("mean_K_hit").get<double>();
      p.censored = pt.at("censored").get<bool>();
      for (const json& r : pt.value("runs", json::array())) {
        RunOutcome o;
        o.eps = r.at("eps").get<double>();
        o.seed = r.at("seed").get<std::uint64_t>();
        o.K = r.at("K").get<std::int64_t>();
        o.K_hit = r.at("K_hit").get<std::int64_t>();
        o.censored = r.at("censored").get<bool>();
        o.alpha = r.at("alpha").get<double>();
        o.beta = r.at("beta").get<double>();
        o.eta = r.at("eta").get<double>();
        o.max_descent_violation = from_nullable(r.at("max_descent_violation"));
        o.max_feasibility_violation = from_nullable(r.at("max_feasibility_violation"));
        o.run_hash = r.at("run_hash").get<std::string>();
        o.csv = r.at("csv").get<std::string>();
        p.runs.push_back(std::move(o));
      }
      s.points.push_back(std::move(p));
    }
    return s;
  } catch (const json::exception& e) {
    throw FormatError(std::string("summary document: ") + e.what());
  }
}

SweepSummary run_sweep(const ExperimentConfig& cfg) {
  const ProblemSpec p = build_problem(cfg);
  const MomentumOption option = cfg.option.value_or(natural_option(cfg.thm.theorem));

  SweepSummary summary;
  summary.config_hash = config_hash(hashed_part(cfg));
  summary.problem = p.name;
  summary.thm = to_string(cfg.thm);
  summary.option = std::string(to_string(option));
  summary.geometry = std::string(geometry_name(cfg.geometry));
  summary.constants = constants_of(p);

  const std::filesystem::path out_dir = cfg.output_dir;
  const bool persist = !cfg.output_dir.empty();

  const std::size_t n_seeds = cfg.seeds.size();
  std::vector<RunOutcome> outcomes(cfg.eps_list.size() * n_seeds);
  parallel_for(outcomes.size(), cfg.workers, [&](std::size_t job) {
    const double eps = cfg.eps_list[job / n_seeds];
    const std::uint64_t seed = cfg.seeds[job % n_seeds];
    OptimizerConfig sched = schedule(cfg.thm, eps, summary.constants, cfg.c_mult);
    sched.option = option;
    HitResult hit = run_to_hit(p, sched, eps, cfg.thm.convex, seed, cfg.stop_at_hit, persist);

    RunOutcome o;
    o.eps = eps;
    o.seed = seed;
    o.K = sched.K;
    o.K_hit = hit.K_hit;
    o.censored = hit.censored;
    o.alpha = sched.alpha;
    o.beta = sched.beta;
    o.eta = sched.eta;
    o.max_descent_violation = hit.record.max_descent_violation;
    o.max_feasibility_violation = hit.record.max_feasibility_violation;
    o.run_hash = config_hash({{"config", summary.config_hash}, {"eps", eps}});
    if (persist) {
      hit.record.config_hash = o.run_hash;
      hit.record.constants["eps"] = eps;
      const std::string name = o.run_hash + "_" + std::to_string(seed) + ".csv";
      write_trajectory_csv(hit.record, out_dir / "runs" / name);
      o.csv = "runs/" + name;
    }
    outcomes[job] = std::move(o);
  });

  for (std::size_t e = 0; e < cfg.eps_list.size(); ++e) {
    EpsPoint pt;
    pt.eps = cfg.eps_list[e];
    pt.censored = true;
    double total = 0.0;
    for (std::size_t s = 0; s < n_seeds; ++s) {
      RunOutcome& o = outcomes[e * n_seeds + s];
      total += static_cast<double>(o.K_hit);
      pt.censored = pt.censored && o.censored;
      pt.runs.push_back(std::move(o));
    }
    pt.mean_K_hit = total / static_cast<double>(n_seeds);
    summary.points.push_back(std::move(pt));
  }

  if (persist) {
    write_json(to_json(summary), out_dir / "summary.json");
    std::size_t usable = 0;
    for (const EpsPoint& pt : summary.points) {
      if (!pt.censored && pt.mean_K_hit > 0.0) ++usable;
    }
    const std::filesystem::path fit_path = out_dir / "ratefit.json";
    if (usable >= 2) {
      write_json(to_json(fit_rate(summary)), fit_path);
    } else {
      std::filesystem::remove(fit_path);
    }
  }
  return summary;
}

RateFit fit_rate(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) throw DomainError("fit_rate needs at least two points");
  const double n = static_cast<double>(points.size());
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& [eps, k] : points) {
    if (!(eps > 0.0) || !(k > 0.0)) {
      throw DomainError("fit_rate: eps and K_hit must be positive");
    }
    xs.push_back(std::log(1.0 / eps));
    ys.push_back(std::log(k));
  }
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i] / n;
    my += ys[i] / n;
  }
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx <= 0.0) throw DomainError("fit_rate: eps values must not all coincide");
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - fit.intercept - fit.slope * xs[i];
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  fit.slope_stderr = points.size() > 2 ? std::sqrt(ss_res / (n - 2.0) / sxx) : 0.0;
  fit.points = points;
  return fit;
}

RateFit fit_rate(const SweepSummary& summary) {
  std::vector<std::pair<double, double>> points;
  for (const EpsPoint& pt : summary.points) {
    if (!pt.censored && pt.mean_K_hit > 0.0) points.emplace_back(pt.eps, pt.mean_K_hit);
  }
  if (points.size() < 2) {
    throw DomainError("fit_rate: fewer than two uncensored points");
  }
  return fit_rate(points);
}

json to_json(const RateFit& fit) {
  json pts = json::array();
  for (const auto& [eps, k] : fit.points) pts.push_back({{"eps", eps}, {"K_hit", k}});
  return {{"slope", fit.slope},
          {"intercept", fit.intercept},
          {"r_squared", fit.r_squared},
          {"slope_stderr", fit.slope_stderr},
          {"points", pts}};
}

ComparisonTable compare_geometries(const BenchmarkRef& problem, const ScheduleSelector& thm,
                                   double eps, const std::vector<std::uint64_t>& seeds,
                                   double c_mult) {
  if (seeds.empty()) throw DomainError("compare_geometries needs at least one seed");
  const ProblemSpec native = make_benchmark(problem.name, problem.params, problem.seed);
  const ProblemSpec scalar = recast_to_scalar(native);
  const MomentumOption option = natural_option(thm.theorem);

  ComparisonTable table;
  table.problem = native.name;
  table.eps = eps;
  const double n = static_cast<double>(seeds.size());

  std::int64_t scalar_K = 1;
  for (const ProblemSpec* p : {&native, &scalar}) {
    ComparisonRow row;
    row.label = p == &native ? "native" : "scalar";
    row.constants = constants_of(*p);
    OptimizerConfig sched = schedule(thm, eps, row.constants, c_mult);
    sched.option = option;
    if (p == &scalar) scalar_K = sched.K;
    double total = 0.0;
    for (std::uint64_t seed : seeds) {
      const HitResult hit = run_to_hit(*p, sched, eps, thm.convex, seed, true, false);
      total += static_cast<double>(hit.K_hit);
      row.censored_runs += hit.censored ? 1 : 0;
      table.max_descent_violation =
          std::max(table.max_descent_violation, hit.record.max_descent_violation);
    }
    row.mean_K_hit = total / n;
    table.rows.push_back(row);
  }

  // Plain SGD with the classical stepsize min{1/lambda_max(A), eps/tr(C)},
  // C = F F^T the noise covariance, on the scalar schedule's budget.
  {
    ComparisonRow row;
    row.label = "euclidean";
    row.constants = constants_of(scalar);
    const double lmax = std::max(native.hessian.max_eigenvalue(), 1e-300);
    const double noise_trace = native.noise_factor.squared_frobenius(native.space.dim());
    const double gamma = std::min(1.0 / lmax, noise_trace > 0.0 ? eps / noise_trace : kInfinity);
    double total = 0.0;
    for (std::uint64_t seed : seeds) {
      bool censored = true;
      std::int64_t k_hit = scalar_K;
      double running_min = kInfinity;
      RunOptions options;
      options.record_rows = false;
      options.on_iteration = [&](const IterationEvent& e) {
        running_min = std::min(running_min, e.row.criterion);
        if (thm.convex ? e.row.f_gap <= eps : running_min <= eps) {
          censored = false;
          k_hit = e.row.k;
          return false;
        }
        return true;
      };
      euclidean_baseline(native, scalar_K, gamma, seed, options);
      total += static_cast<double>(k_hit);
      row.censored_runs += censored ? 1 : 0;
    }
    row.mean_K_hit = total / n;
    table.rows.push_back(row);
  }

  table.predicted_ratio = table.rows[1].constants.trace_L / table.rows[0].constants.trace_L;
  table.observed_ratio = table.rows[1].mean_K_hit / std::max(table.rows[0].mean_K_hit, 1.0);
  return table;
}

json to_json(const ComparisonTable& table) {
  json rows = json::array();
  for (const ComparisonRow& r : table.rows) {
    rows.push_back({{"label", r.label},
                    {"mean_K_hit", r.mean_K_hit},
                    {"censored_runs", r.censored_runs},
                    {"constants", constants_json(r.constants)}});
  }
  return {{"problem", table.problem},
          {"eps", table.eps},
          {"rows", rows},
          {"predicted_ratio", table.predicted_ratio},
          {"observed_ratio", table.observed_ratio},
          {"max_descent_violation", nullable(table.max_descent_violation)}};
}

}  // namespace nesgd
