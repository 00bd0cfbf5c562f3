#include <cmath>
#include <optional>
#include <string>

#include "nesgd/criterion.hpp"
#include "nesgd/errors.hpp"
#include "nesgd/problems.hpp"

namespace nesgd {
namespace {

const BenchmarkParams kCommonDefaults{
    {"sigma", 1.0},
    {"radius", 1.0},
    {"unconstrained", 0.0},
    {"x_opt_scale", 0.5},
    {"x0_scale", -0.5},
    {"rademacher", 0.0},
};

BenchmarkParams with_common(BenchmarkParams specific) {
  for (const auto& [key, value] : kCommonDefaults) {
    specific.emplace(key, value);
  }
  return specific;
}

const std::vector<BenchmarkInfo>& registry() {
  static const std::vector<BenchmarkInfo> infos{
      {"sparse-diag",
       "Diagonal geometry; l = (1, delta, ..., delta), A = L = M, Sigma = sigma * l",
       with_common({{"d", 256.0}, {"delta", 1e-3}})},
      {"dense-diag", "Diagonal geometry; l = level * 1, A = L = M, Sigma = sigma * 1",
       with_common({{"d", 32.0}, {"level", 1.0}})},
      {"lowrank-left",
       "LeftMatrix geometry; B = U diag(1 (rank times), delta, ...) U^T, A = L = M, "
       "Sigma = sigma * B",
       with_common({{"m", 32.0}, {"n", 32.0}, {"rank", 2.0}, {"delta", 1e-3}})},
      {"isotropic", "Scalar geometry; A = L = M = level * I, Sigma = sigma * I",
       with_common({{"d", 4.0}, {"level", 1.0}})},
  };
  return infos;
}

BenchmarkParams resolve(const BenchmarkInfo& info, const BenchmarkParams& given) {
  BenchmarkParams out = info.defaults;
  for (const auto& [key, value] : given) {
    auto it = out.find(key);
    if (it == out.end()) {
      throw DomainError("benchmark '" + info.name + "' has no parameter '" + key + "'");
    }
    if (!std::isfinite(value)) {
      throw DomainError("benchmark parameter '" + key + "' must be finite");
    }
    it->second = value;
  }
  return out;
}

Index positive_int(const BenchmarkParams& params, const std::string& key) {
  const double v = params.at(key);
  if (v < 1.0 || v != std::floor(v)) {
    throw DomainError("benchmark parameter '" + key + "' must be a positive integer");
  }
  return static_cast<Index>(v);
}

double positive_real(const BenchmarkParams& params, const std::string& key) {
  const double v = params.at(key);
  if (!(v > 0.0)) {
    throw DomainError("benchmark parameter '" + key + "' must be positive");
  }
  return v;
}

Eigen::MatrixXd random_orthogonal(Index m, Rng& rng) {
  const Eigen::MatrixXd g = rng.normal_matrix(m, m);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(m, m);
  // Fix column signs so Q is uniquely determined by the draw.
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < m; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

// Constrained minimizer of a diagonal quadratic over the box ||x||_inf <= r.
Point clip_to_box(const Point& x, double r) {
  Point out = x;
  out.values() = x.values().cwiseMax(-r).cwiseMin(r);
  return out;
}

}  // namespace

const std::vector<BenchmarkInfo>& list_benchmarks() { return registry(); }

ProblemSpec make_benchmark(std::string_view name, const BenchmarkParams& given,
                           std::uint64_t seed) {
  const BenchmarkInfo* info = nullptr;
  for (const auto& candidate : registry()) {
    if (candidate.name == name) info = &candidate;
  }
  if (info == nullptr) {
    throw DomainError("unknown benchmark '" + std::string(name) + "'");
  }
  const BenchmarkParams params = resolve(*info, given);
  Rng rng(seed);

  const double sigma_level = positive_real(params, "sigma");
  const bool unconstrained = params.at("unconstrained") != 0.0;
  const double radius = unconstrained ? kInfinity : positive_real(params, "radius");
  const double ref_radius = unconstrained ? 1.0 : radius;
  const double x_opt_scale = params.at("x_opt_scale");
  const double x0_scale = params.at("x0_scale");
  if (!unconstrained && std::abs(x0_scale) > 1.0) {
    throw DomainError("x0_scale must lie in [-1, 1] so that x0 is feasible");
  }

  std::optional<OperatorSpace> space;
  std::optional<StructuredOperator> l_op, sigma_op, t_op;
  std::optional<SymmetricMap> hessian;

  if (info->name == "sparse-diag" || info->name == "dense-diag") {
    const Index d = positive_int(params, "d");
    space = OperatorSpace::diagonal(d);
    Eigen::VectorXd l;
    if (info->name == "sparse-diag") {
      l = Eigen::VectorXd::Constant(d, positive_real(params, "delta"));
      l(0) = 1.0;
    } else {
      l = Eigen::VectorXd::Constant(d, positive_real(params, "level"));
    }
    l_op = StructuredOperator::diagonal(*space, l);
    sigma_op = StructuredOperator::diagonal(*space, sigma_level * l);
    t_op = StructuredOperator::diagonal(*space, Eigen::VectorXd::Constant(d, 1.0 / d));
    hessian = SymmetricMap::diagonal(l);
  } else if (info->name == "lowrank-left") {
    const Index m = positive_int(params, "m");
    const Index n = positive_int(params, "n");
    const Index rank = positive_int(params, "rank");
    if (rank > m) {
      throw DomainError("lowrank-left: rank must not exceed m");
    }
    space = OperatorSpace::left_matrix(m, n);
    Eigen::VectorXd spectrum = Eigen::VectorXd::Constant(m, positive_real(params, "delta"));
    spectrum.head(rank).setOnes();
    const Eigen::MatrixXd u = random_orthogonal(m, rng);
    const Eigen::MatrixXd b = u * spectrum.asDiagonal() * u.transpose();
    const Eigen::MatrixXd b_sym = 0.5 * (b + b.transpose());
    l_op = StructuredOperator::left(*space, b_sym);
    sigma_op = StructuredOperator::left(*space, sigma_level * b_sym);
    t_op = StructuredOperator::left(
        *space, Eigen::MatrixXd::Identity(m, m) / static_cast<double>(m * n));
    hessian = SymmetricMap::left_multiply(b_sym);
  } else {
    const Index d = positive_int(params, "d");
    const double level = positive_real(params, "level");
    space = OperatorSpace::scalar(d);
    l_op = StructuredOperator::scalar(*space, level);
    sigma_op = StructuredOperator::scalar(*space, sigma_level);
    t_op = StructuredOperator::scalar(*space, 1.0 / static_cast<double>(d));
    hessian = SymmetricMap::scaled_identity(level);
  }

  // Unit-R-norm direction: sign pattern, normalized vector or scaled
  // orthogonal factor depending on the geometry.
  Point direction = space->zero_point();
  direction.values() = rng.normal_matrix(direction.rows(), direction.cols());
  direction = lmo(*space, direction);

  Point x_opt = (x_opt_scale * ref_radius) * direction;
  Point x0 = (x0_scale * ref_radius) * direction;

  double f_opt = 0.0;
  if (!unconstrained && std::abs(x_opt_scale) > 1.0) {
    // x_opt outside the ball: constrained optimum known in closed form for
    // separable and isotropic problems only.
    const SymmetricMap& a = *hessian;
    ProblemSpec probe{.name = info->name, .space = *space, .hessian = a, .x_opt = x_opt,
                      .noise_factor = SymmetricMap::scaled_identity(0.0), .L = *l_op,
                      .sigma = *sigma_op, .M = *l_op, .T = *t_op, .radius = radius,
                      .x0 = x0};
    if (space->kind() == SpaceKind::kDiagonal) {
      f_opt = f_eval(probe, clip_to_box(x_opt, radius));
    } else if (space->kind() == SpaceKind::kScalar) {
      f_opt = f_eval(probe, (radius / norm_R(*space, x_opt)) * x_opt);
    } else {
      throw DomainError("lowrank-left: x_opt_scale must be at most 1");
    }
  }

  ProblemSpec p{
      .name = info->name,
      .space = *space,
      .hessian = *hessian,
      .x_opt = std::move(x_opt),
      .f_offset = 0.0,
      .noise_factor = saturating_noise_factor(*sigma_op),
      .noise = params.at("rademacher") != 0.0 ? NoiseKind::kRademacher : NoiseKind::kGaussian,
      .L = *l_op,
      .sigma = *sigma_op,
      .M = *l_op,
      .T = *t_op,
      .radius = radius,
      .f_opt = f_opt,
      .convex = true,
      .x0 = std::move(x0),
  };
  validate(p);
  return p;
}

std::pair<std::string, BenchmarkParams> parse_benchmark_ref(std::string_view ref) {
  const auto colon = ref.find(':');
  std::string name(ref.substr(0, colon));
  BenchmarkParams params;
  if (colon == std::string_view::npos) {
    return {name, params};
  }
  std::string_view rest = ref.substr(colon + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos || eq == 0) {
      throw DomainError("malformed benchmark parameter '" + std::string(item) + "'");
    }
    const std::string key(item.substr(0, eq));
    const std::string value(item.substr(eq + 1));
    std::size_t used = 0;
    double parsed = 0.0;
    try {
      parsed = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != value.size() || value.empty()) {
      throw DomainError("benchmark parameter '" + key + "' is not a number");
    }
    params[key] = parsed;
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return {name, params};
}

ProblemSpec recast_to_scalar(const ProblemSpec& p) {
  if (p.space.kind() == SpaceKind::kScalar) {
    return p;
  }
  if (!is_feasible(p.space, p.x_opt, p.radius)) {
    throw DomainError("recast_to_scalar: x_opt must lie inside the native ball");
  }
  const Index dim = p.space.dim();
  const OperatorSpace scalar = OperatorSpace::scalar(dim);
  auto flatten = [](const Point& x) {
    return Point::vector(Eigen::Map<const Eigen::VectorXd>(x.values().data(), x.size()));
  };
  const double dim_d = static_cast<double>(dim);
  ProblemSpec out{
      .name = p.name + "@scalar",
      .space = scalar,
      .hessian = p.hessian,
      .x_opt = flatten(p.x_opt),
      .f_offset = p.f_offset,
      .noise_factor = p.noise_factor,
      .noise = p.noise,
      .L = StructuredOperator::scalar(scalar, p.L.max_payload_eigenvalue()),
      .sigma = StructuredOperator::scalar(
          scalar, std::sqrt(p.noise_factor.squared_frobenius(dim) / dim_d)),
      .M = StructuredOperator::scalar(scalar, p.M.max_payload_eigenvalue()),
      .T = StructuredOperator::scalar(scalar, 1.0 / dim_d),
      .radius = p.radius,
      .f_opt = p.f_opt,
      .convex = p.convex,
      .x0 = flatten(p.x0),
  };
  validate(out);
  return out;
}

}  // namespace nesgd
