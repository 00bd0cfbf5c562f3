#include <algorithm>
#include <cmath>
#include <string>

#include "nesgd/errors.hpp"
#include "nesgd/optimizer.hpp"

namespace nesgd {

namespace {

// Guards against 10000.000000000002 rounding up to 10001.
std::int64_t ceil_count(double value) {
  if (!std::isfinite(value) || value > 9.0e18) {
    throw DomainError("schedule: iteration count overflows");
  }
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(value * (1.0 - 1e-12))));
}

double log_factor(double eps) { return std::max(1.0, std::ceil(std::log(1.0 / eps) + 1.0)); }

}  // namespace

std::string to_string(const ScheduleSelector& sel) {
  std::string out = sel.theorem == Theorem::kT1   ? "T1"
                    : sel.theorem == Theorem::kT2 ? "T2"
                                                  : "T3";
  return out + (sel.convex ? "-convex" : "-nonconvex");
}

ScheduleSelector parse_schedule_selector(std::string_view text) {
  const auto dash = text.find('-');
  const std::string_view head = text.substr(0, dash);
  const std::string_view tail =
      dash == std::string_view::npos ? std::string_view("nonconvex") : text.substr(dash + 1);
  ScheduleSelector sel;
  if (head == "T1") {
    sel.theorem = Theorem::kT1;
  } else if (head == "T2") {
    sel.theorem = Theorem::kT2;
  } else if (head == "T3") {
    sel.theorem = Theorem::kT3;
  } else {
    throw DomainError("unknown schedule '" + std::string(text) + "'");
  }
  if (tail == "convex") {
    sel.convex = true;
  } else if (tail != "nonconvex") {
    throw DomainError("unknown schedule '" + std::string(text) + "'");
  }
  return sel;
}

MomentumOption natural_option(Theorem theorem) {
  switch (theorem) {
    case Theorem::kT1:
      return MomentumOption::kMomentum;
    case Theorem::kT2:
      return MomentumOption::kExtrapolation;
    case Theorem::kT3:
      return MomentumOption::kVarianceReduction;
  }
  return MomentumOption::kMomentum;
}

ProblemConstants constants_of(const ProblemSpec& p) {
  ProblemConstants c;
  c.trace_L = trace_norm(p.L);
  c.trace_sigma = trace_norm(p.sigma);
  c.trace_M = trace_norm(p.M);
  c.trace_T = trace_norm(p.T);
  c.delta0 = std::max(0.0, f_eval(p, p.x0) - p.f_opt);
  c.radius = p.radius;
  return c;
}

OptimizerConfig schedule(const ScheduleSelector& sel, double eps, const ProblemConstants& c,
                         double c_mult) {
  if (!(eps > 0.0) || !(c_mult > 0.0)) {
    throw DomainError("schedule: eps and c_mult must be positive");
  }
  if (!(c.trace_L > 0.0 && c.trace_sigma > 0.0 && c.trace_M > 0.0 && c.trace_T > 0.0 &&
        c.radius > 0.0 && c.delta0 >= 0.0)) {
    throw DomainError("schedule: problem constants must be positive");
  }
  const double R = c.radius;
  const double L = c.trace_L;
  const double S = c.trace_sigma;
  const double M = c.trace_M;
  const double T = c.trace_T;
  const double D = c.delta0;
  const double e = eps;

  OptimizerConfig cfg;
  cfg.option = natural_option(sel.theorem);
  cfg.radius = R;

  if (!sel.convex) {
    // eta = beta * R with beta = min{1, ...}; written directly in eta so an
    // infinite radius gives beta = 0 and a finite stepsize.
    cfg.alpha = std::min(1.0, c_mult * e * e / (S * S));
    const double a = cfg.alpha;
    double eta = R;
    double k_max = std::max({1.0, D / (e * R), L * D / (e * e), S * S * S / (e * e * e)});
    switch (sel.theorem) {
      case Theorem::kT1:
        eta = std::min(eta, c_mult * e * a / L);
        k_max = std::max(k_max, S * S * L * D / std::pow(e, 4.0));
        break;
      case Theorem::kT2:
        eta = std::min({eta, c_mult * e / L, c_mult * std::sqrt(e) * a / std::sqrt(T)});
        k_max = std::max(k_max, S * S * std::sqrt(T) * D / std::pow(e, 3.5));
        break;
      case Theorem::kT3:
        eta = std::min({eta, c_mult * e / L, c_mult * e * std::sqrt(a) / M});
        k_max = std::max({k_max, M * D / (e * e), S * M * D / (e * e * e)});
        break;
    }
    cfg.eta = eta;
    cfg.beta = std::isinf(R) ? 0.0 : eta / R;
    cfg.K = ceil_count(k_max);
    return cfg;
  }

  if (std::isinf(R)) {
    throw DomainError("schedule: convex variants need a finite radius");
  }
  double k_max = std::max({1.0, L * R * R / e, S * S * R * R / (e * e)});
  switch (sel.theorem) {
    case Theorem::kT1:
      cfg.alpha = std::min(1.0, c_mult * e * e / (S * S * R * R));
      cfg.beta = std::min(cfg.alpha, c_mult * e * cfg.alpha / (L * R * R));
      k_max = std::max(k_max, S * S * L * std::pow(R, 4.0) / (e * e * e));
      break;
    case Theorem::kT2:
      cfg.alpha = std::min(1.0, c_mult * e * e / (S * S));
      cfg.beta = std::min({cfg.alpha, c_mult * e / (L * R),
                           c_mult * std::sqrt(e) * cfg.alpha / std::sqrt(T * R * R * R)});
      k_max = std::max(k_max, S * S * std::sqrt(T) * std::pow(R, 3.5) / std::pow(e, 2.5));
      break;
    case Theorem::kT3:
      cfg.alpha = std::min(1.0, c_mult * e * e / (S * S * R * R));
      cfg.beta = std::min({cfg.alpha, c_mult * e / (L * R * R),
                           c_mult * e * std::sqrt(cfg.alpha) / (M * R * R)});
      k_max = std::max(k_max, S * M * R * R * R / (e * e));
      break;
  }
  cfg.eta = cfg.beta * R;
  cfg.K = ceil_count(k_max * log_factor(e));
  return cfg;
}

}  // namespace nesgd
