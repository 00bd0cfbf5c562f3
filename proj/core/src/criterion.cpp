#include "nesgd/criterion.hpp"

#include <cmath>

#include "nesgd/errors.hpp"

namespace nesgd {

namespace {
constexpr double kFeasibilitySlack = 1e-12;
}

bool is_feasible(const OperatorSpace& space, const Point& x, double radius) {
  if (std::isinf(radius)) return true;
  return norm_R(space, x) <= radius * (1.0 + kFeasibilitySlack) + kFeasibilitySlack;
}

double grad_criterion(const OperatorSpace& space, const Point& x, const Point& g, double radius) {
  space.require(x, "grad_criterion");
  space.require(g, "grad_criterion");
  if (!(radius > 0.0)) {
    throw DomainError("grad_criterion: radius must be positive");
  }
  const double dual = norm_R_star(space, g);
  if (std::isinf(radius)) return dual;
  if (!is_feasible(space, x, radius)) {
    throw DomainError("grad_criterion: x lies outside the ball");
  }
  return dot(g, x) / radius + dual;
}

bool stationarity_check(const OperatorSpace& space, const Point& x, const Point& g,
                        double radius, double tol) {
  return grad_criterion(space, x, g, radius) <= tol;
}

double convex_gap_bound(const OperatorSpace& space, const Point& x, const Point& g,
                        double radius) {
  if (std::isinf(radius)) {
    throw DomainError("convex_gap_bound requires a finite radius");
  }
  return radius * grad_criterion(space, x, g, radius);
}

}  // namespace nesgd
