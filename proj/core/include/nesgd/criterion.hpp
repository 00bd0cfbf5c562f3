#pragma once

#include "nesgd/geometry.hpp"

namespace nesgd {

inline constexpr double kDefaultStationarityTol = 1e-8;

/// Scaled Frank-Wolfe gap over the R-ball of radius `radius`:
///   (1/radius) max_{R(x') <= radius} <g, x - x'> = <g, x>/radius + R*(g),
/// and R*(g) when radius is infinite. Throws DomainError if x lies outside a
/// finite ball.
double grad_criterion(const OperatorSpace& space, const Point& x, const Point& g, double radius);

/// True iff grad_criterion <= tol. A zero criterion means -g lies in the
/// normal cone of the ball at x.
bool stationarity_check(const OperatorSpace& space, const Point& x, const Point& g,
                        double radius, double tol = kDefaultStationarityTol);

/// radius * grad_criterion: for a convex objective an upper bound on
/// f(x) - f*. Requires a finite radius.
double convex_gap_bound(const OperatorSpace& space, const Point& x, const Point& g, double radius);

/// Whether R(x) <= radius up to rounding.
bool is_feasible(const OperatorSpace& space, const Point& x, double radius);

}  // namespace nesgd
