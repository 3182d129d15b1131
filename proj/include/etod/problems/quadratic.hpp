#pragma once

#include "etod/matrix.hpp"
#include "etod/problem.hpp"

#include <span>

namespace etod::problems {

/// f(x, theta) = theta1/2 x^2 + theta0 x on the real line; valid for theta1 > 0.
ObjectiveProblem make_quadratic_problem();

double quadratic_objective(double x, std::span<const double> theta);

/// d^2 f / dx dtheta at x*(theta) = -theta0/theta1, i.e. (1, -theta0/theta1).
/// Throws DegenerateParameter when theta1 == 0.
Vector quadratic_d(std::span<const double> theta);

}  // namespace etod::problems
