#pragma once

#include "etod/matrix.hpp"
#include "etod/problem.hpp"

#include <span>

namespace etod::problems {

struct PricingOptions {
    double bracket_lo = 0.0;
    double bracket_hi = 50.0;
};

/// Negated revenue f(x, theta) = -x c(x, theta) with logistic conversion
/// c = 1 / (1 + exp(theta0 + theta1 x)). Optimal prices come from
/// minimize_1d on the bracket; when the estimated demand does not fall with
/// price the solver returns the better bracket end, flagged not converged.
ObjectiveProblem make_pricing_problem(PricingOptions options = {});

double pricing_objective(double price, std::span<const double> theta);

/// Closed-form (d^2 f / dx dtheta0, d^2 f / dx dtheta1) at (x, theta).
Vector pricing_d(double price, std::span<const double> theta);

/// df/dx = -c + theta1 x c (1 - c).
double pricing_gradient(double price, std::span<const double> theta);

/// d^2 f / dx^2 = c (1 - c) (1 + theta1 - theta1^2 x (1 - 2c)).
double pricing_curvature(double price, std::span<const double> theta);

}  // namespace etod::problems
