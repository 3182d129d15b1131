#include "etod/problems/quadratic.hpp"

#include "etod/error.hpp"

namespace etod::problems {

double quadratic_objective(double x, std::span<const double> theta)
{
    return 0.5 * theta[1] * x * x + theta[0] * x;
}

Vector quadratic_d(std::span<const double> theta)
{
    if (theta.size() != 2) throw Error(ErrorCode::DimensionMismatch, "quadratic theta has two entries");
    if (theta[1] == 0.0) throw Error(ErrorCode::DegenerateParameter, "theta1 must be nonzero");
    return {1.0, -theta[0] / theta[1]};
}

ObjectiveProblem make_quadratic_problem()
{
    ObjectiveProblem p;
    p.label = "quadratic";
    p.dim_x = 1;
    p.dim_theta = 2;
    p.evaluate = [](std::span<const double> x, std::span<const double> theta) {
        return quadratic_objective(x[0], theta);
    };
    p.box = Box::unbounded(1);
    p.x0 = {0.0};
    // d^2 f / dx dtheta = (1, x) at any x.
    p.analytic_cross_derivative = [](std::span<const double> x, std::span<const double>) {
        return Matrix(1, 2, {1.0, x[0]});
    };
    const ObjectiveProblem base = p;
    p.solver = [base](std::span<const double> theta) {
        if (!(theta[1] > 0.0)) {
            throw Error(ErrorCode::DegenerateParameter, "quadratic is unbounded below unless theta1 > 0");
        }
        return minimize(base, theta, base.x0);
    };
    return p;
}

}  // namespace etod::problems
