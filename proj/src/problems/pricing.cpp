#include "etod/problems/pricing.hpp"

#include "etod/error.hpp"
#include "etod/estimation.hpp"

namespace etod::problems {

double pricing_objective(double price, std::span<const double> theta)
{
    return -price * logistic_conversion(price, theta);
}

Vector pricing_d(double price, std::span<const double> theta)
{
    const double c = logistic_conversion(price, theta);
    const double w = logistic_weight(price, theta);
    const double t1 = theta[1];
    return {w + t1 * price * w * (2.0 * c - 1.0),
            2.0 * price * w + price * price * t1 * w * (2.0 * c - 1.0)};
}

double pricing_gradient(double price, std::span<const double> theta)
{
    const double c = logistic_conversion(price, theta);
    return -c + theta[1] * price * logistic_weight(price, theta);
}

double pricing_curvature(double price, std::span<const double> theta)
{
    const double c = logistic_conversion(price, theta);
    return logistic_weight(price, theta) * (1.0 + theta[1] - theta[1] * theta[1] * price * (1.0 - 2.0 * c));
}

ObjectiveProblem make_pricing_problem(PricingOptions options)
{
    if (!(options.bracket_lo < options.bracket_hi)) {
        throw Error(ErrorCode::InvalidParameter, "pricing bracket must satisfy lo < hi");
    }
    ObjectiveProblem p;
    p.label = "pricing";
    p.dim_x = 1;
    p.dim_theta = 2;
    p.evaluate = [](std::span<const double> x, std::span<const double> theta) {
        return pricing_objective(x[0], theta);
    };
    p.box = Box::uniform(1, options.bracket_lo, options.bracket_hi);
    p.x0 = {0.5 * (options.bracket_lo + options.bracket_hi)};
    p.analytic_cross_derivative = [](std::span<const double> x, std::span<const double> theta) {
        const Vector d = pricing_d(x[0], theta);
        return Matrix(1, 2, d);
    };
    p.solver = [options](std::span<const double> theta) {
        const Vector th(theta.begin(), theta.end());
        auto g = [&th](double x) { return pricing_objective(x, th); };
        DecisionPoint pt;
        try {
            pt.x = {minimize_1d(g, options.bracket_lo, options.bracket_hi, 1e-8)};
            pt.converged = true;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoInteriorMinimum) throw;
            const double lo = g(options.bracket_lo), hi = g(options.bracket_hi);
            pt.x = {lo <= hi ? options.bracket_lo : options.bracket_hi};
            pt.converged = false;
        }
        pt.value = g(pt.x[0]);
        return pt;
    };
    return p;
}

}  // namespace etod::problems
