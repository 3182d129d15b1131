#include "etod/finite_diff.hpp"

#include "etod/error.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace etod {

void FdConfig::validate() const
{
    if (!(step_h > 0.0) || !std::isfinite(step_h)) {
        throw Error(ErrorCode::InvalidParameter, "finite-difference step must be positive");
    }
}

double mixed_second_derivative(const ObjectiveFn& f, std::span<const double> x,
                               std::span<const double> theta, std::size_t i, std::size_t j,
                               const FdConfig& cfg)
{
    cfg.validate();
    if (i >= x.size() || j >= theta.size()) {
        throw Error(ErrorCode::DimensionMismatch, "mixed derivative index out of range");
    }
    const double h = cfg.step_h;
    std::vector<double> xs(x.begin(), x.end());
    std::vector<double> ts(theta.begin(), theta.end());

    auto eval = [&](double dx, double dt) {
        xs[i] = x[i] + dx;
        ts[j] = theta[j] + dt;
        const double v = f(xs, ts);
        if (!std::isfinite(v)) {
            throw Error(ErrorCode::NonFiniteEvaluation,
                        "stencil evaluation at (x" + std::to_string(i) + ", theta" + std::to_string(j) + ")");
        }
        return v;
    };
    const double fpp = eval(h, h);
    const double fpm = eval(h, -h);
    const double fmp = eval(-h, h);
    const double fmm = eval(-h, -h);
    return ((fpp - fpm) - (fmp - fmm)) / (4.0 * h * h);
}

Matrix cross_derivative_matrix(const ObjectiveFn& f, std::span<const double> x,
                               std::span<const double> theta, const FdConfig& cfg)
{
    Matrix d(x.size(), theta.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < theta.size(); ++j)
            d(i, j) = mixed_second_derivative(f, x, theta, i, j, cfg);
    return d;
}

}  // namespace etod
