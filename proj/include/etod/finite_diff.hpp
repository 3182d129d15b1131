#pragma once

#include "etod/matrix.hpp"

#include <cstddef>
#include <functional>
#include <span>

namespace etod {

/// f(x, theta): the structural objective evaluated at a decision and a parameter.
using ObjectiveFn = std::function<double(std::span<const double> x, std::span<const double> theta)>;

struct FdConfig {
    /// Absolute perturbation applied to both the decision and the parameter
    /// coordinate. 1e-6 reproduces the published setting exactly but loses
    /// digits to cancellation in the 4h^2 denominator.
    double step_h = 1e-4;

    void validate() const;
};

/// Four-point central stencil for d^2 f / dx_i dtheta_j:
///   [f(x+h,t+h) - f(x+h,t-h) - f(x-h,t+h) + f(x-h,t-h)] / 4h^2
double mixed_second_derivative(const ObjectiveFn& f, std::span<const double> x,
                               std::span<const double> theta, std::size_t i, std::size_t j,
                               const FdConfig& cfg = {});

/// rows = dim(x), cols = dim(theta).
Matrix cross_derivative_matrix(const ObjectiveFn& f, std::span<const double> x,
                               std::span<const double> theta, const FdConfig& cfg = {});

}  // namespace etod
