#pragma once

#include "etod/finite_diff.hpp"
#include "etod/matrix.hpp"

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace etod {

/// Per-coordinate bounds on the decision; infinite entries mean unbounded.
struct Box {
    Vector lower;
    Vector upper;

    static Box unbounded(std::size_t n);
    static Box uniform(std::size_t n, double lo, double hi);

    [[nodiscard]] std::size_t size() const noexcept { return lower.size(); }
    [[nodiscard]] bool contains(std::span<const double> x, double tol = 1e-12) const;
    void project(std::span<double> x) const;
};

struct DecisionPoint {
    Vector x;
    double value = 0.0;
    bool converged = false;
    std::size_t iterations = 0;
};

/// The structural model f(x, theta) of an estimate-then-optimize problem.
/// Evaluators must be stateless so a problem can be shared across threads.
struct ObjectiveProblem {
    std::string label;
    std::size_t dim_x = 0;
    std::size_t dim_theta = 0;
    ObjectiveFn evaluate;
    Box box;
    /// Starting point for the generic solver.
    Vector x0;
    /// Optional closed-form d^2 f / dx dtheta (rows dim_x, cols dim_theta).
    std::function<Matrix(std::span<const double>, std::span<const double>)> analytic_cross_derivative;
    /// Optional problem-specific x*(theta); falls back to minimize() from x0.
    std::function<DecisionPoint(std::span<const double>)> solver;
};

/// Invoked after every accepted iterate.
using IterateObserver = std::function<void(const DecisionPoint&)>;

/// Box-constrained limited-memory quasi-Newton (memory 10) with gradient
/// projection and Armijo backtracking (c = 1e-4, halving). Gradients are
/// central finite differences, one-sided where a stencil would leave the box.
/// Converges when the projected-gradient norm is <= tol.
DecisionPoint minimize(const ObjectiveProblem& problem, std::span<const double> theta,
                       std::span<const double> x0, double tol = 1e-8, std::size_t max_iter = 500,
                       const IterateObserver& observer = {});

/// Golden-section search on [lo, hi] followed by a Newton polish on the FD
/// derivative; returns x with |g'(x)| <= tol. Throws NoInteriorMinimum when
/// the minimum sits on an endpoint.
double minimize_1d(const std::function<double(double)>& g, double lo, double hi, double tol = 1e-8);

/// x*(theta) via the problem's own solver, or minimize() from problem.x0.
DecisionPoint solve_decision(const ObjectiveProblem& problem, std::span<const double> theta);

/// Analytic cross-derivative when the problem registers one, FD otherwise.
Matrix cross_derivative(const ObjectiveProblem& problem, std::span<const double> x,
                        std::span<const double> theta, const FdConfig& cfg = {});

/// Central-difference gradient of f(., theta) at x, one-sided at box faces.
Vector fd_gradient(const ObjectiveProblem& problem, std::span<const double> x, std::span<const double> theta);

struct SmoothnessConstants {
    double rho = 1.0;   ///< strong-convexity modulus
    double beta1 = 1.0; ///< Hessian upper bound
    double beta2 = 0.0; ///< third-order mixed bound

    void validate() const;
};

struct BoundCheck {
    double regret = 0.0;
    double bound = 0.0;
    bool holds = false;
};

/// Checks f(x*(theta_hat), theta*) - f(x*(theta*), theta*) against
///   (4 beta1 / rho^2) (||D (theta_hat - theta*)||^2 + beta2^2/4 ||theta_hat - theta*||^4)
/// with D taken at (x*(theta*), theta*). The constants are trusted to hold on
/// the region the caller samples from; nothing here estimates them.
BoundCheck verify_regret_bound(const ObjectiveProblem& problem, const SmoothnessConstants& constants,
                               std::span<const double> theta_star, std::span<const double> theta_hat);

}  // namespace etod
