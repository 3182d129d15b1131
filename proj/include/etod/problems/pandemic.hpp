#pragma once

#include "etod/finite_diff.hpp"
#include "etod/matrix.hpp"
#include "etod/problem.hpp"

#include <cstddef>
#include <span>

namespace etod::problems {

/// Three-group SIR model with per-group testing. theta(k, j) is the number of
/// group-k people an infected member of group j contacts per day, and the
/// transmission matrix is beta = kappa * theta. Flattened parameter vectors
/// use row-major order, index k*3 + j.
struct SirParams {
    static constexpr std::size_t kGroups = 3;

    Matrix theta = Matrix(3, 3, {12, 10, 1, 10, 8, 1, 1, 1, 1});
    double kappa = 1.0 / 105.0;  ///< transmissibility per contact
    double gamma = 0.1;          ///< recovery rate, 1/day
    Vector group_size = {1000.0, 1000.0, 1000.0};
    double test_capacity = 100.0;  ///< tests per day across all groups
    std::size_t horizon = 100;     ///< days
    Vector initial_infected = {0.0, 1.0, 0.0};

    /// Throws InvalidParameter on negative entries, wrong shapes, or no seed infection.
    void validate() const;
    [[nodiscard]] Vector theta_vector() const;
};

struct SirState {
    Vector susceptible;
    Vector infected;
    Vector removed;
    /// Set once a step had to cap new infections at the susceptible count.
    bool clamped = false;

    static SirState initial(const SirParams& params);
};

/// One day of the discrete update:
///   S' = S - S o (beta I) / N,  I' = I + S o (beta I) / N - (gamma + x) o I,  R' = R + (gamma + x) o I
/// with beta built from `theta` (flattened). Throws UnstableStep when
/// gamma + x_k > 1.
SirState sir_step(const SirState& state, const SirParams& params, std::span<const double> theta,
                  std::span<const double> testing_rates);
SirState sir_step(const SirState& state, const SirParams& params, std::span<const double> testing_rates);

/// Map (y1, y2) to per-person testing rates: N1 x1 = y1 T, N2 x2 = y2 (1 - y1) T,
/// N3 x3 = (1 - y1)(1 - y2) T. The map is polynomial, so it extends past the
/// unit square for finite-difference stencils.
Vector decode_testing_rates(const SirParams& params, std::span<const double> y);

/// Sum_k (N_k - S_k[t]) for t = 0..horizon.
Vector cumulative_infection_path(const SirParams& params, std::span<const double> theta,
                                 std::span<const double> testing_rates);
/// Final-day value of the path above.
double cumulative_infections(const SirParams& params, std::span<const double> theta,
                             std::span<const double> testing_rates);

/// Cumulative infections after `horizon` days with testing split y in [0,1]^2
/// under params.theta. Throws InvalidParameter for y outside the unit square.
double pandemic_objective(const SirParams& params, std::span<const double> y);

struct PandemicSolverOptions {
    std::size_t grid = 5;  ///< multi-start grid is grid x grid over the unit square
    double tol = 1e-6;
    std::size_t max_iter = 200;
};

/// Decision y in [0,1]^2, parameter theta (9 entries). x*(theta) is the best
/// of the multi-start box-constrained runs.
ObjectiveProblem make_pandemic_problem(const SirParams& params, PandemicSolverOptions options = {});

/// Same objective in raw per-group testing rates (3 decision coordinates).
ObjectiveProblem make_pandemic_rate_problem(const SirParams& params);

/// Per-traced-group sensitivity rho_j with derivatives in y coordinates:
///   rho_j^2 = sum_l sum_k (d^2 f / dy_l dtheta_kj)^2 (e - 1) theta_kj^2
Vector pandemic_group_sensitivity(const SirParams& params, std::span<const double> theta,
                                  std::span<const double> y_star, const FdConfig& fd = {});

}  // namespace etod::problems
