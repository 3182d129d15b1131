#pragma once

#include "etod/estimation.hpp"
#include "etod/finite_diff.hpp"
#include "etod/matrix.hpp"
#include "etod/prior.hpp"
#include "etod/problem.hpp"
#include "etod/rng.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace etod {

/// Allocation-dependent terms of the high-probability regret bound for
/// M = D Sigma D^T / n. The 4 beta1 / rho^2 prefactor is left to the caller.
struct BoundReport {
    double trace_term = 0.0;     ///< Tr M
    double frobenius_term = 0.0; ///< 2 sqrt(Tr[M^2] log n)
    double spectral_term = 0.0;  ///< 2 ||M||_2 log n
    double total = 0.0;
};

/// n may be fractional; log n is zero at n = 1.
BoundReport bound_terms(const Matrix& d, const Matrix& sigma, double n);

/// Monte Carlo stand-in for E_{theta ~ prior}[Tr(D' Sigma D'^T)] with a fixed
/// set of prior draws. D' = d^2 f / dx dtheta at (x*(theta), theta) is cached per
/// draw, so scoring a candidate allocation costs one covariance per draw.
class DesignObjective {
public:
    /// A draw whose inner solve throws is rejected and redrawn; more than
    /// 10 * prior_draws rejections is an InvalidParameter error.
    DesignObjective(ObjectiveProblem problem, CovarianceModel model, Prior prior, std::size_t prior_draws,
                    const RngStream& stream, Vector design_points, std::size_t budget, FdConfig fd = {},
                    std::size_t threads = 1);

    [[nodiscard]] const ObjectiveProblem& problem() const noexcept { return problem_; }
    [[nodiscard]] const CovarianceModel& model() const noexcept { return model_; }
    [[nodiscard]] const Prior& prior() const noexcept { return prior_; }
    [[nodiscard]] const std::vector<Vector>& draws() const noexcept { return draws_; }
    [[nodiscard]] const std::vector<Vector>& decisions() const noexcept { return decisions_; }
    [[nodiscard]] const std::vector<Matrix>& cross_derivatives() const noexcept { return cross_; }
    [[nodiscard]] std::size_t rejected_draws() const noexcept { return rejected_; }
    [[nodiscard]] const Vector& design_points() const noexcept { return points_; }
    [[nodiscard]] std::size_t budget() const noexcept { return budget_; }

private:
    ObjectiveProblem problem_;
    CovarianceModel model_;
    Prior prior_;
    std::vector<Vector> draws_;
    std::vector<Vector> decisions_;
    std::vector<Matrix> cross_;
    std::size_t rejected_ = 0;
    Vector points_;
    std::size_t budget_ = 0;
};

double bayesian_design_objective(const DesignObjective& obj, const Allocation& alloc);

/// Weights proportional to |d_i| sigma_i (the C-optimal split for a diagonal
/// covariance). Throws DegenerateDirection when every |d_i| sigma_i is zero.
Allocation c_optimal_allocation(std::span<const double> d, std::span<const double> sigma);

/// Largest-remainder rounding of total * w_i (ties to the lower index), then
/// any count under min_per_point is raised by taking from the largest count.
Allocation round_allocation(const Allocation& fractional, std::size_t total, std::size_t min_per_point);

/// Equal split of total over the points, rounded as above.
Allocation uniform_allocation(std::size_t total, Vector points, std::size_t min_per_point = 0);

/// M_i = C rho_i / sum rho. All but the last group are rounded to nearest and
/// the last takes the remainder. A last count below one is lifted to one by
/// decrementing one of the other groups chosen uniformly with `stream`; any
/// other zero count is then lifted by taking from the largest group.
Allocation kkt_group_allocation(std::span<const double> rho, std::size_t total, RngStream& stream);

/// Uniform draw from the compositions of total into `parts` nonnegative parts.
std::vector<std::size_t> sample_composition(std::size_t total, std::size_t parts, RngStream& stream);

/// Best of n_candidates uniform compositions of obj.budget() over
/// obj.design_points(). Candidate c uses stream.derive(c); candidates with a
/// singular or zero-count covariance are skipped.
Allocation random_search(const DesignObjective& obj, std::size_t n_candidates, const RngStream& stream,
                         std::size_t threads = 1);

/// Group model only: rho_j = sqrt(mean over draws of
///   sum_l sum_k (D'_{l,(k,j)})^2 sigma^2_{kj}), sigma^2_{kj} the per-trace variance,
/// so that the design objective equals sum_j rho_j^2 / M_j.
Vector group_sensitivities(const DesignObjective& obj);

/// The same quantity for a single cross-derivative at one theta.
Vector group_sensitivity(const Matrix& d, std::span<const double> theta, std::size_t groups,
                         double trace_sigma = 1.0);

}  // namespace etod
