#pragma once

#include "etod/matrix.hpp"
#include "etod/rng.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace etod {

/// How an experiment budget is spread over design points (components,
/// candidate prices, or traced groups). Either fractional weights summing to
/// one, optionally paired with a budget, or integer counts.
class Allocation {
public:
    /// Points default to 0, 1, ..., k-1. Throws InvalidParameter unless the
    /// weights are nonnegative and sum to 1 within 1e-12 (relative to k).
    static Allocation fractional(Vector weights, Vector points = {}, std::size_t total = 0);
    static Allocation counts(std::vector<std::size_t> counts, Vector points = {});

    [[nodiscard]] bool integral() const noexcept { return integral_; }
    [[nodiscard]] std::size_t size() const noexcept { return weights_.size(); }
    [[nodiscard]] std::span<const double> weights() const noexcept { return weights_; }
    [[nodiscard]] std::span<const double> points() const noexcept { return points_; }
    /// Budget: sum of counts, or the budget attached to fractional weights (0 if none).
    [[nodiscard]] std::size_t total() const noexcept { return total_; }
    /// Integer counts; throws InvalidParameter for fractional allocations.
    [[nodiscard]] std::vector<std::size_t> counts() const;
    /// Sample sizes per point: counts, or weight * total for fractional weights.
    [[nodiscard]] Vector effective_counts() const;

    bool operator==(const Allocation&) const = default;

private:
    Vector weights_;
    Vector counts_;
    Vector points_;
    std::size_t total_ = 0;
    bool integral_ = false;
};

/// Covariance of theta_hat - theta as a function of the allocation.
struct CovarianceModel {
    enum class Kind {
        DiagonalMean,       ///< theta_i estimated by a mean of N_i draws with sd sigma_i
        LogisticMle,        ///< logistic conversion MLE; allocation points are prices
        LognormalGroupMean, ///< groups x groups contact matrix, column j traced M_j times
    };

    Kind kind = Kind::DiagonalMean;
    Vector sigma;            ///< DiagonalMean only
    std::size_t groups = 0;  ///< LognormalGroupMean only
    /// LognormalGroupMean: traces are Lognormal(log(theta) - s^2/2, s), s = trace_sigma.
    double trace_sigma = 1.0;

    static CovarianceModel diagonal_mean(Vector sigma);
    static CovarianceModel logistic_mle();
    static CovarianceModel lognormal_group_mean(std::size_t groups, double trace_sigma = 1.0);

    [[nodiscard]] std::size_t dim_theta() const noexcept;
};

/// c(x, theta) = 1 / (1 + exp(theta0 + theta1 x)), the conversion probability.
double logistic_conversion(double price, std::span<const double> theta);
/// c (1 - c), evaluated without cancellation.
double logistic_weight(double price, std::span<const double> theta);

/// X^T W X for rows (1, x_p) repeated count_p times, W = c(1-c).
Matrix logistic_information(std::span<const double> prices, std::span<const double> counts,
                            std::span<const double> theta);

/// Per-trace variance of Lognormal(log(theta) - s^2/2, s): (e^{s^2} - 1) theta^2,
/// which is (e - 1) theta^2 at the default s = 1.
double lognormal_trace_variance(double theta, double trace_sigma = 1.0);

/// Covariance of theta_hat - theta. Errors: ZeroCount when a count the model
/// divides by is zero, SingularInformation for a rank-deficient logistic design.
Matrix covariance(const CovarianceModel& model, const Allocation& alloc, std::span<const double> theta);

struct FitResult {
    Vector theta_hat;
    bool converged = false;
    std::size_t iterations = 0;
    Matrix info_matrix;  ///< X^T W X at theta_hat
};

/// Newton-Raphson with step halving on the logistic log-likelihood, where
/// conversions[i] == 1 means the customer bought at prices[i].
/// Errors: RankDeficient when fewer than two distinct prices appear;
/// SeparationDetected when a price threshold splits the outcomes (no finite
/// MLE) or when ||theta|| exceeds 50 during iteration.
FitResult fit_logistic_mle(std::span<const double> prices, std::span<const int> conversions);

/// One draw of theta_hat from the model's data-generating process. Data for
/// design point p come from stream.derive(p), so two allocations evaluated on
/// the same stream share their first min(count) observations at every point.
Vector simulate_estimate(const CovarianceModel& model, const Allocation& alloc,
                         std::span<const double> theta_true, const RngStream& stream);

}  // namespace etod
