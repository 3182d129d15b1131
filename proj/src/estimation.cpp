#include "etod/estimation.hpp"

#include "etod/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <string>

namespace etod {

namespace {

Vector default_points(std::size_t k)
{
    Vector p(k);
    std::iota(p.begin(), p.end(), 0.0);
    return p;
}

/// log(1 + exp(eta)) without overflow.
double softplus(double eta) { return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta)); }

struct GroupedData {
    Vector prices;
    Vector trials;
    Vector successes;
};

double log_likelihood(const GroupedData& data, std::span<const double> theta)
{
    double ll = 0.0;
    for (std::size_t p = 0; p < data.prices.size(); ++p) {
        const double eta = theta[0] + theta[1] * data.prices[p];
        ll += (data.trials[p] - data.successes[p]) * eta - data.trials[p] * softplus(eta);
    }
    return ll;
}

Vector score(const GroupedData& data, std::span<const double> theta)
{
    Vector g(2, 0.0);
    for (std::size_t p = 0; p < data.prices.size(); ++p) {
        const double r = data.trials[p] * logistic_conversion(data.prices[p], theta) - data.successes[p];
        g[0] += r;
        g[1] += r * data.prices[p];
    }
    return g;
}

void check_separation(const GroupedData& data)
{
    double min_buy = std::numeric_limits<double>::infinity(), max_buy = -min_buy;
    double min_pass = min_buy, max_pass = -min_buy;
    for (std::size_t p = 0; p < data.prices.size(); ++p) {
        if (data.successes[p] > 0) {
            min_buy = std::min(min_buy, data.prices[p]);
            max_buy = std::max(max_buy, data.prices[p]);
        }
        if (data.trials[p] - data.successes[p] > 0) {
            min_pass = std::min(min_pass, data.prices[p]);
            max_pass = std::max(max_pass, data.prices[p]);
        }
    }
    if (!std::isfinite(min_buy) || !std::isfinite(min_pass)) {
        throw Error(ErrorCode::SeparationDetected, "all observations share one outcome");
    }
    if (max_buy <= min_pass || max_pass <= min_buy) {
        throw Error(ErrorCode::SeparationDetected, "a price threshold separates conversions");
    }
}

FitResult fit_grouped(const GroupedData& data)
{
    if (data.prices.size() < 2) throw Error(ErrorCode::RankDeficient, "logistic fit needs two distinct prices");
    check_separation(data);

    FitResult fit;
    fit.theta_hat = {0.0, 0.0};
    double ll = log_likelihood(data, fit.theta_hat);
    for (; fit.iterations < 100; ++fit.iterations) {
        const Vector g = score(data, fit.theta_hat);
        if (norm2(g) <= 1e-10) {
            fit.converged = true;
            break;
        }
        const Matrix info = logistic_information(data.prices, data.trials, fit.theta_hat);
        Matrix inv;
        try {
            inv = inverse(info);
        } catch (const Error&) {
            throw Error(ErrorCode::SeparationDetected, "information matrix collapsed during Newton iteration");
        }
        const Vector step = inv * std::span<const double>(g);
        double t = 1.0;
        Vector next(2);
        double ll_next = ll;
        for (int halving = 0; halving < 40; ++halving, t *= 0.5) {
            next = {fit.theta_hat[0] + t * step[0], fit.theta_hat[1] + t * step[1]};
            ll_next = log_likelihood(data, next);
            if (ll_next >= ll - 1e-12 * std::abs(ll)) break;
        }
        if (norm2(next) > 50.0) throw Error(ErrorCode::SeparationDetected, "||theta|| exceeded 50");
        if (next == fit.theta_hat) break;
        fit.theta_hat = next;
        ll = ll_next;
    }
    fit.info_matrix = logistic_information(data.prices, data.trials, fit.theta_hat);
    return fit;
}

}  // namespace

Allocation Allocation::fractional(Vector weights, Vector points, std::size_t total)
{
    if (weights.empty()) throw Error(ErrorCode::InvalidParameter, "allocation needs at least one design point");
    if (points.empty()) points = default_points(weights.size());
    if (points.size() != weights.size()) {
        throw Error(ErrorCode::DimensionMismatch, "allocation weights and design points differ in length");
    }
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorCode::InvalidParameter, "allocation weights must be >= 0");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12 * static_cast<double>(weights.size())) {
        throw Error(ErrorCode::InvalidParameter, "fractional weights must sum to 1");
    }
    Allocation a;
    a.weights_ = std::move(weights);
    a.points_ = std::move(points);
    a.total_ = total;
    a.integral_ = false;
    return a;
}

Allocation Allocation::counts(std::vector<std::size_t> counts, Vector points)
{
    if (counts.empty()) throw Error(ErrorCode::InvalidParameter, "allocation needs at least one design point");
    if (points.empty()) points = default_points(counts.size());
    if (points.size() != counts.size()) {
        throw Error(ErrorCode::DimensionMismatch, "allocation counts and design points differ in length");
    }
    Allocation a;
    a.counts_.assign(counts.begin(), counts.end());
    a.points_ = std::move(points);
    a.total_ = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
    a.weights_.assign(counts.size(), 0.0);
    for (std::size_t i = 0; a.total_ > 0 && i < counts.size(); ++i) {
        a.weights_[i] = static_cast<double>(counts[i]) / static_cast<double>(a.total_);
    }
    a.integral_ = true;
    return a;
}

std::vector<std::size_t> Allocation::counts() const
{
    if (!integral_) throw Error(ErrorCode::InvalidParameter, "allocation is fractional");
    std::vector<std::size_t> c(counts_.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = static_cast<std::size_t>(counts_[i]);
    return c;
}

Vector Allocation::effective_counts() const
{
    if (integral_) return counts_;
    Vector c(weights_);
    for (double& v : c) v *= static_cast<double>(total_);
    return c;
}

CovarianceModel CovarianceModel::diagonal_mean(Vector sigma)
{
    for (double s : sigma)
        if (!(s >= 0.0)) throw Error(ErrorCode::InvalidParameter, "sigma entries must be >= 0");
    CovarianceModel m;
    m.kind = Kind::DiagonalMean;
    m.sigma = std::move(sigma);
    return m;
}

CovarianceModel CovarianceModel::logistic_mle()
{
    CovarianceModel m;
    m.kind = Kind::LogisticMle;
    return m;
}

CovarianceModel CovarianceModel::lognormal_group_mean(std::size_t groups, double trace_sigma)
{
    if (groups == 0) throw Error(ErrorCode::InvalidParameter, "need at least one group");
    if (!(trace_sigma >= 0.0)) throw Error(ErrorCode::InvalidParameter, "trace sigma must be >= 0");
    CovarianceModel m;
    m.kind = Kind::LognormalGroupMean;
    m.groups = groups;
    m.trace_sigma = trace_sigma;
    return m;
}

std::size_t CovarianceModel::dim_theta() const noexcept
{
    switch (kind) {
    case Kind::DiagonalMean: return sigma.size();
    case Kind::LogisticMle: return 2;
    case Kind::LognormalGroupMean: return groups * groups;
    }
    return 0;
}

double logistic_conversion(double price, std::span<const double> theta)
{
    return 1.0 / (1.0 + std::exp(theta[0] + theta[1] * price));
}

double logistic_weight(double price, std::span<const double> theta)
{
    const double eta = theta[0] + theta[1] * price;
    const double c = 1.0 / (1.0 + std::exp(eta));
    const double one_minus_c = 1.0 / (1.0 + std::exp(-eta));
    return c * one_minus_c;
}

Matrix logistic_information(std::span<const double> prices, std::span<const double> counts,
                            std::span<const double> theta)
{
    if (prices.size() != counts.size()) throw Error(ErrorCode::DimensionMismatch, "prices and counts differ");
    Matrix info(2, 2);
    for (std::size_t p = 0; p < prices.size(); ++p) {
        const double w = counts[p] * logistic_weight(prices[p], theta);
        info(0, 0) += w;
        info(0, 1) += w * prices[p];
        info(1, 1) += w * prices[p] * prices[p];
    }
    info(1, 0) = info(0, 1);
    return info;
}

double lognormal_trace_variance(double theta, double trace_sigma)
{
    const double excess = trace_sigma == 1.0 ? std::numbers::e - 1.0 : std::expm1(trace_sigma * trace_sigma);
    return excess * theta * theta;
}

Matrix covariance(const CovarianceModel& model, const Allocation& alloc, std::span<const double> theta)
{
    const Vector n = alloc.effective_counts();
    switch (model.kind) {
    case CovarianceModel::Kind::DiagonalMean: {
        if (alloc.size() != model.sigma.size()) {
            throw Error(ErrorCode::DimensionMismatch, "diagonal model: allocation size differs from sigma");
        }
        Matrix cov(alloc.size(), alloc.size());
        for (std::size_t i = 0; i < alloc.size(); ++i) {
            const double var = model.sigma[i] * model.sigma[i];
            if (var == 0.0) continue;
            if (!(n[i] > 0.0)) throw Error(ErrorCode::ZeroCount, "component " + std::to_string(i) + " has no samples");
            cov(i, i) = var / n[i];
        }
        return cov;
    }
    case CovarianceModel::Kind::LogisticMle: {
        if (theta.size() != 2) throw Error(ErrorCode::DimensionMismatch, "logistic model expects two parameters");
        const Matrix info = logistic_information(alloc.points(), n, theta);
        const double det = info(0, 0) * info(1, 1) - info(0, 1) * info(1, 0);
        if (!(det > 1e-10 * info(0, 0) * info(1, 1)) || !(info(0, 0) > 0.0)) {
            throw Error(ErrorCode::SingularInformation, "X^T W X is singular for this allocation");
        }
        Matrix cov(2, 2);
        cov(0, 0) = info(1, 1) / det;
        cov(1, 1) = info(0, 0) / det;
        cov(0, 1) = cov(1, 0) = -info(0, 1) / det;
        return cov;
    }
    case CovarianceModel::Kind::LognormalGroupMean: {
        const std::size_t g = model.groups;
        if (alloc.size() != g) throw Error(ErrorCode::DimensionMismatch, "group model: allocation size differs");
        if (theta.size() != g * g) throw Error(ErrorCode::DimensionMismatch, "group model: theta must be groups^2");
        Matrix cov(g * g, g * g);
        for (std::size_t j = 0; j < g; ++j) {
            if (!(n[j] > 0.0)) throw Error(ErrorCode::ZeroCount, "group " + std::to_string(j) + " has no traces");
            for (std::size_t k = 0; k < g; ++k) {
                const std::size_t idx = k * g + j;
                cov(idx, idx) = lognormal_trace_variance(theta[idx], model.trace_sigma) / n[j];
            }
        }
        return cov;
    }
    }
    throw Error(ErrorCode::InvalidParameter, "unknown covariance model");
}

FitResult fit_logistic_mle(std::span<const double> prices, std::span<const int> conversions)
{
    if (prices.size() != conversions.size()) throw Error(ErrorCode::DimensionMismatch, "prices and conversions differ");
    if (prices.size() < 2) throw Error(ErrorCode::RankDeficient, "logistic fit needs at least two observations");
    std::map<double, std::pair<double, double>> grouped;
    for (std::size_t i = 0; i < prices.size(); ++i) {
        if (conversions[i] != 0 && conversions[i] != 1) {
            throw Error(ErrorCode::InvalidParameter, "conversions must be 0 or 1");
        }
        auto& [trials, successes] = grouped[prices[i]];
        trials += 1.0;
        successes += conversions[i];
    }
    GroupedData data;
    for (const auto& [price, ts] : grouped) {
        data.prices.push_back(price);
        data.trials.push_back(ts.first);
        data.successes.push_back(ts.second);
    }
    return fit_grouped(data);
}

Vector simulate_estimate(const CovarianceModel& model, const Allocation& alloc,
                         std::span<const double> theta_true, const RngStream& stream)
{
    const std::vector<std::size_t> n = alloc.counts();
    switch (model.kind) {
    case CovarianceModel::Kind::DiagonalMean: {
        if (n.size() != model.sigma.size() || theta_true.size() != n.size()) {
            throw Error(ErrorCode::DimensionMismatch, "diagonal model: sizes differ");
        }
        Vector est(n.size());
        for (std::size_t i = 0; i < n.size(); ++i) {
            if (n[i] == 0) throw Error(ErrorCode::ZeroCount, "component " + std::to_string(i) + " has no samples");
            RngStream s = stream.derive(i);
            double sum = 0.0;
            for (std::size_t r = 0; r < n[i]; ++r) sum += sample_normal(s, theta_true[i], model.sigma[i]);
            est[i] = sum / static_cast<double>(n[i]);
        }
        return est;
    }
    case CovarianceModel::Kind::LogisticMle: {
        if (theta_true.size() != 2) throw Error(ErrorCode::DimensionMismatch, "logistic model expects two parameters");
        GroupedData data;
        for (std::size_t p = 0; p < n.size(); ++p) {
            if (n[p] == 0) continue;
            const double price = alloc.points()[p];
            const double c = logistic_conversion(price, theta_true);
            RngStream s = stream.derive(p);
            double buys = 0.0;
            for (std::size_t r = 0; r < n[p]; ++r) buys += sample_bernoulli(s, c);
            data.prices.push_back(price);
            data.trials.push_back(static_cast<double>(n[p]));
            data.successes.push_back(buys);
        }
        return fit_grouped(data).theta_hat;
    }
    case CovarianceModel::Kind::LognormalGroupMean: {
        const std::size_t g = model.groups;
        if (n.size() != g || theta_true.size() != g * g) {
            throw Error(ErrorCode::DimensionMismatch, "group model: sizes differ");
        }
        Vector est(g * g, 0.0);
        const double s2 = model.trace_sigma * model.trace_sigma;
        for (std::size_t j = 0; j < g; ++j) {
            if (n[j] == 0) throw Error(ErrorCode::ZeroCount, "group " + std::to_string(j) + " has no traces");
            RngStream s = stream.derive(j);
            for (std::size_t trace = 0; trace < n[j]; ++trace) {
                for (std::size_t k = 0; k < g; ++k) {
                    const double mean = theta_true[k * g + j];
                    // A zero contact rate is degenerate at zero; still consume the draw.
                    const double y =
                        sample_lognormal(s, mean > 0.0 ? std::log(mean) - 0.5 * s2 : 0.0, model.trace_sigma);
                    est[k * g + j] += mean > 0.0 ? y : 0.0;
                }
            }
            for (std::size_t k = 0; k < g; ++k) est[k * g + j] /= static_cast<double>(n[j]);
        }
        return est;
    }
    }
    throw Error(ErrorCode::InvalidParameter, "unknown covariance model");
}

}  // namespace etod
