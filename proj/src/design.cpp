#include "etod/design.hpp"

#include "etod/eigen.hpp"
#include "etod/error.hpp"
#include "etod/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>

namespace etod {

BoundReport bound_terms(const Matrix& d, const Matrix& sigma, double n)
{
    if (!sigma.square() || d.cols() != sigma.rows()) {
        throw Error(ErrorCode::DimensionMismatch, "bound_terms: D columns must match Sigma");
    }
    if (!(n >= 1.0)) throw Error(ErrorCode::InvalidParameter, "bound_terms: n must be >= 1");
    const Matrix m = (1.0 / n) * (d * sigma * transpose(d));
    const double log_n = std::log(n);
    BoundReport r;
    r.trace_term = trace(m);
    // Tr[M^2] = ||M||_F^2 for symmetric M.
    const double fro = frobenius_norm(m);
    r.frobenius_term = 2.0 * std::sqrt(fro * fro * log_n);
    r.spectral_term = 2.0 * spectral_norm_symmetric(m) * log_n;
    r.total = r.trace_term + r.frobenius_term + r.spectral_term;
    return r;
}

DesignObjective::DesignObjective(ObjectiveProblem problem, CovarianceModel model, Prior prior,
                                 std::size_t prior_draws, const RngStream& stream, Vector design_points,
                                 std::size_t budget, FdConfig fd, std::size_t threads)
    : problem_(std::move(problem)), model_(std::move(model)), prior_(std::move(prior)),
      points_(std::move(design_points)), budget_(budget)
{
    if (prior_draws == 0) throw Error(ErrorCode::InvalidParameter, "design objective needs at least one prior draw");
    if (prior_.dim() != problem_.dim_theta || model_.dim_theta() != problem_.dim_theta) {
        throw Error(ErrorCode::DimensionMismatch, "prior, covariance model and problem disagree on dim(theta)");
    }
    fd.validate();

    draws_.resize(prior_draws);
    decisions_.resize(prior_draws);
    cross_.resize(prior_draws);
    std::vector<std::size_t> rejected(prior_draws, 0);
    const std::size_t budget_per_draw = 10 * prior_draws + 1;

    parallel_for(prior_draws, threads, [&](std::size_t r) {
        const RngStream base = stream.derive(r);
        for (std::size_t attempt = 0;; ++attempt) {
            if (attempt >= budget_per_draw) {
                throw Error(ErrorCode::InvalidParameter, "prior draws keep failing the inner solve");
            }
            RngStream s = base.derive(attempt);
            Vector theta = prior_.sample(s);
            try {
                DecisionPoint x = solve_decision(problem_, theta);
                cross_[r] = cross_derivative(problem_, x.x, theta, fd);
                decisions_[r] = std::move(x.x);
                draws_[r] = std::move(theta);
                return;
            } catch (const Error&) {
                ++rejected[r];
            }
        }
    });
    rejected_ = std::accumulate(rejected.begin(), rejected.end(), std::size_t{0});
    if (rejected_ > 10 * prior_draws) {
        throw Error(ErrorCode::InvalidParameter, "more than 10x prior draws were rejected");
    }
}

double bayesian_design_objective(const DesignObjective& obj, const Allocation& alloc)
{
    double sum = 0.0;
    for (std::size_t r = 0; r < obj.draws().size(); ++r) {
        const Matrix cov = covariance(obj.model(), alloc, obj.draws()[r]);
        const Matrix& d = obj.cross_derivatives()[r];
        sum += trace(d * cov * transpose(d));
    }
    return sum / static_cast<double>(obj.draws().size());
}

Allocation c_optimal_allocation(std::span<const double> d, std::span<const double> sigma)
{
    if (d.size() != sigma.size() || d.empty()) throw Error(ErrorCode::DimensionMismatch, "c_optimal: d and sigma differ");
    Vector w(d.size());
    double total = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (!(sigma[i] > 0.0)) throw Error(ErrorCode::InvalidParameter, "c_optimal: sigma entries must be positive");
        w[i] = std::abs(d[i]) * sigma[i];
        total += w[i];
    }
    if (!(total > 0.0)) throw Error(ErrorCode::DegenerateDirection, "every |d_i| sigma_i is zero");
    for (double& v : w) v /= total;
    // Renormalize so the weights pass the exact-sum check after division.
    const double s = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& v : w) v /= s;
    return Allocation::fractional(std::move(w));
}

namespace {

std::size_t largest_index(const std::vector<std::size_t>& counts, std::size_t floor)
{
    std::size_t best = counts.size();
    for (std::size_t j = 0; j < counts.size(); ++j)
        if (counts[j] > floor && (best == counts.size() || counts[j] > counts[best])) best = j;
    return best;
}

}  // namespace

Allocation round_allocation(const Allocation& fractional, std::size_t total, std::size_t min_per_point)
{
    if (fractional.integral()) throw Error(ErrorCode::InvalidParameter, "round_allocation expects fractional weights");
    const std::size_t k = fractional.size();
    if (total < min_per_point * k) {
        throw Error(ErrorCode::InfeasibleFloor, "budget " + std::to_string(total) + " cannot give every point " +
                                                    std::to_string(min_per_point));
    }
    std::vector<std::size_t> counts(k);
    std::vector<double> remainder(k);
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const double raw = static_cast<double>(total) * fractional.weights()[i];
        counts[i] = static_cast<std::size_t>(std::floor(raw));
        remainder[i] = raw - std::floor(raw);
        assigned += counts[i];
    }
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t r = 0; assigned < total; ++r, ++assigned) ++counts[order[r % k]];

    for (std::size_t i = 0; i < k; ++i) {
        while (counts[i] < min_per_point) {
            const std::size_t donor = largest_index(counts, min_per_point);
            --counts[donor];
            ++counts[i];
        }
    }
    return Allocation::counts(std::move(counts), Vector(fractional.points().begin(), fractional.points().end()));
}

Allocation uniform_allocation(std::size_t total, Vector points, std::size_t min_per_point)
{
    if (points.empty()) throw Error(ErrorCode::InvalidParameter, "uniform allocation needs design points");
    const std::size_t k = points.size();
    return round_allocation(Allocation::fractional(Vector(k, 1.0 / static_cast<double>(k)), std::move(points)), total,
                            min_per_point);
}

Allocation kkt_group_allocation(std::span<const double> rho, std::size_t total, RngStream& stream)
{
    const std::size_t g = rho.size();
    if (g == 0) throw Error(ErrorCode::InvalidParameter, "kkt allocation needs at least one group");
    double sum = 0.0;
    for (double r : rho) {
        if (!(r >= 0.0) || !std::isfinite(r)) throw Error(ErrorCode::InvalidParameter, "group sensitivities must be >= 0");
        sum += r;
    }
    if (!(sum > 0.0)) throw Error(ErrorCode::InvalidParameter, "group sensitivities sum to zero");
    if (total < g) throw Error(ErrorCode::BudgetTooSmall, "budget smaller than the number of groups");

    std::vector<long long> m(g, 0);
    long long used = 0;
    for (std::size_t i = 0; i + 1 < g; ++i) {
        m[i] = std::llround(static_cast<double>(total) * rho[i] / sum);
        used += m[i];
    }
    m[g - 1] = static_cast<long long>(total) - used;

    while (m[g - 1] < 1) {
        std::vector<std::size_t> donors;
        for (std::size_t i = 0; i + 1 < g; ++i)
            if (m[i] > 1) donors.push_back(i);
        const std::size_t pick = donors[sample_index(stream, donors.size())];
        --m[pick];
        ++m[g - 1];
    }

    std::vector<std::size_t> counts(m.begin(), m.end());
    for (std::size_t i = 0; i + 1 < g; ++i) {
        while (counts[i] < 1) {
            const std::size_t donor = largest_index(counts, 1);
            --counts[donor];
            ++counts[i];
        }
    }
    return Allocation::counts(std::move(counts));
}

std::vector<std::size_t> sample_composition(std::size_t total, std::size_t parts, RngStream& stream)
{
    if (parts == 0) throw Error(ErrorCode::InvalidParameter, "composition needs at least one part");
    // Stars and bars: choose parts-1 bar slots among total+parts-1 (Floyd's sampler).
    const std::size_t slots = total + parts - 1;
    const std::size_t bars = parts - 1;
    std::set<std::size_t> chosen;
    for (std::size_t j = slots - bars; j < slots; ++j) {
        const std::size_t t = sample_index(stream, j + 1);
        if (!chosen.insert(t).second) chosen.insert(j);
    }
    std::vector<std::size_t> counts;
    counts.reserve(parts);
    std::size_t prev = 0;
    for (std::size_t bar : chosen) {
        counts.push_back(bar - prev);
        prev = bar + 1;
    }
    counts.push_back(slots - prev);
    return counts;
}

Allocation random_search(const DesignObjective& obj, std::size_t n_candidates, const RngStream& stream,
                         std::size_t threads)
{
    if (n_candidates == 0) throw Error(ErrorCode::InvalidParameter, "random search needs at least one candidate");
    const std::size_t k = obj.design_points().size();
    if (k == 0) throw Error(ErrorCode::InvalidParameter, "random search needs design points");

    std::vector<std::vector<std::size_t>> candidates(n_candidates);
    std::vector<double> scores(n_candidates, std::numeric_limits<double>::infinity());
    parallel_for(n_candidates, threads, [&](std::size_t c) {
        RngStream s = stream.derive(c);
        candidates[c] = sample_composition(obj.budget(), k, s);
        try {
            scores[c] = bayesian_design_objective(obj, Allocation::counts(candidates[c], obj.design_points()));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::SingularInformation && e.code() != ErrorCode::ZeroCount) throw;
        }
    });

    std::size_t best = n_candidates;
    for (std::size_t c = 0; c < n_candidates; ++c)
        if (std::isfinite(scores[c]) && (best == n_candidates || scores[c] < scores[best])) best = c;
    if (best == n_candidates) throw Error(ErrorCode::NoFeasibleCandidate, "every candidate allocation was infeasible");
    return Allocation::counts(candidates[best], obj.design_points());
}

Vector group_sensitivity(const Matrix& d, std::span<const double> theta, std::size_t groups,
                         double trace_sigma)
{
    if (d.cols() != groups * groups || theta.size() != groups * groups) {
        throw Error(ErrorCode::DimensionMismatch, "group sensitivity: expected groups^2 parameters");
    }
    Vector rho(groups, 0.0);
    for (std::size_t j = 0; j < groups; ++j) {
        double s = 0.0;
        for (std::size_t l = 0; l < d.rows(); ++l)
            for (std::size_t k = 0; k < groups; ++k) {
                const std::size_t idx = k * groups + j;
                s += d(l, idx) * d(l, idx) * lognormal_trace_variance(theta[idx], trace_sigma);
            }
        rho[j] = std::sqrt(s);
    }
    return rho;
}

Vector group_sensitivities(const DesignObjective& obj)
{
    if (obj.model().kind != CovarianceModel::Kind::LognormalGroupMean) {
        throw Error(ErrorCode::InvalidParameter, "group sensitivities need the lognormal group model");
    }
    const std::size_t g = obj.model().groups;
    Vector mean_sq(g, 0.0);
    for (std::size_t r = 0; r < obj.draws().size(); ++r) {
        const Vector rho = group_sensitivity(obj.cross_derivatives()[r], obj.draws()[r], g, obj.model().trace_sigma);
        for (std::size_t j = 0; j < g; ++j) mean_sq[j] += rho[j] * rho[j];
    }
    for (double& v : mean_sq) v = std::sqrt(v / static_cast<double>(obj.draws().size()));
    return mean_sq;
}

}  // namespace etod
