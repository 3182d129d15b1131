#include "etod/harness.hpp"

#include "etod/error.hpp"
#include "etod/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

namespace etod {

namespace {

bool is_discard(ErrorCode code)
{
    return code == ErrorCode::SeparationDetected || code == ErrorCode::RankDeficient ||
           code == ErrorCode::DegenerateParameter || code == ErrorCode::NoInteriorMinimum;
}

struct TrueDraw {
    Vector theta;
    DecisionPoint best;
};

/// theta* for one replication, redrawn while the inner solve rejects it.
TrueDraw draw_truth(const ObjectiveProblem& problem, const Prior& prior, const RngStream& base)
{
    for (std::size_t attempt = 0; attempt < 1000; ++attempt) {
        RngStream s = base.derive(attempt);
        Vector theta = prior.sample(s);
        try {
            DecisionPoint best = solve_decision(problem, theta);
            return {std::move(theta), std::move(best)};
        } catch (const Error& e) {
            if (!is_discard(e.code())) throw;
        }
    }
    throw Error(ErrorCode::InvalidParameter, "prior keeps producing parameters the solver rejects");
}

}  // namespace

RegretReport summarize_regrets(std::span<const double> regrets, std::size_t discarded, bool keep)
{
    RegretReport r;
    r.replications = regrets.size();
    r.discarded = discarded;
    if (regrets.empty()) return r;
    double mean = 0.0;
    for (double v : regrets) mean += v;
    mean /= static_cast<double>(regrets.size());
    double ss = 0.0;
    for (double v : regrets) ss += (v - mean) * (v - mean);
    const double sd = regrets.size() > 1 ? std::sqrt(ss / static_cast<double>(regrets.size() - 1)) : 0.0;
    r.mean_regret = mean;
    r.ci_half_width = 1.96 * sd / std::sqrt(static_cast<double>(regrets.size()));
    if (keep) r.per_replication.assign(regrets.begin(), regrets.end());
    return r;
}

namespace {

std::vector<RegretReport> run_paired(const ObjectiveProblem& problem, const CovarianceModel& model, const Prior& prior,
                                     std::span<const NamedAllocation> allocations, std::size_t replications,
                                     const RngStream& stream, const HarnessOptions& options)
{
    if (replications < 2) throw Error(ErrorCode::InvalidParameter, "need at least two replications");
    if (prior.dim() != problem.dim_theta) throw Error(ErrorCode::DimensionMismatch, "prior and problem disagree");
    const std::size_t na = allocations.size();
    std::vector<std::vector<double>> regret(replications, std::vector<double>(na, 0.0));
    std::vector<char> dropped(replications, 0);

    parallel_for(replications, options.threads, [&](std::size_t r) {
        const RngStream base = stream.derive(r);
        const TrueDraw truth = draw_truth(problem, prior, base.derive(0));
        const double best_value = problem.evaluate(truth.best.x, truth.theta);
        const RngStream data = base.derive(1);
        for (std::size_t a = 0; a < na; ++a) {
            try {
                const Vector estimate = simulate_estimate(model, allocations[a].allocation, truth.theta, data);
                const DecisionPoint chosen = solve_decision(problem, estimate);
                regret[r][a] = problem.evaluate(chosen.x, truth.theta) - best_value;
            } catch (const Error& e) {
                if (!is_discard(e.code())) throw;
                dropped[r] = 1;
                return;
            }
        }
    });

    std::size_t discarded = 0;
    for (char d : dropped) discarded += d ? 1 : 0;
    if (static_cast<double>(discarded) > options.max_discard_fraction * static_cast<double>(replications)) {
        throw Error(ErrorCode::TooManyDiscards, std::to_string(discarded) + " of " + std::to_string(replications) +
                                                    " replications discarded");
    }
    std::vector<RegretReport> reports;
    reports.reserve(na);
    for (std::size_t a = 0; a < na; ++a) {
        std::vector<double> kept;
        kept.reserve(replications - discarded);
        for (std::size_t r = 0; r < replications; ++r)
            if (!dropped[r]) kept.push_back(regret[r][a]);
        reports.push_back(summarize_regrets(kept, discarded, options.keep_per_replication));
    }
    return reports;
}

}  // namespace

std::vector<RegretReport> compare_designs(const ObjectiveProblem& problem, const CovarianceModel& model,
                                          const Prior& prior, std::span<const NamedAllocation> allocations,
                                          std::size_t replications, const RngStream& stream,
                                          const HarnessOptions& options)
{
    if (allocations.size() < 2) throw Error(ErrorCode::InvalidParameter, "compare_designs needs two allocations");
    return run_paired(problem, model, prior, allocations, replications, stream, options);
}

RegretReport evaluate_regret(const ObjectiveProblem& problem, const CovarianceModel& model, const Allocation& alloc,
                             const Prior& prior, std::size_t replications, const RngStream& stream,
                             const HarnessOptions& options)
{
    const NamedAllocation single{"allocation", alloc};
    return run_paired(problem, model, prior, std::span<const NamedAllocation>(&single, 1), replications, stream,
                      options)
        .front();
}

double loglog_slope(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2) throw Error(ErrorCode::InvalidParameter, "slope needs two points");
    double mx = 0.0, my = 0.0;
    std::vector<double> lx(x.size()), ly(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw Error(ErrorCode::InvalidParameter, "log-log fit needs positive values");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
        mx += lx[i];
        my += ly[i];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    return sxy / sxx;
}

SweepResult regret_vs_budget_sweep(const ObjectiveProblem& problem, const CovarianceModel& model,
                                   const Prior& prior, std::span<const std::size_t> budgets,
                                   std::size_t replications, const RngStream& stream,
                                   const AllocationRule& optimized, const AllocationRule& uniform,
                                   const HarnessOptions& options)
{
    if (budgets.size() < 2) throw Error(ErrorCode::InvalidParameter, "a sweep needs at least two budgets");
    for (std::size_t i = 1; i < budgets.size(); ++i)
        if (budgets[i] <= budgets[i - 1]) throw Error(ErrorCode::InvalidParameter, "budgets must increase strictly");

    SweepResult out;
    out.axis.assign(budgets.begin(), budgets.end());
    std::vector<double> x, y;
    for (std::size_t budget : budgets) {
        std::vector<NamedAllocation> pair{{"optimized", optimized(budget)}, {"uniform", uniform(budget)}};
        const auto reports = compare_designs(problem, model, prior, pair, replications, stream, options);
        out.optimized_allocations.push_back(pair[0].allocation);
        out.optimized.push_back(reports[0]);
        out.uniform.push_back(reports[1]);
        x.push_back(static_cast<double>(budget));
        y.push_back(reports[0].mean_regret);
    }
    out.loglog_slope = loglog_slope(x, y);
    return out;
}

double sample_quantile(std::vector<double> values, double q)
{
    if (values.empty()) throw Error(ErrorCode::InvalidParameter, "quantile of an empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw Error(ErrorCode::InvalidParameter, "quantile level must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<QuantileBands> trajectory_quantiles(const problems::SirParams& params,
                                                std::span<const NamedAllocation> allocations,
                                                const CovarianceModel& model, const Prior& prior,
                                                std::size_t draws, const RngStream& stream,
                                                const HarnessOptions& options, problems::PandemicSolverOptions solver)
{
    if (draws < 4) throw Error(ErrorCode::InvalidParameter, "trajectory quantiles need at least four draws");
    const ObjectiveProblem problem = problems::make_pandemic_problem(params, solver);
    const std::size_t na = allocations.size();
    // paths[a][r] is the cumulative-infection path of draw r under allocation a.
    std::vector<std::vector<Vector>> paths(na, std::vector<Vector>(draws));

    parallel_for(draws, options.threads, [&](std::size_t r) {
        const RngStream base = stream.derive(r);
        RngStream prior_stream = base.derive(0);
        const Vector theta = prior.sample(prior_stream);
        const RngStream data = base.derive(1);
        for (std::size_t a = 0; a < na; ++a) {
            const Vector estimate = simulate_estimate(model, allocations[a].allocation, theta, data);
            const DecisionPoint chosen = solve_decision(problem, estimate);
            paths[a][r] = problems::cumulative_infection_path(params, theta,
                                                              problems::decode_testing_rates(params, chosen.x));
        }
    });

    std::vector<QuantileBands> bands;
    for (std::size_t a = 0; a < na; ++a) {
        QuantileBands b{allocations[a].name, {}, {}, {}};
        for (std::size_t day = 0; day <= params.horizon; ++day) {
            std::vector<double> column(draws);
            for (std::size_t r = 0; r < draws; ++r) column[r] = paths[a][r][day];
            b.q25.push_back(sample_quantile(column, 0.25));
            b.q50.push_back(sample_quantile(column, 0.50));
            b.q75.push_back(sample_quantile(column, 0.75));
        }
        bands.push_back(std::move(b));
    }
    return bands;
}

}  // namespace etod
