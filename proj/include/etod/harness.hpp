#pragma once

#include "etod/estimation.hpp"
#include "etod/prior.hpp"
#include "etod/problem.hpp"
#include "etod/problems/pandemic.hpp"
#include "etod/rng.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace etod {

struct RegretReport {
    double mean_regret = 0.0;
    double ci_half_width = 0.0;  ///< 1.96 s / sqrt(replications)
    std::size_t replications = 0; ///< replications that entered the mean
    std::size_t discarded = 0;
    Vector per_replication;       ///< filled when HarnessOptions::keep_per_replication
};

struct NamedAllocation {
    std::string name;
    Allocation allocation;
};

struct HarnessOptions {
    std::size_t threads = 1;  ///< 0 = one per hardware thread
    bool keep_per_replication = false;
    double max_discard_fraction = 0.2;
};

/// Mean and normal-approximation 95% half-width of a sample (n >= 2).
RegretReport summarize_regrets(std::span<const double> regrets, std::size_t discarded, bool keep = false);

/// Replication r works on stream.derive(r): theta* comes from derive(0) and
/// the experiment data from derive(1), so every allocation in a comparison
/// sees the same theta* and shares observations point by point. A replication
/// whose estimate cannot be formed or optimized for any allocation (MLE
/// separation, degenerate estimate) is dropped for all of them. Throws
/// TooManyDiscards past HarnessOptions::max_discard_fraction.
std::vector<RegretReport> compare_designs(const ObjectiveProblem& problem, const CovarianceModel& model,
                                          const Prior& prior, std::span<const NamedAllocation> allocations,
                                          std::size_t replications, const RngStream& stream,
                                          const HarnessOptions& options = {});

RegretReport evaluate_regret(const ObjectiveProblem& problem, const CovarianceModel& model, const Allocation& alloc,
                             const Prior& prior, std::size_t replications, const RngStream& stream,
                             const HarnessOptions& options = {});

using AllocationRule = std::function<Allocation(std::size_t budget)>;

struct SweepResult {
    std::vector<std::size_t> axis;
    std::vector<Allocation> optimized_allocations;
    std::vector<RegretReport> optimized;
    std::vector<RegretReport> uniform;
    double loglog_slope = 0.0;  ///< least-squares slope of log(optimized mean) on log(budget)
};

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

/// Every budget reuses `stream`, so the sweep is paired across budgets too.
SweepResult regret_vs_budget_sweep(const ObjectiveProblem& problem, const CovarianceModel& model,
                                   const Prior& prior, std::span<const std::size_t> budgets,
                                   std::size_t replications, const RngStream& stream,
                                   const AllocationRule& optimized, const AllocationRule& uniform,
                                   const HarnessOptions& options = {});

/// Linear-interpolation sample quantile (q in [0, 1]).
double sample_quantile(std::vector<double> values, double q);

struct QuantileBands {
    std::string name;
    Vector q25, q50, q75;  ///< per day, 0..horizon
};

/// For each prior draw: trace under every allocation, estimate theta, choose
/// testing from the estimate, and replay the epidemic under the true theta.
/// Emits per-day quartiles of cumulative infections.
std::vector<QuantileBands> trajectory_quantiles(const problems::SirParams& params,
                                                std::span<const NamedAllocation> allocations,
                                                const CovarianceModel& model, const Prior& prior,
                                                std::size_t draws, const RngStream& stream,
                                                const HarnessOptions& options = {},
                                                problems::PandemicSolverOptions solver = {});

}  // namespace etod
