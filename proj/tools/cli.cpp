#include "cli.hpp"

#include "etod/design.hpp"
#include "etod/error.hpp"
#include "etod/harness.hpp"
#include "etod/problems/pricing.hpp"
#include "etod/problems/quadratic.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <unistd.h>

namespace etod::cli {

using nlohmann::json;

namespace {

// --- JSON field readers -----------------------------------------------------

double read_double(const json& j, const std::string& field)
{
    if (!j.is_number()) throw ConfigError(field, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(field, "must be finite");
    return v;
}

double read_positive(const json& j, const std::string& field)
{
    const double v = read_double(j, field);
    if (!(v > 0.0)) throw ConfigError(field, "must be positive");
    return v;
}

double read_nonnegative(const json& j, const std::string& field)
{
    const double v = read_double(j, field);
    if (v < 0.0) throw ConfigError(field, "must be nonnegative");
    return v;
}

std::size_t read_count(const json& j, const std::string& field)
{
    if (!j.is_number_integer() || j.get<std::int64_t>() < 0)
        throw ConfigError(field, "expected a nonnegative integer");
    return j.get<std::size_t>();
}

Vector read_vector(const json& j, const std::string& field, std::size_t expected = 0)
{
    if (!j.is_array()) throw ConfigError(field, "expected an array of numbers");
    Vector v;
    for (std::size_t i = 0; i < j.size(); ++i) v.push_back(read_double(j[i], field + "[" + std::to_string(i) + "]"));
    if (expected != 0 && v.size() != expected)
        throw ConfigError(field, "expected " + std::to_string(expected) + " entries, got " + std::to_string(v.size()));
    return v;
}

std::vector<std::size_t> read_counts(const json& j, const std::string& field)
{
    if (!j.is_array()) throw ConfigError(field, "expected an array of integers");
    std::vector<std::size_t> v;
    for (std::size_t i = 0; i < j.size(); ++i) v.push_back(read_count(j[i], field + "[" + std::to_string(i) + "]"));
    return v;
}

Matrix read_matrix(const json& j, const std::string& field, std::size_t rows, std::size_t cols)
{
    if (!j.is_array() || j.size() != rows)
        throw ConfigError(field, "expected " + std::to_string(rows) + " rows");
    std::vector<double> entries;
    for (std::size_t r = 0; r < rows; ++r) {
        const Vector row = read_vector(j[r], field + "[" + std::to_string(r) + "]", cols);
        entries.insert(entries.end(), row.begin(), row.end());
    }
    return Matrix(rows, cols, std::move(entries));
}

using FieldTable = std::map<std::string, std::function<void(const json&, const std::string&)>>;

void apply_fields(const json& obj, const FieldTable& table, const std::string& prefix)
{
    if (!obj.is_object()) throw ConfigError(prefix.empty() ? "config" : prefix, "expected a JSON object");
    for (const auto& [key, value] : obj.items()) {
        const std::string name = prefix.empty() ? key : prefix + "." + key;
        const auto it = table.find(key);
        if (it == table.end()) throw ConfigError(name, "unknown field");
        it->second(value, name);
    }
}

void check_budgets(const std::vector<std::size_t>& budgets, const std::string& field)
{
    if (budgets.size() < 2) throw ConfigError(field, "need at least two budgets");
    for (std::size_t i = 0; i < budgets.size(); ++i) {
        if (budgets[i] == 0) throw ConfigError(field, "budgets must be positive");
        if (i > 0 && budgets[i] <= budgets[i - 1]) throw ConfigError(field, "budgets must increase strictly");
    }
}

void check_covariance(const Matrix& cov, const std::string& field)
{
    if (max_abs_asymmetry(cov) > 1e-12) throw ConfigError(field, "must be symmetric");
    try {
        (void)cholesky(cov);
    } catch (const Error&) {
        throw ConfigError(field, "must be positive semidefinite");
    }
}

void validate(const ProblemConfig& c)
{
    if (c.replications < 2) throw ConfigError("replications", "need at least two");
    if (c.prior_draws < 1) throw ConfigError("prior_draws", "need at least one");
    check_budgets(c.budgets, "budgets");
    switch (c.kind) {
    case ProblemKind::Quadratic: {
        const auto& q = c.quadratic;
        if (!(q.prior_mean[1] > 0.0)) throw ConfigError("prior_mean", "theta1 must be positive");
        check_covariance(q.prior_covariance, "prior_covariance");
        for (double s : q.sigma)
            if (!(s > 0.0)) throw ConfigError("sigma", "entries must be positive");
        if (c.budget < 2 * q.min_per_point || c.budget < 2) throw ConfigError("budget", "too small for two components");
        if (c.budget <= 2 * q.split_margin) throw ConfigError("split_margin", "leaves no split to evaluate");
        if (!(q.bound.theta_star[1] > 0.0)) throw ConfigError("bound.theta_star", "theta1 must be positive");
        if (q.bound.rho > q.bound.beta1) throw ConfigError("bound.rho", "must not exceed beta1");
        if (q.bound.draws < 1) throw ConfigError("bound.draws", "need at least one");
        break;
    }
    case ProblemKind::Pricing: {
        const auto& p = c.pricing;
        check_covariance(p.prior_covariance, "prior_covariance");
        if (p.prices.size() < 2) throw ConfigError("prices", "need at least two candidate prices");
        for (double x : p.prices)
            if (x < 0.0 || x > p.price_upper) throw ConfigError("prices", "must lie in [0, price_upper]");
        if (c.budget < 2) throw ConfigError("budget", "need at least two customers");
        if (p.candidates < 1) throw ConfigError("candidates", "need at least one");
        break;
    }
    case ProblemKind::Pandemic: {
        const auto& s = c.pandemic.sir;
        try {
            s.validate();
        } catch (const Error& e) {
            throw ConfigError("sir", e.what());
        }
        if (!(s.gamma + s.test_capacity / *std::min_element(s.group_size.begin(), s.group_size.end()) <= 1.0))
            throw ConfigError("test_capacity", "gamma + capacity / group_size must not exceed 1");
        if (c.budget < problems::SirParams::kGroups) throw ConfigError("budget", "need one trace per group");
        for (std::size_t b : c.budgets)
            if (b < problems::SirParams::kGroups) throw ConfigError("budgets", "need one trace per group");
        if (c.pandemic.solver_grid < 1) throw ConfigError("solver_grid", "need at least one start");
        break;
    }
    }
}

// --- output helpers ---------------------------------------------------------

std::string join_counts(const std::vector<std::size_t>& v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + std::to_string(v[i]);
    return s;
}

json report_json(const std::string& name, const RegretReport& r, const Allocation* alloc)
{
    json j{{"allocation_name", name},
           {"mean_regret", r.mean_regret},
           {"ci_half_width", r.ci_half_width},
           {"replications", r.replications},
           {"discarded", r.discarded}};
    if (alloc) j["allocation"] = alloc->counts();
    if (!r.per_replication.empty()) j["per_replication"] = r.per_replication;
    return j;
}

struct Output {
    std::string text;
    void emit(const RunConfig& rc) const
    {
        if (rc.output_path.empty()) {
            std::fwrite(text.data(), 1, text.size(), stdout);
            std::fflush(stdout);
        } else {
            write_file_atomic(rc.output_path, text);
        }
    }
};

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// --- problem assembly -------------------------------------------------------

struct Setup {
    ObjectiveProblem problem;
    CovarianceModel model;
    Prior prior;
    Vector points;
};

Setup build_setup(const ProblemConfig& c)
{
    switch (c.kind) {
    case ProblemKind::Quadratic:
        return {problems::make_quadratic_problem(), CovarianceModel::diagonal_mean(c.quadratic.sigma),
                Prior::normal(c.quadratic.prior_mean, c.quadratic.prior_covariance), Vector{0.0, 1.0}};
    case ProblemKind::Pricing:
        return {problems::make_pricing_problem({0.0, c.pricing.price_upper}), CovarianceModel::logistic_mle(),
                Prior::normal(c.pricing.theta_star, c.pricing.prior_covariance), c.pricing.prices};
    case ProblemKind::Pandemic: {
        problems::PandemicSolverOptions opts;
        opts.grid = c.pandemic.solver_grid;
        return {problems::make_pandemic_problem(c.pandemic.sir, opts),
                CovarianceModel::lognormal_group_mean(problems::SirParams::kGroups, c.pandemic.trace_sigma),
                Prior::gamma(c.pandemic.sir.theta_vector()), Vector{0.0, 1.0, 2.0}};
    }
    }
    throw ConfigError("problem", "unsupported");
}

// Stream layout under the master seed.
constexpr std::uint64_t kDesignStream = 1;
constexpr std::uint64_t kSearchStream = 2;
constexpr std::uint64_t kEvalStream = 3;
constexpr std::uint64_t kCoinStream = 4;
constexpr std::uint64_t kBoundStream = 5;

struct Designer {
    const ProblemConfig& cfg;
    const Setup& setup;
    std::uint64_t seed;
    std::size_t threads;
    Vector sensitivities;  ///< pandemic only, filled lazily

    DesignObjective objective(std::size_t budget) const
    {
        FdConfig fd;
        if (cfg.kind == ProblemKind::Pandemic) fd.step_h = cfg.pandemic.fd_step;
        return DesignObjective(setup.problem, setup.model, setup.prior, cfg.prior_draws, RngStream(seed, kDesignStream),
                               setup.points, budget, fd, threads);
    }

    Allocation optimized(std::size_t budget, const DesignObjective* obj = nullptr)
    {
        switch (cfg.kind) {
        case ProblemKind::Quadratic: {
            const Vector d = problems::quadratic_d(cfg.quadratic.prior_mean);
            const Allocation w = c_optimal_allocation(d, cfg.quadratic.sigma);
            return round_allocation(w, budget, cfg.quadratic.min_per_point);
        }
        case ProblemKind::Pricing: {
            if (obj) return random_search(*obj, cfg.pricing.candidates, RngStream(seed, kSearchStream), threads);
            const DesignObjective local = objective(budget);
            return random_search(local, cfg.pricing.candidates, RngStream(seed, kSearchStream), threads);
        }
        case ProblemKind::Pandemic: {
            if (sensitivities.empty()) {
                if (obj) {
                    sensitivities = group_sensitivities(*obj);
                } else {
                    sensitivities = group_sensitivities(objective(budget));
                }
            }
            RngStream coin(seed, kCoinStream);
            return kkt_group_allocation(sensitivities, budget, coin);
        }
        }
        throw ConfigError("problem", "unsupported");
    }

    Allocation uniform(std::size_t budget) const
    {
        const std::size_t floor = cfg.kind == ProblemKind::Pricing ? 0
                                  : cfg.kind == ProblemKind::Quadratic ? cfg.quadratic.min_per_point
                                                                        : 1;
        return uniform_allocation(budget, setup.points, floor);
    }
};

HarnessOptions harness_options(const RunConfig& rc)
{
    HarnessOptions o;
    o.threads = rc.threads;
    o.keep_per_replication = rc.per_replication;
    return o;
}

std::string resolve_format(const RunConfig& rc, const char* fallback)
{
    const std::string f = rc.format.empty() ? fallback : rc.format;
    if (f != "csv" && f != "json") throw ConfigError("format", "must be csv or json");
    return f;
}

// --- commands ---------------------------------------------------------------

Output cmd_design(const RunConfig& rc, const ProblemConfig& c, const Setup& setup, std::ostream& log)
{
    Designer designer{c, setup, rc.seed, rc.threads, {}};
    const DesignObjective obj = designer.objective(c.budget);
    const Allocation best = designer.optimized(c.budget, &obj);
    const Allocation uni = designer.uniform(c.budget);
    const double value = bayesian_design_objective(obj, best);
    const double uni_value = bayesian_design_objective(obj, uni);
    log << "design: " << join_counts(best.counts()) << " objective " << format_double(value) << " (uniform "
        << join_counts(uni.counts()) << " objective " << format_double(uni_value) << ")\n";

    if (resolve_format(rc, "json") == "json") {
        json j{{"problem", to_string(c.kind)},
               {"budget", c.budget},
               {"points", setup.points},
               {"allocation", best.counts()},
               {"objective", value},
               {"uniform_allocation", uni.counts()},
               {"uniform_objective", uni_value},
               {"prior_draws", c.prior_draws},
               {"rejected_draws", obj.rejected_draws()}};
        if (c.kind == ProblemKind::Pandemic) j["sensitivities"] = designer.sensitivities;
        return {dump(j)};
    }
    std::string s = "point,count,uniform_count\n";
    const auto counts = best.counts();
    const auto ucounts = uni.counts();
    for (std::size_t i = 0; i < counts.size(); ++i)
        s += format_double(setup.points[i]) + "," + std::to_string(counts[i]) + "," + std::to_string(ucounts[i]) + "\n";
    return {s};
}

std::string reports_csv(const std::vector<NamedAllocation>& allocs, const std::vector<RegretReport>& reports,
                        bool per_replication)
{
    std::string s;
    if (per_replication) {
        s = "allocation_name,replication,regret\n";
        for (std::size_t a = 0; a < allocs.size(); ++a)
            for (std::size_t r = 0; r < reports[a].per_replication.size(); ++r)
                s += allocs[a].name + "," + std::to_string(r) + "," + format_double(reports[a].per_replication[r]) +
                     "\n";
        return s;
    }
    s = "allocation_name,mean_regret,ci_half_width,discarded,replications,allocation\n";
    for (std::size_t a = 0; a < allocs.size(); ++a)
        s += allocs[a].name + "," + format_double(reports[a].mean_regret) + "," +
             format_double(reports[a].ci_half_width) + "," + std::to_string(reports[a].discarded) + "," +
             std::to_string(reports[a].replications) + "," + join_counts(allocs[a].allocation.counts()) + "\n";
    return s;
}

Output emit_reports(const RunConfig& rc, const std::vector<NamedAllocation>& allocs,
                    const std::vector<RegretReport>& reports, std::ostream& log)
{
    for (std::size_t a = 0; a < allocs.size(); ++a)
        log << allocs[a].name << " [" << join_counts(allocs[a].allocation.counts())
            << "]: mean regret " << format_double(reports[a].mean_regret) << " +- "
            << format_double(reports[a].ci_half_width) << " (" << reports[a].discarded << " discarded)\n";
    if (resolve_format(rc, "csv") == "json") {
        json arr = json::array();
        for (std::size_t a = 0; a < allocs.size(); ++a) arr.push_back(report_json(allocs[a].name, reports[a], &allocs[a].allocation));
        return {dump(json{{"reports", arr}})};
    }
    return {reports_csv(allocs, reports, rc.per_replication)};
}

Output cmd_split_curve(const RunConfig& rc, const ProblemConfig& c, const Setup& setup, std::ostream& log)
{
    if (c.kind != ProblemKind::Quadratic) throw ConfigError("split-curve", "only available for the quadratic problem");
    Designer designer{c, setup, rc.seed, rc.threads, {}};
    const Allocation closed = designer.optimized(c.budget);
    std::vector<NamedAllocation> allocs;
    for (std::size_t n0 = c.quadratic.split_margin; n0 + c.quadratic.split_margin <= c.budget; ++n0)
        allocs.push_back({std::to_string(n0), Allocation::counts({n0, c.budget - n0})});
    const auto reports = compare_designs(setup.problem, setup.model, setup.prior, allocs, c.replications,
                                         RngStream(rc.seed, kEvalStream), harness_options(rc));
    std::size_t best = 0;
    for (std::size_t i = 1; i < reports.size(); ++i)
        if (reports[i].mean_regret < reports[best].mean_regret) best = i;
    log << "closed-form n0 " << closed.counts()[0] << ", empirical minimum at n0 " << allocs[best].name << "\n";

    if (resolve_format(rc, "csv") == "json") {
        json rows = json::array();
        for (std::size_t i = 0; i < allocs.size(); ++i) rows.push_back(report_json(allocs[i].name, reports[i], &allocs[i].allocation));
        return {dump(json{{"closed_form_allocation", closed.counts()}, {"splits", rows}})};
    }
    std::string s = "n0,n1,mean_regret,ci_half_width,discarded,closed_form\n";
    for (std::size_t i = 0; i < allocs.size(); ++i) {
        const auto counts = allocs[i].allocation.counts();
        s += std::to_string(counts[0]) + "," + std::to_string(counts[1]) + "," + format_double(reports[i].mean_regret) +
             "," + format_double(reports[i].ci_half_width) + "," + std::to_string(reports[i].discarded) + "," +
             (counts[0] == closed.counts()[0] ? "1" : "0") + "\n";
    }
    return {s};
}

Output cmd_evaluate(const RunConfig& rc, const ProblemConfig& c, const Setup& setup, std::ostream& log)
{
    if (rc.split_curve) return cmd_split_curve(rc, c, setup, log);
    Designer designer{c, setup, rc.seed, rc.threads, {}};
    std::vector<NamedAllocation> allocs{{"optimized", designer.optimized(c.budget)}};
    const RegretReport r = evaluate_regret(setup.problem, setup.model, allocs[0].allocation, setup.prior,
                                           c.replications, RngStream(rc.seed, kEvalStream), harness_options(rc));
    return emit_reports(rc, allocs, {r}, log);
}

Output cmd_compare(const RunConfig& rc, const ProblemConfig& c, const Setup& setup, std::ostream& log)
{
    Designer designer{c, setup, rc.seed, rc.threads, {}};
    std::vector<NamedAllocation> allocs{{"optimized", designer.optimized(c.budget)},
                                        {"uniform", designer.uniform(c.budget)}};
    const auto reports = compare_designs(setup.problem, setup.model, setup.prior, allocs, c.replications,
                                         RngStream(rc.seed, kEvalStream), harness_options(rc));
    return emit_reports(rc, allocs, reports, log);
}

Output cmd_sweep(const RunConfig& rc, const ProblemConfig& c, const Setup& setup, std::ostream& log)
{
    Designer designer{c, setup, rc.seed, rc.threads, {}};
    const SweepResult sweep = regret_vs_budget_sweep(
        setup.problem, setup.model, setup.prior, c.budgets, c.replications, RngStream(rc.seed, kEvalStream),
        [&](std::size_t b) { return designer.optimized(b); }, [&](std::size_t b) { return designer.uniform(b); },
        harness_options(rc));
    log << "loglog_slope " << format_double(sweep.loglog_slope) << "\n";

    if (resolve_format(rc, "csv") == "json") {
        json rows = json::array();
        for (std::size_t i = 0; i < sweep.axis.size(); ++i)
            rows.push_back({{"n", sweep.axis[i]},
                            {"optimized", report_json("optimized", sweep.optimized[i], &sweep.optimized_allocations[i])},
                            {"uniform", report_json("uniform", sweep.uniform[i], nullptr)}});
        return {dump(json{{"loglog_slope", sweep.loglog_slope}, {"points", rows}})};
    }
    std::string s = "n,optimized_regret,optimized_ci_half_width,uniform_regret,uniform_ci_half_width,optimized_allocation\n";
    for (std::size_t i = 0; i < sweep.axis.size(); ++i)
        s += std::to_string(sweep.axis[i]) + "," + format_double(sweep.optimized[i].mean_regret) + "," +
             format_double(sweep.optimized[i].ci_half_width) + "," + format_double(sweep.uniform[i].mean_regret) + "," +
             format_double(sweep.uniform[i].ci_half_width) + "," + join_counts(sweep.optimized_allocations[i].counts()) +
             "\n";
    return {s};
}

Output cmd_trajectories(const RunConfig& rc, const ProblemConfig& c, const Setup& setup, std::ostream& log)
{
    if (c.kind != ProblemKind::Pandemic) throw ConfigError("problem", "trajectories needs the pandemic problem");
    Designer designer{c, setup, rc.seed, rc.threads, {}};
    std::vector<NamedAllocation> allocs{{"optimized", designer.optimized(c.budget)},
                                        {"uniform", designer.uniform(c.budget)}};
    problems::PandemicSolverOptions opts;
    opts.grid = c.pandemic.solver_grid;
    const auto bands = trajectory_quantiles(c.pandemic.sir, allocs, setup.model, setup.prior, c.replications,
                                            RngStream(rc.seed, kEvalStream), harness_options(rc), opts);
    for (const auto& b : bands)
        log << b.name << ": median final cumulative infections " << format_double(b.q50.back()) << "\n";

    if (resolve_format(rc, "csv") == "json") {
        json arr = json::array();
        for (std::size_t a = 0; a < bands.size(); ++a)
            arr.push_back({{"allocation_name", bands[a].name},
                           {"allocation", allocs[a].allocation.counts()},
                           {"q25", bands[a].q25},
                           {"q50", bands[a].q50},
                           {"q75", bands[a].q75}});
        return {dump(json{{"bands", arr}})};
    }
    std::string s = "day,allocation_name,q25,q50,q75\n";
    for (const auto& b : bands)
        for (std::size_t d = 0; d < b.q50.size(); ++d)
            s += std::to_string(d) + "," + b.name + "," + format_double(b.q25[d]) + "," + format_double(b.q50[d]) + "," +
                 format_double(b.q75[d]) + "\n";
    return {s};
}

Output cmd_verify_bound(const RunConfig& rc, const ProblemConfig& c, const Setup& setup, std::ostream& log)
{
    if (c.kind != ProblemKind::Quadratic) throw ConfigError("problem", "verify-bound needs the quadratic problem");
    const BoundSettings& b = c.quadratic.bound;
    const SmoothnessConstants k{b.rho, b.beta1, b.beta2};
    k.validate();
    const std::size_t draws = rc.replications != 0 ? rc.replications : b.draws;
    const Prior noise = Prior::normal(b.theta_star, b.noise_variance * Matrix::identity(2));
    const RngStream base(rc.seed, kBoundStream);

    std::vector<BoundCheck> checks(draws);
    std::vector<Vector> hats(draws);
    for (std::size_t i = 0; i < draws; ++i) {
        RngStream s = base.derive(i);
        hats[i] = noise.sample(s);
        checks[i] = verify_regret_bound(setup.problem, k, b.theta_star, hats[i]);
    }
    std::size_t holds = 0;
    for (const auto& ch : checks) holds += ch.holds ? 1 : 0;
    log << "bound holds on " << holds << " of " << draws << " draws\n";

    if (resolve_format(rc, "csv") == "json") {
        json arr = json::array();
        for (std::size_t i = 0; i < draws; ++i)
            arr.push_back({{"theta_hat", hats[i]}, {"regret", checks[i].regret}, {"bound", checks[i].bound}, {"holds", checks[i].holds}});
        return {dump(json{{"draws", draws}, {"holds", holds}, {"checks", arr}})};
    }
    std::string s = "draw,theta0_hat,theta1_hat,regret,bound,holds\n";
    for (std::size_t i = 0; i < draws; ++i)
        s += std::to_string(i) + "," + format_double(hats[i][0]) + "," + format_double(hats[i][1]) + "," +
             format_double(checks[i].regret) + "," + format_double(checks[i].bound) + "," +
             (checks[i].holds ? "1" : "0") + "\n";
    return {s};
}

}  // namespace

// --- configuration ------------------------------------------------------------

ProblemConfig ProblemConfig::defaults(ProblemKind kind)
{
    ProblemConfig c;
    c.kind = kind;
    switch (kind) {
    case ProblemKind::Quadratic:
        c.budget = 100;
        c.budgets = {100, 400};
        c.prior_draws = 100;
        c.replications = 300;
        break;
    case ProblemKind::Pricing:
        c.budget = 100;
        c.budgets = {100, 300, 1000, 3000};
        c.prior_draws = 100;
        c.replications = 300;
        break;
    case ProblemKind::Pandemic:
        c.budget = 10;
        c.budgets = {10, 30, 100, 300};
        c.prior_draws = 1000;
        c.replications = 1000;
        break;
    }
    return c;
}

ProblemKind parse_problem_kind(const std::string& name)
{
    if (name == "quadratic") return ProblemKind::Quadratic;
    if (name == "pricing") return ProblemKind::Pricing;
    if (name == "pandemic") return ProblemKind::Pandemic;
    throw ConfigError("problem", "unknown problem '" + name + "' (quadratic, pricing, pandemic)");
}

std::string to_string(ProblemKind kind)
{
    switch (kind) {
    case ProblemKind::Quadratic: return "quadratic";
    case ProblemKind::Pricing: return "pricing";
    case ProblemKind::Pandemic: return "pandemic";
    }
    return "unknown";
}

ProblemConfig parse_config_text(const std::string& text, ProblemKind kind)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("config", std::string("not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config", "expected a JSON object");
    if (!doc.contains("schema_version")) throw ConfigError("schema_version", "missing");
    if (!doc["schema_version"].is_number_integer() || doc["schema_version"].get<std::int64_t>() != kSchemaVersion)
        throw ConfigError("schema_version", "unsupported (expected " + std::to_string(kSchemaVersion) + ")");

    ProblemConfig c = ProblemConfig::defaults(kind);
    FieldTable t;
    t["schema_version"] = [](const json&, const std::string&) {};
    t["problem"] = [&](const json& j, const std::string& f) {
        if (!j.is_string() || parse_problem_kind(j.get<std::string>()) != kind)
            throw ConfigError(f, "does not match --problem " + to_string(kind));
    };
    t["budget"] = [&](const json& j, const std::string& f) { c.budget = read_count(j, f); };
    t["budgets"] = [&](const json& j, const std::string& f) { c.budgets = read_counts(j, f); };
    t["prior_draws"] = [&](const json& j, const std::string& f) { c.prior_draws = read_count(j, f); };
    t["replications"] = [&](const json& j, const std::string& f) { c.replications = read_count(j, f); };

    switch (kind) {
    case ProblemKind::Quadratic: {
        auto& q = c.quadratic;
        t["prior_mean"] = [&](const json& j, const std::string& f) { q.prior_mean = read_vector(j, f, 2); };
        t["prior_covariance"] = [&](const json& j, const std::string& f) { q.prior_covariance = read_matrix(j, f, 2, 2); };
        t["sigma"] = [&](const json& j, const std::string& f) { q.sigma = read_vector(j, f, 2); };
        t["min_per_point"] = [&](const json& j, const std::string& f) { q.min_per_point = read_count(j, f); };
        t["split_margin"] = [&](const json& j, const std::string& f) { q.split_margin = read_count(j, f); };
        t["bound"] = [&](const json& j, const std::string& f) {
            FieldTable bt;
            auto& b = q.bound;
            bt["rho"] = [&](const json& v, const std::string& n) { b.rho = read_positive(v, n); };
            bt["beta1"] = [&](const json& v, const std::string& n) { b.beta1 = read_positive(v, n); };
            bt["beta2"] = [&](const json& v, const std::string& n) { b.beta2 = read_nonnegative(v, n); };
            bt["theta_star"] = [&](const json& v, const std::string& n) { b.theta_star = read_vector(v, n, 2); };
            bt["noise_variance"] = [&](const json& v, const std::string& n) { b.noise_variance = read_nonnegative(v, n); };
            bt["draws"] = [&](const json& v, const std::string& n) { b.draws = read_count(v, n); };
            apply_fields(j, bt, f);
        };
        break;
    }
    case ProblemKind::Pricing: {
        auto& p = c.pricing;
        t["theta_star"] = [&](const json& j, const std::string& f) { p.theta_star = read_vector(j, f, 2); };
        t["prior_covariance"] = [&](const json& j, const std::string& f) { p.prior_covariance = read_matrix(j, f, 2, 2); };
        t["prices"] = [&](const json& j, const std::string& f) { p.prices = read_vector(j, f); };
        t["candidates"] = [&](const json& j, const std::string& f) { p.candidates = read_count(j, f); };
        t["price_upper"] = [&](const json& j, const std::string& f) { p.price_upper = read_positive(j, f); };
        break;
    }
    case ProblemKind::Pandemic: {
        auto& p = c.pandemic;
        t["theta"] = [&](const json& j, const std::string& f) { p.sir.theta = read_matrix(j, f, 3, 3); };
        t["kappa"] = [&](const json& j, const std::string& f) { p.sir.kappa = read_nonnegative(j, f); };
        t["gamma"] = [&](const json& j, const std::string& f) { p.sir.gamma = read_nonnegative(j, f); };
        t["group_size"] = [&](const json& j, const std::string& f) { p.sir.group_size = read_vector(j, f, 3); };
        t["test_capacity"] = [&](const json& j, const std::string& f) { p.sir.test_capacity = read_nonnegative(j, f); };
        t["horizon"] = [&](const json& j, const std::string& f) { p.sir.horizon = read_count(j, f); };
        t["initial_infected"] = [&](const json& j, const std::string& f) { p.sir.initial_infected = read_vector(j, f, 3); };
        t["trace_sigma"] = [&](const json& j, const std::string& f) { p.trace_sigma = read_nonnegative(j, f); };
        t["solver_grid"] = [&](const json& j, const std::string& f) { p.solver_grid = read_count(j, f); };
        t["fd_step"] = [&](const json& j, const std::string& f) { p.fd_step = read_positive(j, f); };
        break;
    }
    }
    apply_fields(doc, t, "");
    return c;
}

ProblemConfig load_config_file(const std::string& path, ProblemKind kind)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), kind);
}

std::vector<std::size_t> parse_budget_list(const std::string& text)
{
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(item, &used);
        } catch (const std::exception&) {
            throw ConfigError("budgets", "'" + item + "' is not a count");
        }
        if (used != item.size() || v == 0 || item.find('-') != std::string::npos)
            throw ConfigError("budgets", "'" + item + "' is not a positive count");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

std::size_t threads_from_env()
{
    const char* raw = std::getenv("REGRET_DESIGN_THREADS");
    if (!raw || !*raw) return 0;
    const std::string s(raw);
    if (s.find_first_not_of("0123456789") != std::string::npos)
        throw ConfigError("REGRET_DESIGN_THREADS", "expected a nonnegative integer, got '" + s + "'");
    return static_cast<std::size_t>(std::stoull(s));
}

std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_file_atomic(const std::string& path, const std::string& content)
{
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::InvalidParameter, "cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            out.close();
            std::error_code ec;
            fs::remove(tmp, ec);
            throw Error(ErrorCode::InvalidParameter, "write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error(ErrorCode::InvalidParameter, "cannot rename onto " + path);
    }
}

int run(const RunConfig& rc, std::ostream& log)
{
    ProblemConfig c = rc.config_path.empty() ? ProblemConfig::defaults(rc.problem)
                                             : load_config_file(rc.config_path, rc.problem);
    if (rc.replications != 0) c.replications = rc.replications;
    if (rc.budget != 0) c.budget = rc.budget;
    if (!rc.budgets.empty()) c.budgets = rc.budgets;
    validate(c);
    if (!rc.format.empty()) (void)resolve_format(rc, "csv");
    if (rc.split_curve && rc.command != "evaluate") throw ConfigError("split-curve", "only valid with evaluate");

    const Setup setup = build_setup(c);
    Output out;
    if (rc.command == "design") out = cmd_design(rc, c, setup, log);
    else if (rc.command == "evaluate") out = cmd_evaluate(rc, c, setup, log);
    else if (rc.command == "compare") out = cmd_compare(rc, c, setup, log);
    else if (rc.command == "sweep") out = cmd_sweep(rc, c, setup, log);
    else if (rc.command == "trajectories") out = cmd_trajectories(rc, c, setup, log);
    else if (rc.command == "verify-bound") out = cmd_verify_bound(rc, c, setup, log);
    else throw ConfigError("command", "unknown command '" + rc.command + "'");
    out.emit(rc);
    return 0;
}

int main_entry(int argc, const char* const* argv, std::ostream& log, std::ostream& err)
{
    CLI::App app{"Regret-aware experimental design for estimate-then-optimize"};
    app.require_subcommand(1);
    RunConfig rc;
    std::string problem = "quadratic";
    std::string budgets;

    const char* commands[][2] = {
        {"design", "Optimize the experiment allocation"},
        {"evaluate", "Monte Carlo regret of the optimized allocation"},
        {"compare", "Optimized vs uniform allocation under common random numbers"},
        {"sweep", "Regret against budget"},
        {"trajectories", "Quartile bands of cumulative infections (pandemic)"},
        {"verify-bound", "Check the deterministic regret bound on random estimates (quadratic)"},
    };
    for (const auto& cmd : commands) {
        CLI::App* sub = app.add_subcommand(cmd[0], cmd[1]);
        sub->add_option("--problem", problem, "quadratic, pricing or pandemic");
        sub->add_option("--config", rc.config_path, "JSON problem configuration");
        sub->add_option("--seed", rc.seed, "master seed");
        sub->add_option("--replications", rc.replications, "Monte Carlo replications (or draws)");
        sub->add_option("--budget", rc.budget, "total samples, customers or traces");
        sub->add_option("--budgets", budgets, "comma-separated budgets for sweep");
        sub->add_option("--output", rc.output_path, "output file (stdout when omitted)");
        sub->add_option("--format", rc.format, "csv or json");
        sub->add_flag("--per-replication", rc.per_replication, "emit every replication's regret");
        if (std::string(cmd[0]) == "evaluate")
            sub->add_flag("--split-curve", rc.split_curve, "regret for every two-way split (quadratic)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        log << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        rc.command = app.get_subcommands().front()->get_name();
        rc.problem = parse_problem_kind(problem);
        if (!budgets.empty()) rc.budgets = parse_budget_list(budgets);
        rc.threads = threads_from_env();
        return run(rc, log);
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace etod::cli
