// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// Streams follow the CLI layout under master seed 0: design draws (0,1),
// random search (0,2), evaluation (0,3), KKT coin (0,4).
#include "etod/design.hpp"
#include "etod/error.hpp"
#include "etod/finite_diff.hpp"
#include "etod/harness.hpp"
#include "etod/problems/pandemic.hpp"
#include "etod/problems/pricing.hpp"
#include "etod/problems/quadratic.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>

using namespace etod;

namespace {

using Clock = std::chrono::steady_clock;

const Vector kPrices{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
const RngStream kDesign(0, 1);
const RngStream kSearch(0, 2);
const RngStream kEval(0, 3);

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, double limit_seconds, const std::function<Outcome()>& body)
{
    const auto start = Clock::now();
    Outcome out;
    try {
        out = body();
    } catch (const std::exception& e) {
        out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    if (secs > limit_seconds) {
        out.pass = false;
        out.detail += " (over the " + std::to_string(static_cast<int>(limit_seconds)) + " s budget)";
    }
    if (!out.pass) ++failures;
    std::printf("%s criterion %d: %s | %s | %.1f s\n", out.pass ? "PASS" : "FAIL", id, title, out.detail.c_str(), secs);
    std::fflush(stdout);
}

std::string fmt(const char* f, double a)
{
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string counts_str(const Allocation& a)
{
    std::string s = "[";
    for (std::size_t c : a.counts()) s += (s.size() > 1 ? "," : "") + std::to_string(c);
    return s + "]";
}

Matrix empirical_covariance(const std::function<Vector(std::size_t)>& draw, std::size_t reps)
{
    Vector mean;
    std::vector<Vector> all;
    all.reserve(reps);
    for (std::size_t r = 0; r < reps; ++r) all.push_back(draw(r));
    const std::size_t d = all.front().size();
    mean.assign(d, 0.0);
    for (const auto& v : all)
        for (std::size_t i = 0; i < d; ++i) mean[i] += v[i] / static_cast<double>(reps);
    Matrix c(d, d);
    for (const auto& v : all)
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) c(i, j) += (v[i] - mean[i]) * (v[j] - mean[j]);
    return (1.0 / static_cast<double>(reps - 1)) * c;
}

Outcome quadratic_closed_form()
{
    const ObjectiveProblem p = problems::make_quadratic_problem();
    const auto model = CovarianceModel::diagonal_mean({1.0, std::sqrt(3.0)});
    const Prior prior = Prior::normal({10, 5}, Matrix::identity(2));
    const std::size_t n = 100;
    const Allocation closed = round_allocation(c_optimal_allocation(problems::quadratic_d(prior.center()), model.sigma), n, 1);
    const std::size_t n0_closed = closed.counts()[0];

    std::vector<NamedAllocation> allocs;
    for (std::size_t n0 = 5; n0 <= 95; ++n0) allocs.push_back({std::to_string(n0), Allocation::counts({n0, n - n0})});
    const std::size_t uniform_index = 50 - 5;
    const auto reports = compare_designs(p, model, prior, allocs, 300, kEval);
    std::size_t best = 0;
    for (std::size_t i = 1; i < reports.size(); ++i)
        if (reports[i].mean_regret < reports[best].mean_regret) best = i;
    const std::size_t n0_best = best + 5;
    const double closed_regret = reports[n0_closed - 5].mean_regret;
    const double uniform_regret = reports[uniform_index].mean_regret;
    const bool near = (n0_best > n0_closed ? n0_best - n0_closed : n0_closed - n0_best) <= 10;
    return {near && closed_regret < uniform_regret,
            "closed-form n0=" + std::to_string(n0_closed) + ", empirical argmin n0=" + std::to_string(n0_best) +
                fmt(", closed %.4g", closed_regret) + fmt(" vs uniform %.4g", uniform_regret)};
}

Outcome deterministic_bound()
{
    const ObjectiveProblem p = problems::make_quadratic_problem();
    const SmoothnessConstants k{2.0, 8.0, 0.0};
    const Vector star{10, 5};
    const Prior noise = Prior::normal(star, 0.01 * Matrix::identity(2));
    const RngStream base(0, 5);
    std::size_t holds = 0, in_region = 0;
    double worst = 0.0;
    for (std::size_t i = 0; i < 1000; ++i) {
        RngStream s = base.derive(i);
        const Vector hat = noise.sample(s);
        if (hat[1] >= 2.0 && hat[1] <= 8.0) ++in_region;
        const BoundCheck b = verify_regret_bound(p, k, star, hat);
        holds += b.holds ? 1 : 0;
        if (b.bound > 0) worst = std::max(worst, b.regret / b.bound);
    }
    return {holds == 1000 && in_region == 1000,
            "holds on " + std::to_string(holds) + "/1000 draws" + fmt(", max regret/bound %.3g", worst)};
}

Outcome pricing_table()
{
    const ObjectiveProblem p = problems::make_pricing_problem();
    const auto model = CovarianceModel::logistic_mle();
    std::size_t wins = 0;
    double row4 = NAN;
    std::string rows;
    for (int t = 1; t <= 8; ++t) {
        const Prior prior = Prior::normal({-static_cast<double>(t), 1.0}, 0.01 * Matrix::identity(2));
        const DesignObjective obj(p, model, prior, 100, kDesign, kPrices, 100);
        const std::vector<NamedAllocation> allocs{{"optimized", random_search(obj, 1000, kSearch)},
                                                  {"uniform", uniform_allocation(100, kPrices)}};
        const auto r = compare_designs(p, model, prior, allocs, 300, kEval);
        if (r[0].mean_regret <= r[1].mean_regret) ++wins;
        if (t == 4) row4 = r[0].mean_regret;
        char buf[96];
        std::snprintf(buf, sizeof buf, " (-%d,1): %.2f vs %.2f;", t, 100 * r[0].mean_regret, 100 * r[1].mean_regret);
        rows += buf;
    }
    const bool magnitude = row4 >= 0.5e-2 && row4 <= 2.5e-2;
    return {wins >= 7 && magnitude,
            "optimized <= uniform in " + std::to_string(wins) + "/8 rows" + fmt(", (-4,1) optimized %.2fe-2", 100 * row4) +
                " |" + rows};
}

Outcome pricing_decay()
{
    const ObjectiveProblem p = problems::make_pricing_problem();
    const auto model = CovarianceModel::logistic_mle();
    const Prior prior = Prior::normal({-4, 1}, 0.01 * Matrix::identity(2));
    const std::vector<std::size_t> budgets{100, 300, 1000, 3000};
    const SweepResult s = regret_vs_budget_sweep(
        p, model, prior, budgets, 300, kEval,
        [&](std::size_t n) { return random_search(DesignObjective(p, model, prior, 100, kDesign, kPrices, n), 1000, kSearch); },
        [](std::size_t n) { return uniform_allocation(n, kPrices); });
    std::string pts;
    for (std::size_t i = 0; i < budgets.size(); ++i)
        pts += " n=" + std::to_string(budgets[i]) + fmt(": %.3g", s.optimized[i].mean_regret);
    return {s.loglog_slope >= -1.3 && s.loglog_slope <= -0.7, fmt("loglog slope %.3f |", s.loglog_slope) + pts};
}

Outcome pandemic_direction()
{
    bool ok = true;
    std::string detail;
    for (const double kappa : {1.0 / 105.0, 1.0 / 70.0}) {
        problems::SirParams sp;
        sp.kappa = kappa;
        const ObjectiveProblem p = problems::make_pandemic_problem(sp);
        const auto model = CovarianceModel::lognormal_group_mean(3);
        const Prior prior = Prior::gamma(sp.theta_vector());
        const DesignObjective obj(p, model, prior, 200, kDesign, {0, 1, 2}, 10);
        const Vector rho = group_sensitivities(obj);
        for (const std::size_t c : {10u, 30u}) {
            RngStream coin(0, 4);
            const Allocation opt = kkt_group_allocation(rho, c, coin);
            const Allocation uni = uniform_allocation(c, {0, 1, 2}, 1);
            const auto m = opt.counts();
            const bool shape = m[2] == 1 && m[0] >= m[1] && m[1] > m[2];
            const std::vector<NamedAllocation> allocs{{"optimized", opt}, {"uniform", uni}};
            const auto r = compare_designs(p, model, prior, allocs, 200, kEval);
            const bool better = r[0].mean_regret < r[1].mean_regret;
            ok = ok && shape && better;
            char buf[200];
            std::snprintf(buf, sizeof buf, " kappa=1/%.0f C=%zu %s %.1f+-%.1f vs %s %.1f+-%.1f%s;", 1.0 / kappa, c,
                          counts_str(opt).c_str(), r[0].mean_regret, r[0].ci_half_width, counts_str(uni).c_str(),
                          r[1].mean_regret, r[1].ci_half_width, shape ? "" : " (allocation shape violated)");
            detail += buf;
        }
    }
    return {ok, detail};
}

Outcome derivative_oracles()
{
    RngStream s(0, 6);
    const ObjectiveProblem q = problems::make_quadratic_problem();
    const ObjectiveProblem pr = problems::make_pricing_problem();
    double worst_q = 0.0, worst_p = 0.0;
    for (int i = 0; i < 100; ++i) {
        const Vector tq{sample_normal(s, 10, 3), 0.5 + 9.5 * s.next_uniform()};
        const Vector xq{-tq[0] / tq[1]};
        const Vector aq = problems::quadratic_d(tq);
        const Matrix fq = cross_derivative_matrix(q.evaluate, xq, tq);
        for (std::size_t j = 0; j < 2; ++j) worst_q = std::max(worst_q, std::abs(fq(0, j) - aq[j]) / norm2(aq));

        const Vector tp{-8.0 * s.next_uniform(), 0.5 + 1.5 * s.next_uniform()};
        const double xp = 0.5 + 9.0 * s.next_uniform();
        const Vector ap = problems::pricing_d(xp, tp);
        const Matrix fp = cross_derivative_matrix(pr.evaluate, Vector{xp}, tp);
        for (std::size_t j = 0; j < 2; ++j) worst_p = std::max(worst_p, std::abs(fp(0, j) - ap[j]) / norm2(ap));
    }
    double min_ratio = INFINITY, max_ratio = 0.0;
    const Vector theta{-4, 1};
    for (double x : {2.0, 3.0, 5.0}) {
        const Vector exact = problems::pricing_d(x, theta);
        for (std::size_t j = 0; j < 2; ++j) {
            const double e1 = std::abs(mixed_second_derivative(pr.evaluate, Vector{x}, theta, 0, j, {2e-2}) - exact[j]);
            const double e2 = std::abs(mixed_second_derivative(pr.evaluate, Vector{x}, theta, 0, j, {1e-2}) - exact[j]);
            min_ratio = std::min(min_ratio, e1 / e2);
            max_ratio = std::max(max_ratio, e1 / e2);
        }
    }
    const bool ok = worst_q <= 1e-5 && worst_p <= 1e-5 && min_ratio >= 3.5 && max_ratio <= 4.5;
    return {ok, fmt("max rel error quadratic %.2g", worst_q) + fmt(", pricing %.2g", worst_p) +
                    fmt(", halving-h error ratio in [%.3f", min_ratio) + fmt(", %.3f]", max_ratio)};
}

Outcome estimator_consistency()
{
    const auto rel = [](const Matrix& emp, const Matrix& model) { return frobenius_norm(emp - model) / frobenius_norm(model); };

    const auto diag = CovarianceModel::diagonal_mean({1.0, std::sqrt(3.0)});
    const Allocation da = Allocation::counts({50, 50});
    const Vector dt{10, 5};
    const RngStream b1(0, 7);
    const double e_diag = rel(empirical_covariance([&](std::size_t r) { return simulate_estimate(diag, da, dt, b1.derive(r)); },
                                                   100000),
                              covariance(diag, da, dt));

    const problems::SirParams sp;
    const auto logn = CovarianceModel::lognormal_group_mean(3);
    const Allocation la = Allocation::counts({5, 4, 1}, {0, 1, 2});
    const Vector lt = sp.theta_vector();
    const RngStream b2(0, 8);
    const double e_logn = rel(empirical_covariance([&](std::size_t r) { return simulate_estimate(logn, la, lt, b2.derive(r)); },
                                                   100000),
                              covariance(logn, la, lt));

    const auto logit = CovarianceModel::logistic_mle();
    const Allocation ga = Allocation::counts(std::vector<std::size_t>(10, 1000), kPrices);
    const Vector gt{-4, 1};
    const RngStream b3(0, 9);
    const double e_logit = rel(empirical_covariance([&](std::size_t r) { return simulate_estimate(logit, ga, gt, b3.derive(r)); },
                                                    4000),
                               covariance(logit, ga, gt));

    return {e_diag < 0.05 && e_logn < 0.05 && e_logit < 0.10,
            fmt("relative Frobenius error diagonal %.4f", e_diag) + fmt(", lognormal %.4f", e_logn) +
                fmt(", logistic (n=1e4) %.4f", e_logit)};
}

Outcome property_suites()
{
    const std::string cmd = std::string("\"") + ETOD_PROPERTIES_BIN + "\" --minimal > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return {status == 0, std::string("property binary exit status ") + std::to_string(status)};
}

}  // namespace

int main()
{
    criterion(1, "quadratic closed-form allocation is empirically optimal", 30, quadratic_closed_form);
    criterion(2, "deterministic regret bound on the quadratic", 5, deterministic_bound);
    criterion(3, "pricing optimized vs uniform over eight true parameters", 180, pricing_table);
    criterion(4, "pricing regret decays as 1/n", 240, pricing_decay);
    criterion(5, "pandemic optimized beats uniform", 180, pandemic_direction);
    criterion(6, "derivative oracles", 5, derivative_oracles);
    criterion(7, "estimator covariance consistency", 60, estimator_consistency);
    criterion(8, "property suites (standalone binary)", 300, property_suites);
    std::printf("%d of 8 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
