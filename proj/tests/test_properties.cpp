// Property suites with fixed seeds. Runs standalone and as acceptance criterion 8.
#include <doctest.h>

#include "etod/design.hpp"
#include "etod/harness.hpp"
#include "etod/problems/pandemic.hpp"
#include "etod/problems/pricing.hpp"
#include "etod/problems/quadratic.hpp"

#include <cmath>
#include <numeric>

using namespace etod;

namespace {

double c_objective(std::span<const double> d, std::span<const double> sigma, std::span<const double> w)
{
    double v = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double num = d[i] * d[i] * sigma[i] * sigma[i];
        if (num == 0.0) continue;
        v += num / w[i];
    }
    return v;
}

std::size_t total(const std::vector<std::size_t>& v) { return std::accumulate(v.begin(), v.end(), std::size_t{0}); }

}  // namespace

TEST_SUITE("allocation optimality")
{
    TEST_CASE("c-optimal weights beat a 999-point grid in two dimensions")
    {
        RngStream s(61, 0);
        for (int rep = 0; rep < 100; ++rep) {
            const Vector d{sample_normal(s, 0, 2), sample_normal(s, 0, 2)};
            const Vector sigma{0.1 + 3 * s.next_uniform(), 0.1 + 3 * s.next_uniform()};
            const Allocation a = c_optimal_allocation(d, sigma);
            const double best = c_objective(d, sigma, a.weights());
            for (int i = 1; i <= 999; ++i) {
                const Vector w{i / 1000.0, 1 - i / 1000.0};
                CHECK(best <= c_objective(d, sigma, w) * (1 + 1e-9));
            }
        }
    }

    TEST_CASE("c-optimal weights beat Dirichlet samples in higher dimensions")
    {
        RngStream s(62, 0);
        for (int rep = 0; rep < 100; ++rep) {
            const std::size_t k = 3 + rep % 5;
            Vector d(k), sigma(k);
            for (std::size_t i = 0; i < k; ++i) {
                d[i] = sample_normal(s, 0, 2);
                sigma[i] = 0.1 + 3 * s.next_uniform();
            }
            const double best = c_objective(d, sigma, c_optimal_allocation(d, sigma).weights());
            for (int t = 0; t < 10000; ++t) {
                Vector w(k);
                double sum = 0.0;
                for (double& x : w) sum += (x = sample_gamma(s, 1.0));
                for (double& x : w) x /= sum;
                REQUIRE(best <= c_objective(d, sigma, w) * (1 + 1e-9));
            }
        }
    }

    TEST_CASE("kkt allocation sums to the budget with every group traced")
    {
        RngStream s(63, 0);
        for (int rep = 0; rep < 10000; ++rep) {
            const std::size_t g = 3;
            Vector rho(g);
            for (double& r : rho) r = s.next_uniform() < 0.2 ? 0.0 : std::exp(sample_normal(s, 0, 3));
            if (rho[0] + rho[1] + rho[2] == 0.0) rho[1] = 1.0;
            const std::size_t c = 3 + sample_index(s, 300);
            const auto counts = kkt_group_allocation(rho, c, s).counts();
            REQUIRE(total(counts) == c);
            for (std::size_t m : counts) REQUIRE(m >= 1);
        }
    }

    TEST_CASE("kkt allocation is within one trace of the continuous optimum when unconstrained")
    {
        RngStream s(64, 0);
        for (int rep = 0; rep < 1000; ++rep) {
            const Vector rho{1 + s.next_uniform(), 1 + s.next_uniform(), 1 + s.next_uniform()};
            const std::size_t c = 30 + sample_index(s, 300);
            const auto counts = kkt_group_allocation(rho, c, s).counts();
            const double sum = rho[0] + rho[1] + rho[2];
            for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(counts[j] - c * rho[j] / sum) <= 2.0);
        }
    }
}

TEST_SUITE("rounding")
{
    TEST_CASE("largest-remainder rounding is exact and within one of the target")
    {
        RngStream s(65, 0);
        for (int rep = 0; rep < 5000; ++rep) {
            const std::size_t k = 1 + sample_index(s, 12);
            Vector w(k);
            double sum = 0.0;
            for (double& x : w) sum += (x = sample_gamma(s, 0.5));
            for (double& x : w) x /= sum;
            const std::size_t n = sample_index(s, 1000);
            const auto counts = round_allocation(Allocation::fractional(w), n, 0).counts();
            REQUIRE(total(counts) == n);
            for (std::size_t i = 0; i < k; ++i) REQUIRE(std::abs(static_cast<double>(counts[i]) - n * w[i]) < 1.0);
        }
    }

    TEST_CASE("floors are honoured and the sum stays exact")
    {
        RngStream s(66, 0);
        for (int rep = 0; rep < 5000; ++rep) {
            const std::size_t k = 1 + sample_index(s, 10);
            Vector w(k);
            double sum = 0.0;
            for (double& x : w) sum += (x = sample_gamma(s, 0.3));
            for (double& x : w) x /= sum;
            const std::size_t floor = sample_index(s, 4);
            const std::size_t n = floor * k + sample_index(s, 200);
            const auto counts = round_allocation(Allocation::fractional(w), n, floor).counts();
            REQUIRE(total(counts) == n);
            for (std::size_t c : counts) REQUIRE(c >= floor);
        }
    }
}

TEST_SUITE("SIR dynamics")
{
    TEST_CASE("conservation and monotone susceptibles under random parameters")
    {
        RngStream s(67, 0);
        const problems::SirParams base;
        for (int rep = 0; rep < 200; ++rep) {
            problems::SirParams sp = base;
            for (std::size_t k = 0; k < 3; ++k) sp.group_size[k] = 200 + 2000 * s.next_uniform();
            sp.kappa = 0.02 * s.next_uniform();
            sp.gamma = 0.05 + 0.3 * s.next_uniform();
            Vector theta(9);
            for (double& t : theta) t = sample_gamma(s, 5.0);
            const Vector y{s.next_uniform(), s.next_uniform()};
            const Vector x = problems::decode_testing_rates(sp, y);
            problems::SirState st = problems::SirState::initial(sp);
            double last = INFINITY;
            for (std::size_t t = 0; t < sp.horizon; ++t) {
                st = problems::sir_step(st, sp, theta, x);
                double sum_s = 0.0;
                for (std::size_t k = 0; k < 3; ++k) {
                    REQUIRE(std::abs(st.susceptible[k] + st.infected[k] + st.removed[k] - sp.group_size[k]) <=
                            1e-9 * sp.group_size[k]);
                    REQUIRE(st.susceptible[k] >= 0.0);
                    REQUIRE(st.infected[k] >= 0.0);
                    sum_s += st.susceptible[k];
                }
                REQUIRE(sum_s <= last);
                last = sum_s;
            }
        }
    }

    TEST_CASE("more testing never means more infections")
    {
        RngStream s(68, 0);
        const problems::SirParams sp;
        for (int rep = 0; rep < 20; ++rep) {
            Vector theta(9);
            for (std::size_t k = 0; k < 9; ++k) theta[k] = sample_gamma(s, sp.theta_vector()[k]);
            const Vector x{0.08 * s.next_uniform(), 0.08 * s.next_uniform(), 0.08 * s.next_uniform()};
            const double base = problems::cumulative_infections(sp, theta, x);
            for (std::size_t k = 0; k < 3; ++k) {
                Vector up = x;
                up[k] += 0.005;
                CHECK(problems::cumulative_infections(sp, theta, up) <= base + 1e-9);
            }
        }
    }
}

TEST_SUITE("determinism")
{
    TEST_CASE("random search is identical across thread counts")
    {
        const Vector prices{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
        const Prior prior = Prior::normal({-4, 1}, 0.01 * Matrix::identity(2));
        const DesignObjective one(problems::make_pricing_problem(), CovarianceModel::logistic_mle(), prior, 50,
                                  RngStream(69, 1), prices, 100, {}, 1);
        const DesignObjective four(problems::make_pricing_problem(), CovarianceModel::logistic_mle(), prior, 50,
                                   RngStream(69, 1), prices, 100, {}, 4);
        CHECK(random_search(one, 500, RngStream(69, 2), 1) == random_search(four, 500, RngStream(69, 2), 4));
    }

    TEST_CASE("harness reports are identical across thread counts")
    {
        const std::vector<NamedAllocation> allocs{{"a", Allocation::counts({22, 78})}, {"b", Allocation::counts({50, 50})}};
        HarnessOptions o1, o3;
        o1.keep_per_replication = o3.keep_per_replication = true;
        o3.threads = 3;
        const auto model = CovarianceModel::diagonal_mean({1.0, std::sqrt(3.0)});
        const Prior prior = Prior::normal({10, 5}, Matrix::identity(2));
        const auto a = compare_designs(problems::make_quadratic_problem(), model, prior, allocs, 300, RngStream(70, 0), o1);
        const auto b = compare_designs(problems::make_quadratic_problem(), model, prior, allocs, 300, RngStream(70, 0), o3);
        for (std::size_t i = 0; i < 2; ++i) {
            CHECK(a[i].per_replication == b[i].per_replication);
            CHECK(a[i].mean_regret == b[i].mean_regret);
            CHECK(a[i].ci_half_width == b[i].ci_half_width);
        }
    }

    TEST_CASE("pandemic design sensitivities are identical across thread counts")
    {
        const problems::SirParams sp;
        problems::PandemicSolverOptions fast;
        fast.grid = 2;
        const auto make = [&](std::size_t threads) {
            return DesignObjective(problems::make_pandemic_problem(sp, fast), CovarianceModel::lognormal_group_mean(3),
                                   Prior::gamma(sp.theta_vector()), 6, RngStream(71, 0), {0, 1, 2}, 10, {}, threads);
        };
        CHECK(group_sensitivities(make(1)) == group_sensitivities(make(3)));
    }

    TEST_CASE("seeded estimates are bit-reproducible")
    {
        const problems::SirParams sp;
        const auto model = CovarianceModel::lognormal_group_mean(3);
        const Allocation a = Allocation::counts({5, 4, 1}, {0, 1, 2});
        CHECK(simulate_estimate(model, a, sp.theta_vector(), RngStream(72, 5)) ==
              simulate_estimate(model, a, sp.theta_vector(), RngStream(72, 5)));
        CHECK(simulate_estimate(model, a, sp.theta_vector(), RngStream(72, 5)) !=
              simulate_estimate(model, a, sp.theta_vector(), RngStream(72, 6)));
    }
}
