#include <doctest.h>

#include "etod/error.hpp"
#include "etod/problem.hpp"
#include "etod/problems/pandemic.hpp"
#include "etod/problems/pricing.hpp"
#include "etod/problems/quadratic.hpp"
#include "etod/rng.hpp"

#include <cmath>

using namespace etod;

namespace {

template <typename Fn>
ErrorCode code_of(Fn&& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an etod::Error");
    return ErrorCode::InvalidParameter;
}

ObjectiveProblem boxed_pricing()
{
    ObjectiveProblem p;
    p.label = "pricing-lbfgs";
    p.dim_x = 1;
    p.dim_theta = 2;
    p.evaluate = [](std::span<const double> x, std::span<const double> t) { return problems::pricing_objective(x[0], t); };
    p.box = Box::uniform(1, 0.0, 50.0);
    p.x0 = {1.0};
    return p;
}

// Root of -c + t1 x c(1-c) by plain bisection on [lo, hi].
double bisect_pricing_root(std::span<const double> theta, double lo, double hi)
{
    auto g = [&](double x) { return problems::pricing_gradient(x, theta); };
    double glo = g(lo);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if ((gm < 0) == (glo < 0)) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("minimize finds the quadratic optimum")
{
    const ObjectiveProblem p = problems::make_quadratic_problem();
    const DecisionPoint dp = minimize(p, Vector{10, 5}, Vector{0.0});
    CHECK(dp.converged);
    CHECK(std::abs(dp.x[0] + 2.0) < 1e-8);
    CHECK(dp.value == doctest::Approx(problems::quadratic_objective(-2.0, Vector{10, 5})));
}

TEST_CASE("minimize matches -theta0/theta1 across theta1 >= 0.1")
{
    const ObjectiveProblem p = problems::make_quadratic_problem();
    RngStream s(21, 0);
    for (int i = 0; i < 100; ++i) {
        const Vector theta{sample_normal(s, 0.0, 5.0), 0.1 + 10.0 * s.next_uniform()};
        const DecisionPoint dp = minimize(p, theta, Vector{0.0});
        CHECK(std::abs(dp.x[0] + theta[0] / theta[1]) < 1e-8);
    }
}

TEST_CASE("box-constrained pricing solve agrees with a bisection root")
{
    const ObjectiveProblem p = boxed_pricing();
    const Vector theta{0, 1};
    const DecisionPoint dp = minimize(p, theta, Vector{1.0});
    const double root = bisect_pricing_root(theta, 0.1, 10.0);
    CHECK(std::abs(dp.x[0] - root) < 1e-6);
    CHECK(p.box.contains(dp.x));
}

TEST_CASE("minimize iterates never increase the objective")
{
    const ObjectiveProblem p = boxed_pricing();
    double last = INFINITY;
    std::size_t calls = 0;
    (void)minimize(p, Vector{-4, 1}, Vector{0.5}, 1e-8, 500, [&](const DecisionPoint& it) {
        CHECK(it.value <= last + 1e-15);
        last = it.value;
        ++calls;
    });
    CHECK(calls > 1);
}

TEST_CASE("minimize stays inside the box when the optimum is on a face")
{
    ObjectiveProblem p;
    p.label = "linear";
    p.dim_x = 2;
    p.dim_theta = 1;
    p.evaluate = [](std::span<const double> x, std::span<const double> t) {
        return t[0] * x[0] + (x[1] - 0.3) * (x[1] - 0.3);
    };
    p.box = Box::uniform(2, 0.0, 1.0);
    const DecisionPoint dp = minimize(p, Vector{1.0}, Vector{0.5, 0.5});
    CHECK(dp.x[0] == doctest::Approx(0.0));
    CHECK(dp.x[1] == doctest::Approx(0.3).epsilon(1e-6));
    CHECK(p.box.contains(dp.x));
}

TEST_CASE("minimize validates its inputs")
{
    const ObjectiveProblem p = boxed_pricing();
    CHECK(code_of([&] { (void)minimize(p, Vector{0, 1}, Vector{-1.0}); }) == ErrorCode::InvalidParameter);
    CHECK(code_of([&] { (void)minimize(p, Vector{0, 1}, Vector{1.0}, 0.0); }) == ErrorCode::InvalidParameter);
    CHECK(code_of([&] { (void)minimize(p, Vector{0, 1}, Vector{1.0, 2.0}); }) == ErrorCode::DimensionMismatch);
    ObjectiveProblem bad = p;
    bad.evaluate = [](std::span<const double>, std::span<const double>) { return NAN; };
    CHECK(code_of([&] { (void)minimize(bad, Vector{0, 1}, Vector{1.0}); }) == ErrorCode::NonFiniteEvaluation);
}

TEST_CASE("minimize_1d")
{
    CHECK(std::abs(minimize_1d([](double x) { return (x - 3) * (x - 3); }, 0.0, 10.0) - 3.0) < 1e-10);

    const Vector theta{-4, 1};
    const double x = minimize_1d([&](double p) { return problems::pricing_objective(p, theta); }, 0.0, 50.0);
    const double c = 1.0 / (1.0 + std::exp(theta[0] + theta[1] * x));
    CHECK(std::abs(c * theta[1] * x * (1 - c) - c) < 1e-8);

    CHECK(code_of([] { (void)minimize_1d([](double x) { return x; }, 0.0, 1.0); }) == ErrorCode::NoInteriorMinimum);
    CHECK(code_of([] { (void)minimize_1d([](double x) { return -x; }, 0.0, 1.0); }) == ErrorCode::NoInteriorMinimum);
    CHECK(code_of([] { (void)minimize_1d([](double x) { return x * x; }, 1.0, 1.0); }) == ErrorCode::InvalidParameter);
}

TEST_CASE("multi-start pandemic solve beats a 21 x 21 grid")
{
    const problems::SirParams params;
    const ObjectiveProblem p = problems::make_pandemic_problem(params);
    const Vector theta = params.theta_vector();
    const DecisionPoint dp = solve_decision(p, theta);
    REQUIRE(p.box.contains(dp.x));
    double best_grid = INFINITY;
    for (int i = 0; i <= 20; ++i)
        for (int j = 0; j <= 20; ++j) {
            const double v = problems::pandemic_objective(params, Vector{i / 20.0, j / 20.0});
            CHECK(dp.value <= v + 1e-9);
            best_grid = std::min(best_grid, v);
        }
    CHECK(dp.value <= best_grid);
}

TEST_CASE("FD gradient matches analytic gradients")
{
    RngStream s(22, 0);
    const ObjectiveProblem q = problems::make_quadratic_problem();
    const ObjectiveProblem pr = boxed_pricing();
    for (int i = 0; i < 100; ++i) {
        const Vector tq{sample_normal(s, 0.0, 5.0), 0.1 + 5.0 * s.next_uniform()};
        const double xq = sample_normal(s, 0.0, 3.0);
        const double gq = tq[1] * xq + tq[0];
        CHECK(std::abs(fd_gradient(q, Vector{xq}, tq)[0] - gq) <= 1e-6 * std::max(1.0, std::abs(gq)));

        const Vector tp{-8.0 * s.next_uniform(), 0.5 + 1.5 * s.next_uniform()};
        const double xp = 0.5 + 9.0 * s.next_uniform();
        const double gp = problems::pricing_gradient(xp, tp);
        CHECK(std::abs(fd_gradient(pr, Vector{xp}, tp)[0] - gp) <= 1e-6 * std::max(1.0, std::abs(gp)));
    }
}

TEST_CASE("smoothness constants are validated")
{
    CHECK_NOTHROW(SmoothnessConstants{2, 8, 0}.validate());
    CHECK(code_of([] { SmoothnessConstants{0, 8, 0}.validate(); }) == ErrorCode::InvalidParameter);
    CHECK(code_of([] { SmoothnessConstants{9, 8, 0}.validate(); }) == ErrorCode::InvalidParameter);
    CHECK(code_of([] { SmoothnessConstants{2, 8, -1}.validate(); }) == ErrorCode::InvalidParameter);
}

TEST_CASE("regret bound at the truth is zero")
{
    const ObjectiveProblem p = problems::make_quadratic_problem();
    const BoundCheck b = verify_regret_bound(p, {2, 8, 0}, Vector{10, 5}, Vector{10, 5});
    CHECK(std::abs(b.regret) < 1e-12);
    CHECK(b.bound == 0.0);
    CHECK(b.holds);
}

TEST_CASE("regret bound arithmetic on the quadratic")
{
    const ObjectiveProblem p = problems::make_quadratic_problem();
    const Vector star{10, 5}, hat{9.5, 5.5};
    const BoundCheck b = verify_regret_bound(p, {2, 8, 0}, star, hat);
    const double gap = hat[0] / hat[1] - star[0] / star[1];
    const double regret = star[1] / 2.0 * gap * gap;
    CHECK(b.regret == doctest::Approx(regret).epsilon(1e-9));
    // D = (1, -2), delta = (-0.5, 0.5): D delta = -1.5.
    const double bound = 4.0 * 8.0 / 4.0 * (1.5 * 1.5);
    CHECK(b.bound == doctest::Approx(bound).epsilon(1e-9));
    CHECK(b.holds);
}

TEST_CASE("regret bound holds on 1000 perturbed estimates")
{
    const ObjectiveProblem p = problems::make_quadratic_problem();
    RngStream s(23, 0);
    const Vector star{10, 5};
    for (int i = 0; i < 1000; ++i) {
        const Vector hat{sample_normal(s, 10.0, 0.1), sample_normal(s, 5.0, 0.1)};
        const BoundCheck b = verify_regret_bound(p, {2, 8, 0}, star, hat);
        CHECK(b.regret >= -1e-12);
        CHECK(b.holds);
    }
}
