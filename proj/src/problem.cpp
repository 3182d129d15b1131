#include "etod/problem.hpp"

#include "etod/error.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

namespace etod {

Box Box::unbounded(std::size_t n)
{
    constexpr double inf = std::numeric_limits<double>::infinity();
    return Box{Vector(n, -inf), Vector(n, inf)};
}

Box Box::uniform(std::size_t n, double lo, double hi) { return Box{Vector(n, lo), Vector(n, hi)}; }

bool Box::contains(std::span<const double> x, double tol) const
{
    if (x.size() != lower.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] < lower[i] - tol || x[i] > upper[i] + tol) return false;
    return true;
}

void Box::project(std::span<double> x) const
{
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);
}

namespace {

double checked_eval(const ObjectiveProblem& problem, std::span<const double> x, std::span<const double> theta)
{
    const double v = problem.evaluate(x, theta);
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteEvaluation, problem.label + ": objective is non-finite");
    return v;
}

const double kGradStep = std::cbrt(std::numeric_limits<double>::epsilon());

Vector projected_gradient(const Box& box, std::span<const double> x, std::span<const double> g)
{
    Vector pg(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        pg[i] = std::clamp(x[i] - g[i], box.lower[i], box.upper[i]) - x[i];
    return pg;
}

}  // namespace

Vector fd_gradient(const ObjectiveProblem& problem, std::span<const double> x, std::span<const double> theta)
{
    Vector xs(x.begin(), x.end());
    Vector g(x.size());
    const double f0_unset = std::numeric_limits<double>::quiet_NaN();
    double f0 = f0_unset;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double h = kGradStep * std::max(1.0, std::abs(x[i]));
        const bool up_ok = x[i] + h <= problem.box.upper[i];
        const bool down_ok = x[i] - h >= problem.box.lower[i];
        if (up_ok && down_ok) {
            xs[i] = x[i] + h;
            const double fp = checked_eval(problem, xs, theta);
            xs[i] = x[i] - h;
            const double fm = checked_eval(problem, xs, theta);
            g[i] = (fp - fm) / (2.0 * h);
        } else {
            if (std::isnan(f0)) f0 = checked_eval(problem, x, theta);
            if (up_ok) {
                xs[i] = x[i] + h;
                g[i] = (checked_eval(problem, xs, theta) - f0) / h;
            } else {
                xs[i] = x[i] - h;
                g[i] = (f0 - checked_eval(problem, xs, theta)) / h;
            }
        }
        xs[i] = x[i];
    }
    return g;
}

DecisionPoint minimize(const ObjectiveProblem& problem, std::span<const double> theta,
                       std::span<const double> x0, double tol, std::size_t max_iter,
                       const IterateObserver& observer)
{
    if (!(tol > 0.0)) throw Error(ErrorCode::InvalidParameter, "minimize: tol must be positive");
    if (x0.size() != problem.dim_x || problem.box.size() != problem.dim_x) {
        throw Error(ErrorCode::DimensionMismatch, "minimize: starting point has wrong dimension");
    }
    if (!problem.box.contains(x0)) throw Error(ErrorCode::InvalidParameter, "minimize: x0 outside the box");

    const std::size_t n = problem.dim_x;
    constexpr std::size_t kMemory = 10;
    constexpr double kArmijo = 1e-4;

    DecisionPoint pt;
    pt.x.assign(x0.begin(), x0.end());
    problem.box.project(pt.x);
    pt.value = checked_eval(problem, pt.x, theta);
    Vector g = fd_gradient(problem, pt.x, theta);

    std::deque<Vector> s_hist, y_hist;
    std::deque<double> rho_hist;

    for (;;) {
        if (norm2(projected_gradient(problem.box, pt.x, g)) <= tol) {
            pt.converged = true;
            break;
        }
        if (pt.iterations >= max_iter) break;

        // Variables pinned at a face with the gradient pushing outward stay fixed.
        std::vector<bool> free(n, true);
        for (std::size_t i = 0; i < n; ++i) {
            if ((pt.x[i] <= problem.box.lower[i] && g[i] > 0.0) || (pt.x[i] >= problem.box.upper[i] && g[i] < 0.0))
                free[i] = false;
        }
        auto mask = [&](Vector& v) {
            for (std::size_t i = 0; i < n; ++i)
                if (!free[i]) v[i] = 0.0;
        };

        bool accepted = false;
        Vector xt, s;
        double ft = 0.0;
        for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
            Vector q = g;
            mask(q);
            Vector d;
            if (!s_hist.empty()) {
                std::vector<double> alpha(s_hist.size());
                for (std::size_t k = s_hist.size(); k-- > 0;) {
                    alpha[k] = rho_hist[k] * dot(s_hist[k], q);
                    for (std::size_t i = 0; i < n; ++i) q[i] -= alpha[k] * y_hist[k][i];
                }
                const double gamma = dot(s_hist.back(), y_hist.back()) / dot(y_hist.back(), y_hist.back());
                for (double& v : q) v *= gamma;
                for (std::size_t k = 0; k < s_hist.size(); ++k) {
                    const double beta = rho_hist[k] * dot(y_hist[k], q);
                    for (std::size_t i = 0; i < n; ++i) q[i] += (alpha[k] - beta) * s_hist[k][i];
                }
                mask(q);
                d = q;
                for (double& v : d) v = -v;
                if (!(dot(g, d) < 0.0)) {
                    s_hist.clear();
                    y_hist.clear();
                    rho_hist.clear();
                }
            }
            double step = 1.0;
            if (s_hist.empty()) {
                d = g;
                mask(d);
                for (double& v : d) v = -v;
                step = std::min(1.0, 1.0 / std::max(norm2(d), 1e-300));
            }

            for (int k = 0; k < 60; ++k, step *= 0.5) {
                xt = pt.x;
                for (std::size_t i = 0; i < n; ++i) xt[i] += step * d[i];
                problem.box.project(xt);
                s = xt;
                for (std::size_t i = 0; i < n; ++i) s[i] -= pt.x[i];
                if (norm2(s) == 0.0) break;
                ft = problem.evaluate(xt, theta);
                if (!std::isfinite(ft)) continue;
                if (ft <= pt.value + kArmijo * dot(g, s) && ft <= pt.value) {
                    accepted = true;
                    break;
                }
            }
            if (!accepted) {
                if (s_hist.empty()) break;
                s_hist.clear();
                y_hist.clear();
                rho_hist.clear();
            }
        }
        if (!accepted) break;  // stalled at the finite-difference noise floor

        Vector gt = fd_gradient(problem, xt, theta);
        Vector y = gt;
        for (std::size_t i = 0; i < n; ++i) y[i] -= g[i];
        const double sy = dot(s, y);
        if (sy > 1e-10 * norm2(s) * norm2(y)) {
            s_hist.push_back(s);
            y_hist.push_back(std::move(y));
            rho_hist.push_back(1.0 / sy);
            if (s_hist.size() > kMemory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }
        pt.x = std::move(xt);
        pt.value = ft;
        g = std::move(gt);
        ++pt.iterations;
        if (observer) observer(pt);
    }
    return pt;
}

double minimize_1d(const std::function<double(double)>& g, double lo, double hi, double tol)
{
    if (!(lo < hi)) throw Error(ErrorCode::InvalidParameter, "minimize_1d: bracket must satisfy lo < hi");
    if (!(tol > 0.0)) throw Error(ErrorCode::InvalidParameter, "minimize_1d: tol must be positive");

    auto eval = [&](double x) {
        const double v = g(x);
        if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteEvaluation, "minimize_1d: non-finite objective");
        return v;
    };
    const double eps = std::numeric_limits<double>::epsilon();
    auto d1 = [&](double x) {
        const double h = std::cbrt(eps) * std::max(1.0, std::abs(x));
        return (eval(x + h) - eval(x - h)) / (2.0 * h);
    };
    auto d2 = [&](double x) {
        const double h = std::pow(eps, 0.25) * std::max(1.0, std::abs(x));
        return (eval(x + h) - 2.0 * eval(x) + eval(x - h)) / (h * h);
    };

    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = eval(c), fd = eval(d);
    for (int it = 0; it < 300 && (b - a) > 1e-12 * std::max(1.0, std::abs(a) + std::abs(b)); ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d);
        }
    }
    double x = 0.5 * (a + b);

    const double edge = 1e-6 * (hi - lo);
    const double h = std::cbrt(eps) * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
    if (x - lo <= edge && (eval(lo + h) - eval(lo)) / h > tol) {
        throw Error(ErrorCode::NoInteriorMinimum, "minimum at lower bracket end");
    }
    if (hi - x <= edge && (eval(hi) - eval(hi - h)) / h < -tol) {
        throw Error(ErrorCode::NoInteriorMinimum, "minimum at upper bracket end");
    }

    // polish with Newton until the step stalls
    for (int it = 0; it < 50; ++it) {
        const double slope = d1(x);
        if (slope == 0.0) break;
        const double curv = d2(x);
        if (!(curv > 0.0)) break;
        const double next = std::clamp(x - slope / curv, lo, hi);
        if (std::abs(next - x) <= 4 * eps * std::max(1.0, std::abs(x))) break;
        if (std::abs(d1(next)) >= std::abs(slope)) break;
        x = next;
    }
    return x;
}

DecisionPoint solve_decision(const ObjectiveProblem& problem, std::span<const double> theta)
{
    if (theta.size() != problem.dim_theta) {
        throw Error(ErrorCode::DimensionMismatch, problem.label + ": parameter vector has wrong dimension");
    }
    if (problem.solver) return problem.solver(theta);
    return minimize(problem, theta, problem.x0);
}

Matrix cross_derivative(const ObjectiveProblem& problem, std::span<const double> x,
                        std::span<const double> theta, const FdConfig& cfg)
{
    if (problem.analytic_cross_derivative) return problem.analytic_cross_derivative(x, theta);
    return cross_derivative_matrix(problem.evaluate, x, theta, cfg);
}

void SmoothnessConstants::validate() const
{
    if (!(rho > 0.0)) throw Error(ErrorCode::InvalidParameter, "rho must be positive");
    if (!(beta2 >= 0.0)) throw Error(ErrorCode::InvalidParameter, "beta2 must be nonnegative");
    if (!(rho <= beta1)) throw Error(ErrorCode::InvalidParameter, "rho must not exceed beta1");
}

BoundCheck verify_regret_bound(const ObjectiveProblem& problem, const SmoothnessConstants& constants,
                               std::span<const double> theta_star, std::span<const double> theta_hat)
{
    constants.validate();
    if (theta_hat.size() != theta_star.size()) {
        throw Error(ErrorCode::DimensionMismatch, "verify_regret_bound: parameter sizes differ");
    }
    const DecisionPoint best = solve_decision(problem, theta_star);
    const DecisionPoint chosen = solve_decision(problem, theta_hat);

    BoundCheck out;
    out.regret = problem.evaluate(chosen.x, theta_star) - problem.evaluate(best.x, theta_star);

    Vector delta(theta_star.size());
    for (std::size_t i = 0; i < delta.size(); ++i) delta[i] = theta_hat[i] - theta_star[i];
    const Matrix d = cross_derivative(problem, best.x, theta_star);
    const Vector dd = d * std::span<const double>(delta);
    const double lin = dot(dd, dd);
    const double sq = dot(delta, delta);
    out.bound = 4.0 * constants.beta1 / (constants.rho * constants.rho) *
                (lin + constants.beta2 * constants.beta2 / 4.0 * sq * sq);
    out.holds = out.regret <= out.bound + 1e-9;
    return out;
}

}  // namespace etod
