#include "etod/problems/pandemic.hpp"

#include "etod/design.hpp"
#include "etod/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace etod::problems {

namespace {

constexpr std::size_t G = SirParams::kGroups;

}  // namespace

void SirParams::validate() const
{
    if (theta.rows() != G || theta.cols() != G) throw Error(ErrorCode::InvalidParameter, "theta must be 3x3");
    for (double v : theta.entries())
        if (!(v >= 0.0)) throw Error(ErrorCode::InvalidParameter, "theta entries must be >= 0");
    if (!(kappa >= 0.0)) throw Error(ErrorCode::InvalidParameter, "kappa must be >= 0");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw Error(ErrorCode::InvalidParameter, "gamma must lie in [0, 1]");
    if (group_size.size() != G || initial_infected.size() != G) {
        throw Error(ErrorCode::InvalidParameter, "group sizes and initial infections need three entries");
    }
    double seeds = 0.0;
    for (std::size_t k = 0; k < G; ++k) {
        if (!(group_size[k] > 0.0)) throw Error(ErrorCode::InvalidParameter, "group sizes must be positive");
        if (!(initial_infected[k] >= 0.0 && initial_infected[k] <= group_size[k])) {
            throw Error(ErrorCode::InvalidParameter, "initial infections must lie in [0, N_k]");
        }
        seeds += initial_infected[k];
    }
    if (seeds < 1.0) throw Error(ErrorCode::InvalidParameter, "need at least one initial infection");
    if (!(test_capacity >= 0.0)) throw Error(ErrorCode::InvalidParameter, "test capacity must be >= 0");
}

Vector SirParams::theta_vector() const { return Vector(theta.entries().begin(), theta.entries().end()); }

SirState SirState::initial(const SirParams& params)
{
    SirState s;
    s.infected = params.initial_infected;
    s.susceptible.resize(G);
    for (std::size_t k = 0; k < G; ++k) s.susceptible[k] = params.group_size[k] - params.initial_infected[k];
    s.removed.assign(G, 0.0);
    return s;
}

SirState sir_step(const SirState& state, const SirParams& params, std::span<const double> theta,
                  std::span<const double> testing_rates)
{
    if (theta.size() != G * G || testing_rates.size() != G) {
        throw Error(ErrorCode::DimensionMismatch, "sir_step expects 9 contact rates and 3 testing rates");
    }
    SirState next = state;
    for (std::size_t k = 0; k < G; ++k) {
        const double leave = params.gamma + testing_rates[k];
        if (leave > 1.0) {
            throw Error(ErrorCode::UnstableStep, "gamma + x_" + std::to_string(k) + " exceeds 1");
        }
        double force = 0.0;
        for (std::size_t j = 0; j < G; ++j) force += params.kappa * theta[k * G + j] * state.infected[j];
        double new_inf = state.susceptible[k] * force / params.group_size[k];
        if (new_inf > state.susceptible[k]) {
            new_inf = state.susceptible[k];
            next.clamped = true;
        }
        const double out = leave * state.infected[k];
        next.susceptible[k] = state.susceptible[k] - new_inf;
        next.infected[k] = state.infected[k] + new_inf - out;
        next.removed[k] = state.removed[k] + out;
    }
    return next;
}

SirState sir_step(const SirState& state, const SirParams& params, std::span<const double> testing_rates)
{
    return sir_step(state, params, params.theta.entries(), testing_rates);
}

Vector decode_testing_rates(const SirParams& params, std::span<const double> y)
{
    if (y.size() != 2) throw Error(ErrorCode::DimensionMismatch, "testing split has two coordinates");
    const double t = params.test_capacity;
    return {y[0] * t / params.group_size[0], y[1] * (1.0 - y[0]) * t / params.group_size[1],
            (1.0 - y[0]) * (1.0 - y[1]) * t / params.group_size[2]};
}

Vector cumulative_infection_path(const SirParams& params, std::span<const double> theta,
                                 std::span<const double> testing_rates)
{
    double total_n = 0.0;
    for (double n : params.group_size) total_n += n;
    SirState s = SirState::initial(params);
    Vector path;
    path.reserve(params.horizon + 1);
    auto cumulative = [&] {
        double sum_s = 0.0;
        for (double v : s.susceptible) sum_s += v;
        return total_n - sum_s;
    };
    path.push_back(cumulative());
    for (std::size_t t = 0; t < params.horizon; ++t) {
        s = sir_step(s, params, theta, testing_rates);
        path.push_back(cumulative());
    }
    return path;
}

double cumulative_infections(const SirParams& params, std::span<const double> theta,
                             std::span<const double> testing_rates)
{
    if (theta.size() != G * G || testing_rates.size() != G) {
        throw Error(ErrorCode::DimensionMismatch, "expected 9 contact rates and 3 testing rates");
    }
    SirState s = SirState::initial(params);
    for (std::size_t t = 0; t < params.horizon; ++t) s = sir_step(s, params, theta, testing_rates);
    double total = 0.0;
    for (std::size_t k = 0; k < G; ++k) total += params.group_size[k] - s.susceptible[k];
    return total;
}

double pandemic_objective(const SirParams& params, std::span<const double> y)
{
    if (y.size() != 2) throw Error(ErrorCode::DimensionMismatch, "testing split has two coordinates");
    if (!(y[0] >= 0.0 && y[0] <= 1.0 && y[1] >= 0.0 && y[1] <= 1.0)) {
        throw Error(ErrorCode::InvalidParameter, "testing split must lie in [0,1]^2");
    }
    const Vector x = decode_testing_rates(params, y);
    return cumulative_infections(params, params.theta.entries(), x);
}

ObjectiveProblem make_pandemic_problem(const SirParams& params, PandemicSolverOptions options)
{
    params.validate();
    if (options.grid == 0) throw Error(ErrorCode::InvalidParameter, "multi-start grid must be non-empty");
    ObjectiveProblem p;
    p.label = "pandemic";
    p.dim_x = 2;
    p.dim_theta = G * G;
    p.evaluate = [params](std::span<const double> y, std::span<const double> theta) {
        const Vector x = decode_testing_rates(params, y);
        return cumulative_infections(params, theta, x);
    };
    p.box = Box::uniform(2, 0.0, 1.0);
    p.x0 = {0.5, 0.5};
    const ObjectiveProblem base = p;
    p.solver = [base, options](std::span<const double> theta) {
        DecisionPoint best;
        bool have = false;
        const double step = 1.0 / static_cast<double>(options.grid);
        for (std::size_t a = 0; a < options.grid; ++a) {
            for (std::size_t b = 0; b < options.grid; ++b) {
                const Vector start = {(static_cast<double>(a) + 0.5) * step, (static_cast<double>(b) + 0.5) * step};
                DecisionPoint pt = minimize(base, theta, start, options.tol, options.max_iter);
                if (!have || pt.value < best.value) {
                    best = std::move(pt);
                    have = true;
                }
            }
        }
        return best;
    };
    return p;
}

ObjectiveProblem make_pandemic_rate_problem(const SirParams& params)
{
    params.validate();
    ObjectiveProblem p;
    p.label = "pandemic-rates";
    p.dim_x = G;
    p.dim_theta = G * G;
    p.evaluate = [params](std::span<const double> x, std::span<const double> theta) {
        return cumulative_infections(params, theta, x);
    };
    p.box = Box::uniform(G, 0.0, 1.0 - params.gamma);
    p.x0 = decode_testing_rates(params, Vector{1.0 / 3.0, 0.5});
    return p;
}

Vector pandemic_group_sensitivity(const SirParams& params, std::span<const double> theta,
                                  std::span<const double> y_star, const FdConfig& fd)
{
    const ObjectiveProblem problem = make_pandemic_problem(params);
    const Matrix d = cross_derivative_matrix(problem.evaluate, y_star, theta, fd);
    return group_sensitivity(d, theta, G);
}

}  // namespace etod::problems
