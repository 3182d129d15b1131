#pragma once

#include "etod/matrix.hpp"
#include "etod/problems/pandemic.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace etod::cli {

/// Bad flag, bad config file, or a combination the command cannot run.
/// Reported with exit status 2.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field + ": " + message), field_(std::move(field))
    {}
    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

enum class ProblemKind { Quadratic, Pricing, Pandemic };

struct BoundSettings {
    double rho = 2.0;
    double beta1 = 8.0;
    double beta2 = 0.0;
    Vector theta_star = {10.0, 5.0};
    double noise_variance = 0.01;
    std::size_t draws = 1000;
};

struct QuadraticSettings {
    Vector prior_mean = {10.0, 5.0};
    Matrix prior_covariance = Matrix::identity(2);
    Vector sigma = {1.0, 1.7320508075688772};
    std::size_t min_per_point = 1;
    std::size_t split_margin = 5;  ///< --split-curve runs n0 = margin .. budget - margin
    BoundSettings bound;
};

struct PricingSettings {
    Vector theta_star = {-4.0, 1.0};
    Matrix prior_covariance = 0.01 * Matrix::identity(2);
    Vector prices = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::size_t candidates = 1000;
    double price_upper = 50.0;
};

struct PandemicSettings {
    problems::SirParams sir;
    double trace_sigma = 1.0;
    std::size_t solver_grid = 5;
    double fd_step = 1e-4;
};

/// Everything a command needs; defaults reproduce the reference experiments.
struct ProblemConfig {
    ProblemKind kind = ProblemKind::Quadratic;
    std::size_t budget = 100;
    std::vector<std::size_t> budgets;
    std::size_t prior_draws = 100;
    std::size_t replications = 300;
    QuadraticSettings quadratic;
    PricingSettings pricing;
    PandemicSettings pandemic;

    static ProblemConfig defaults(ProblemKind kind);
};

inline constexpr int kSchemaVersion = 1;

ProblemKind parse_problem_kind(const std::string& name);
std::string to_string(ProblemKind kind);

/// Overlay a JSON document on the defaults for `kind`. Unknown fields, a
/// missing or unsupported schema_version, or a "problem" entry naming a
/// different problem raise ConfigError.
ProblemConfig parse_config_text(const std::string& text, ProblemKind kind);
ProblemConfig load_config_file(const std::string& path, ProblemKind kind);

/// Comma-separated positive counts, e.g. "100,300,1000".
std::vector<std::size_t> parse_budget_list(const std::string& text);

struct RunConfig {
    std::string command;
    ProblemKind problem = ProblemKind::Quadratic;
    std::string config_path;
    std::uint64_t seed = 0;
    std::size_t replications = 0;  ///< 0 keeps the config value
    std::size_t budget = 0;        ///< 0 keeps the config value
    std::vector<std::size_t> budgets;
    std::string output_path;       ///< empty writes to stdout
    std::string format;            ///< csv or json; empty picks the command default
    bool split_curve = false;
    bool per_replication = false;
    std::size_t threads = 0;
};

/// Worker count from REGRET_DESIGN_THREADS (unset or 0 means one per hardware thread).
std::size_t threads_from_env();

/// Run one command. `log` receives human-readable summaries.
/// Returns 0, or throws ConfigError / etod::Error.
int run(const RunConfig& config, std::ostream& log);

/// Full command line entry point with exit-status mapping.
int main_entry(int argc, const char* const* argv, std::ostream& log, std::ostream& err);

/// Write via a temporary sibling file and rename over `path`.
void write_file_atomic(const std::string& path, const std::string& content);

/// %.17g
std::string format_double(double v);

}  // namespace etod::cli
