#pragma once

// Problem dispatch, the example registry, and CSV / JSON reports.

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fredholm/config.hpp"
#include "fredholm/network.hpp"
#include "fredholm/polar_fd.hpp"
#include "json.hpp"

namespace fredholm {

struct SolutionRow {
    std::vector<double> coords;  // x, or r and phi
    double value = 0.0;
    std::optional<double> exact;
    std::optional<double> abs_err;
};

struct CheckRow {
    std::string name;
    double value = 0.0;
    double limit = 0.0;
    bool passed = false;
};

struct ReportMetadata {
    std::string problem;
    std::string kind;
    std::string scheme;
    std::size_t grid_n = 0;
    std::size_t layers = 0;
    std::vector<double> kappa;
    std::size_t iterations = 0;  // linear network passes
    std::optional<double> q_est;
    std::optional<double> residual;
    std::optional<double> derivative_bound;
    std::optional<double> error_bound;
    std::optional<double> km_estimate;
    std::optional<double> target_error;
    std::optional<std::size_t> planned_layers;
    std::optional<double> max_abs_err;
    std::vector<std::string> warnings;
    std::vector<std::pair<std::string, double>> stats;    // problem-specific diagnostics
    std::vector<std::pair<std::string, double>> timings;  // seconds; empty in deterministic mode
    nlohmann::ordered_json config;                        // resolved config, enough to re-run the job
};

struct ReportBundle {
    std::vector<std::string> coord_names;
    std::vector<SolutionRow> solution;
    std::vector<SweepRow> sweep;
    std::vector<CheckRow> checks;
    ReportMetadata metadata;
};

struct RunOptions {
    bool deterministic = false;
};

/// Dispatches on spec.kind.  Throws ValidationError / NumericalError / EvalError.
ReportBundle run_problem(const ProblemSpec& spec, const RunOptions& options = {});

/// Finite-difference reference for a laplace_disc spec.  Rows hold the FD
/// values at a subsample of the FD nodes (at most `max_axis` + 1 per axis);
/// stats compare FD and network against the exact solution on all nodes.
ReportBundle compare_fd(const ProblemSpec& spec, const PolarFdOptions& fd, std::size_t max_axis = 32,
                        const RunOptions& options = {});

/// Names of the pinned example problems.
const std::vector<std::string>& example_names();

/// Throws ValidationError listing the registry for an unknown name.
ProblemSpec example_spec(const std::string& name);
nlohmann::ordered_json example_config(const std::string& name);

/// run_problem plus the example's own checks (e.g. the ex2 iterate law).
ReportBundle run_example(const std::string& name, const Overrides& overrides = {}, const RunOptions& options = {});

/// Solution table; numbers use 17 significant digits, empty cells for missing values.
std::string render_solution_csv(const ReportBundle& bundle);
std::string render_sweep_csv(const ReportBundle& bundle);
nlohmann::ordered_json report_to_json(const ReportBundle& bundle);
std::string render_json(const ReportBundle& bundle);
ReportBundle parse_report_json(const std::string& text);

enum class ReportFormat { csv, json };

/// CSV writes `out` plus `<stem>.sweep.csv` when a sweep was run.  Returns the files written.
std::vector<std::filesystem::path> write_report(const ReportBundle& bundle, ReportFormat format,
                                                const std::filesystem::path& out);

std::string format_number(double value);

}  // namespace fredholm
