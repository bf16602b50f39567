// fredholm: solve integral-equation problems from JSON configs.
//
//   fredholm solve configs/ex1.json --layers 10 --out ex1.csv
//   fredholm example laplace_disc --format json
//   fredholm compare-fd configs/laplace_disc.json --nr 200 --ntheta 200
//   fredholm self-test
//
// Exit codes: 0 success, 2 invalid input, 3 numerical failure.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "fredholm/error.hpp"
#include "fredholm/report.hpp"

namespace {

using namespace fredholm;

constexpr int kExitInvalid = 2;
constexpr int kExitNumerical = 3;

struct OutputFlags {
    std::string out;
    std::string format = "csv";
    bool deterministic = false;
};

struct OverrideFlags {
    std::optional<std::size_t> grid;
    std::optional<std::size_t> layers;
    std::optional<double> kappa;
    std::optional<std::string> scheme;
    std::optional<std::string> queries;
    std::optional<std::size_t> sweep;

    Overrides resolve() const {
        Overrides o;
        o.grid_n = grid;
        o.layers = layers;
        o.kappa = kappa;
        if (scheme) o.scheme = parse_scheme(*scheme);
        o.queries = queries;
        o.sweep = sweep;
        return o;
    }
};

void add_output_flags(CLI::App* cmd, OutputFlags& f) {
    cmd->add_option("--out", f.out, "Output file (stdout when omitted)");
    cmd->add_option("--format", f.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    cmd->add_flag("--deterministic", f.deterministic, "Omit timings so repeated runs are byte-identical");
}

void add_override_flags(CLI::App* cmd, OverrideFlags& f) {
    cmd->add_option("--grid", f.grid, "Grid size N");
    cmd->add_option("--layers", f.layers, "Hidden layers M");
    cmd->add_option("--kappa", f.kappa, "Constant relaxation parameter");
    cmd->add_option("--scheme", f.scheme, "left, midpoint or closed");
    cmd->add_option("--queries", f.queries, "Query range a:b:n (radial range for laplace_disc)");
    cmd->add_option("--sweep", f.sweep, "Layer sweep up to this depth");
}

void print_summary(const ReportBundle& b) {
    const ReportMetadata& m = b.metadata;
    std::cerr << m.problem << " [" << m.kind << "] N=" << m.grid_n << " M=" << m.layers << " scheme=" << m.scheme;
    if (m.q_est) std::cerr << " q_est=" << format_number(*m.q_est);
    if (m.error_bound) std::cerr << " bound=" << format_number(*m.error_bound);
    if (m.planned_layers) std::cerr << " planned_layers=" << *m.planned_layers;
    std::cerr << " iterations=" << m.iterations;
    if (m.residual) std::cerr << " residual=" << format_number(*m.residual);
    if (m.max_abs_err) std::cerr << " max_abs_err=" << format_number(*m.max_abs_err);
    std::cerr << "\n";
    for (const auto& [name, v] : m.stats) std::cerr << "  " << name << " = " << format_number(v) << "\n";
    for (const auto& c : b.checks) {
        std::cerr << "  check " << c.name << " = " << format_number(c.value) << " (limit " << format_number(c.limit)
                  << ") " << (c.passed ? "ok" : "FAILED") << "\n";
    }
    for (const auto& w : m.warnings) std::cerr << "warning: " << w << "\n";
}

void emit(const ReportBundle& bundle, const OutputFlags& flags) {
    const ReportFormat format = flags.format == "json" ? ReportFormat::json : ReportFormat::csv;
    if (!flags.out.empty()) {
        for (const auto& p : write_report(bundle, format, flags.out)) std::cerr << "wrote " << p.string() << "\n";
    } else if (format == ReportFormat::json) {
        std::cout << render_json(bundle);
    } else {
        std::cout << render_solution_csv(bundle);
        if (!bundle.sweep.empty()) std::cout << "\n" << render_sweep_csv(bundle);
    }
    print_summary(bundle);
}

int self_test() {
    int failures = 0;
    for (const auto& name : example_names()) {
        try {
            const ProblemSpec spec = example_spec(name);
            const auto again = parse_problem(problem_to_json(spec));
            if (problem_to_json(again) != problem_to_json(spec)) throw ValidationError("config does not round-trip");
            std::cout << "ok   " << name << "\n";
        } catch (const Error& err) {
            std::cout << "FAIL " << name << ": " << err.what() << "\n";
            ++failures;
        }
    }
    return failures == 0 ? 0 : kExitInvalid;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fredholm network solver for integral equations, two-point BVPs and the disc Laplace problem"};
    app.require_subcommand(1);

    OutputFlags out_flags;
    OverrideFlags override_flags;

    std::string config_path;
    auto* solve = app.add_subcommand("solve", "Solve the problem in a JSON config");
    solve->add_option("config", config_path, "Problem config")->required();
    add_override_flags(solve, override_flags);
    add_output_flags(solve, out_flags);

    std::string example_name;
    auto* example = app.add_subcommand("example", "Run a registry example with its pinned settings");
    example->add_option("name", example_name, "Example name (see `list`)")->required();
    add_override_flags(example, override_flags);
    add_output_flags(example, out_flags);

    PolarFdOptions fd;
    std::size_t fd_samples = 32;
    auto* compare = app.add_subcommand("compare-fd", "Finite-difference reference for a laplace_disc config");
    compare->add_option("config", config_path, "laplace_disc config, or a registry name")->required();
    compare->add_option("--nr", fd.radial_cells, "Radial cells")->capture_default_str();
    compare->add_option("--ntheta", fd.angular_cells, "Angular cells")->capture_default_str();
    compare->add_option("--tol", fd.tol, "Scaled residual tolerance")->capture_default_str();
    compare->add_option("--samples", fd_samples, "Table rows per axis")->capture_default_str();
    add_output_flags(compare, out_flags);

    auto* list = app.add_subcommand("list", "List registry examples");
    auto* selftest = app.add_subcommand("self-test", "Validate every registry example config");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInvalid;
    }

    try {
        const RunOptions run{out_flags.deterministic};
        if (list->parsed()) {
            for (const auto& n : example_names()) std::cout << n << "\n";
            return 0;
        }
        if (selftest->parsed()) return self_test();
        if (solve->parsed()) {
            ProblemSpec spec = load_problem(config_path);
            apply_overrides(spec, override_flags.resolve());
            emit(run_problem(spec, run), out_flags);
        } else if (example->parsed()) {
            emit(run_example(example_name, override_flags.resolve(), run), out_flags);
        } else if (compare->parsed()) {
            const bool is_file = config_path.find('/') != std::string::npos || config_path.ends_with(".json");
            const ProblemSpec spec = is_file ? load_problem(config_path) : example_spec(config_path);
            emit(compare_fd(spec, fd, fd_samples, run), out_flags);
        }
        return 0;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const EvalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
