#include "fredholm/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "fredholm/error.hpp"
#include "fredholm/integral_operator.hpp"

namespace fredholm {

using json = nlohmann::ordered_json;

std::string format_number(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

// --- registry ---------------------------------------------------------------

namespace {

struct Example {
    const char* name;
    const char* config;
    double error_limit;
};

// Settings pinned to the published experiments.
const Example kExamples[] = {
    {"ex1", R"cfg({
  "kind": "linear_fie", "kernel": "1/e", "source": "exp(x)", "domain": [0, 1],
  "grid_n": 2000, "grid_scheme": "closed", "layers": 10, "kappa": 1, "contractive": true,
  "queries": "0:1:1001", "exact": "exp(x) + 1"
})cfg",
     1.6e-3},
    {"ex2", R"cfg({
  "kind": "linear_fie", "kernel": "sin(x)*cos(z)", "source": "sin(x)", "domain": [0, "pi/2"],
  "grid_n": 2000, "grid_scheme": "closed", "layers": 15, "kappa": 1, "contractive": true,
  "queries": "0:pi/2:1001", "exact": "2*sin(x)"
})cfg",
     2e-3},
    {"bvp_p", R"cfg({
  "kind": "bvp", "g": "3*3.2/(3.2 + x^2)^2", "h": "0", "alpha": 0, "beta": "1/sqrt(4.2)",
  "grid_n": 2000, "grid_scheme": "closed", "layers": 10, "kappa": 1,
  "queries": "0:1:1001", "exact": "x/sqrt(3.2 + x^2)"
})cfg",
     1e-2},
    {"bvp_airy", R"cfg({
  "kind": "bvp", "g": "x", "h": "0", "alpha": 0, "beta": 2,
  "grid_n": 2000, "grid_scheme": "closed", "layers": 15, "kappa": 1,
  "queries": "0:1:1001", "exact_oracle": "airy_series"
})cfg",
     1e-2},
    {"nl1", R"cfg({
  "kind": "nonlinear_fie", "kernel": "z/36", "source": "log(x) + 143/144", "nonlinearity": "u^2",
  "domain": [0, 1], "grid_n": 1000, "grid_scheme": "midpoint", "layers": 7, "outer_iterations": 5,
  "kappa": 1, "contractive": true, "queries": "grid", "exact": "log(x) + 1"
})cfg",
     5e-5},
    {"nl2", R"cfg({
  "kind": "nonlinear_fie", "kernel": "z/36", "source": "sin(x) + 1 - pi/12 - 5*pi^2/144", "nonlinearity": "u + u^2",
  "domain": [0, "pi"], "grid_n": 2000, "grid_scheme": "closed", "layers": 7, "outer_iterations": 7,
  "kappa": 1, "contractive": true, "queries": "0:pi:1001", "exact": "sin(x) + 1"
})cfg",
     5e-3},
    {"nl3", R"cfg({
  "kind": "nonlinear_fie", "kernel": "x*z", "source": "2 - (2*sqrt(2) - 1)/3*x - x^2", "nonlinearity": "sqrt(u)",
  "domain": [0, 1], "grid_n": 3000, "grid_scheme": "closed", "layers": 10, "outer_iterations": 10,
  "kappa": 1, "contractive": true, "queries": "0:1:1001", "exact": "2 - x^2"
})cfg",
     1e-2},
    {"laplace_disc", R"cfg({
  "kind": "laplace_disc", "boundary": "1 + cos(2*phi)", "grid_n": 2000, "layers": 15, "kappa": 0.6666666666666666,
  "queries": {"r": "0:1:51", "phi": "0:2*pi:72"}, "exact": "x^2 - y^2 + 1"
})cfg",
     1e-6},
};

const Example& find_example(const std::string& name) {
    for (const auto& e : kExamples) {
        if (name == e.name) return e;
    }
    std::string list;
    for (const auto& e : kExamples) {
        if (!list.empty()) list += ", ";
        list += e.name;
    }
    throw ValidationError("unknown example '" + name + "'; available: " + list);
}

// h_m on the grid against (2 - 2^{-(m-1)}) sin z for m = 2..10.
void ex2_iterate_law(const ProblemSpec& spec, ReportBundle& bundle) {
    const Grid1D grid = uniform_grid(spec.a, spec.b, spec.grid_n, spec.scheme);
    const FieProblem fie{[](double x, double z) { return std::sin(x) * std::cos(z); },
                         [](double x) { return std::sin(x); }, spec.a, spec.b, std::nullopt};
    auto op = std::make_shared<const DiscreteOperator>(discretize(fie, grid));
    const FredholmNet net(op, 10, KmSchedule::constant(1.0, true));
    const SolutionField field = forward(net, true);
    for (std::size_t m = 2; m <= 10; ++m) {
        const double factor = 2.0 - std::ldexp(1.0, -static_cast<int>(m - 1));
        double worst = 0.0;
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const double expected = factor * std::sin(grid[j]);
            worst = std::max(worst, std::fabs(field.history[m - 1](static_cast<Eigen::Index>(j)) - expected));
        }
        bundle.checks.push_back({"iterate_law_m" + std::to_string(m), worst, 2e-3, worst <= 2e-3});
    }
}

}  // namespace

const std::vector<std::string>& example_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& e : kExamples) out.emplace_back(e.name);
        return out;
    }();
    return names;
}

json example_config(const std::string& name) {
    json config = {{"name", name}};
    config.update(json::parse(find_example(name).config));
    return config;
}

ProblemSpec example_spec(const std::string& name) { return parse_problem(example_config(name)); }

ReportBundle run_example(const std::string& name, const Overrides& overrides, const RunOptions& options) {
    const Example& example = find_example(name);
    ProblemSpec spec = example_spec(name);
    apply_overrides(spec, overrides);
    ReportBundle bundle = run_problem(spec, options);
    if (name == "ex2") ex2_iterate_law(spec, bundle);
    if (spec.kind == ProblemKind::bvp && !bundle.solution.empty()) {
        double worst = 0.0;
        for (const auto& row : bundle.solution) {
            if (row.coords[0] == 0.0) worst = std::max(worst, std::fabs(row.value - spec.alpha));
            if (row.coords[0] == 1.0) worst = std::max(worst, std::fabs(row.value - spec.beta));
        }
        bundle.checks.push_back({"boundary_exact", worst, 0.0, worst == 0.0});
        for (const auto& [stat, value] : bundle.metadata.stats) {
            if (stat != "ode_residual" || !bundle.metadata.max_abs_err) continue;
            // C (dx^2 + solver error); C = 10 covers dx^2 |y| / 12 for |y| <= 120.
            const double dx = bundle.solution[1].coords[0] - bundle.solution[0].coords[0];
            const double limit = 10.0 * (dx * dx + *bundle.metadata.max_abs_err);
            bundle.checks.push_back({"ode_residual", value, limit, value <= limit});
        }
    }
    if (bundle.metadata.max_abs_err) {
        const double err = *bundle.metadata.max_abs_err;
        bundle.checks.push_back({"max_abs_err", err, example.error_limit, err <= example.error_limit});
    }
    return bundle;
}

// --- rendering --------------------------------------------------------------

std::string render_solution_csv(const ReportBundle& bundle) {
    std::string out;
    for (const auto& c : bundle.coord_names) out += c + ",";
    out += "value,exact,abs_err\n";
    for (const auto& row : bundle.solution) {
        for (double c : row.coords) out += format_number(c) + ",";
        out += format_number(row.value) + ",";
        if (row.exact) out += format_number(*row.exact);
        out += ",";
        if (row.abs_err) out += format_number(*row.abs_err);
        out += "\n";
    }
    return out;
}

std::string render_sweep_csv(const ReportBundle& bundle) {
    std::string out = "layers,max_err\n";
    for (const auto& row : bundle.sweep) out += std::to_string(row.layers) + "," + format_number(row.max_error) + "\n";
    return out;
}

namespace {

template <typename T>
json optional_json(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> optional_from(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<T>();
}

}  // namespace

json report_to_json(const ReportBundle& bundle) {
    json j;
    j["columns"] = bundle.coord_names;
    json rows = json::array();
    for (const auto& row : bundle.solution) {
        json r;
        for (std::size_t k = 0; k < row.coords.size(); ++k) r[bundle.coord_names.at(k)] = row.coords[k];
        r["value"] = row.value;
        r["exact"] = optional_json(row.exact);
        r["abs_err"] = optional_json(row.abs_err);
        rows.push_back(std::move(r));
    }
    j["solution"] = std::move(rows);
    json sweep = json::array();
    for (const auto& s : bundle.sweep) sweep.push_back({{"layers", s.layers}, {"max_err", s.max_error}});
    j["sweep"] = std::move(sweep);
    json checks = json::array();
    for (const auto& c : bundle.checks) {
        checks.push_back({{"name", c.name}, {"value", c.value}, {"limit", c.limit}, {"passed", c.passed}});
    }
    j["checks"] = std::move(checks);

    const ReportMetadata& m = bundle.metadata;
    json meta;
    meta["problem"] = m.problem;
    meta["kind"] = m.kind;
    meta["scheme"] = m.scheme;
    meta["grid_n"] = m.grid_n;
    meta["layers"] = m.layers;
    meta["kappa"] = m.kappa;
    meta["iterations"] = m.iterations;
    meta["q_est"] = optional_json(m.q_est);
    meta["residual"] = optional_json(m.residual);
    meta["derivative_bound"] = optional_json(m.derivative_bound);
    meta["error_bound"] = optional_json(m.error_bound);
    meta["km_estimate"] = optional_json(m.km_estimate);
    meta["target_error"] = optional_json(m.target_error);
    meta["planned_layers"] = optional_json(m.planned_layers);
    meta["max_abs_err"] = optional_json(m.max_abs_err);
    meta["warnings"] = m.warnings;
    json stats = json::object();
    for (const auto& [name, v] : m.stats) stats[name] = v;
    meta["stats"] = std::move(stats);
    if (!m.timings.empty()) {
        json t;
        for (const auto& [name, sec] : m.timings) t[name] = sec;
        meta["timings"] = std::move(t);
    }
    meta["config"] = m.config;
    j["metadata"] = std::move(meta);
    return j;
}

std::string render_json(const ReportBundle& bundle) { return report_to_json(bundle).dump(2) + "\n"; }

ReportBundle parse_report_json(const std::string& text) {
    ReportBundle b;
    try {
        const json j = json::parse(text);
        b.coord_names = j.at("columns").get<std::vector<std::string>>();
        for (const auto& r : j.at("solution")) {
            SolutionRow row;
            for (const auto& c : b.coord_names) row.coords.push_back(r.at(c).get<double>());
            row.value = r.at("value").get<double>();
            row.exact = optional_from<double>(r, "exact");
            row.abs_err = optional_from<double>(r, "abs_err");
            b.solution.push_back(std::move(row));
        }
        for (const auto& s : j.at("sweep")) {
            b.sweep.push_back({s.at("layers").get<std::size_t>(), s.at("max_err").get<double>()});
        }
        for (const auto& c : j.at("checks")) {
            b.checks.push_back({c.at("name").get<std::string>(), c.at("value").get<double>(),
                                c.at("limit").get<double>(), c.at("passed").get<bool>()});
        }
        const json& meta = j.at("metadata");
        ReportMetadata& m = b.metadata;
        m.problem = meta.at("problem").get<std::string>();
        m.kind = meta.at("kind").get<std::string>();
        m.scheme = meta.at("scheme").get<std::string>();
        m.grid_n = meta.at("grid_n").get<std::size_t>();
        m.layers = meta.at("layers").get<std::size_t>();
        m.kappa = meta.at("kappa").get<std::vector<double>>();
        m.iterations = meta.at("iterations").get<std::size_t>();
        m.q_est = optional_from<double>(meta, "q_est");
        m.residual = optional_from<double>(meta, "residual");
        m.derivative_bound = optional_from<double>(meta, "derivative_bound");
        m.error_bound = optional_from<double>(meta, "error_bound");
        m.km_estimate = optional_from<double>(meta, "km_estimate");
        m.target_error = optional_from<double>(meta, "target_error");
        m.planned_layers = optional_from<std::size_t>(meta, "planned_layers");
        m.max_abs_err = optional_from<double>(meta, "max_abs_err");
        m.warnings = meta.at("warnings").get<std::vector<std::string>>();
        for (const auto& [name, v] : meta.at("stats").items()) m.stats.emplace_back(name, v.get<double>());
        if (meta.contains("timings")) {
            for (const auto& [name, sec] : meta.at("timings").items()) m.timings.emplace_back(name, sec.get<double>());
        }
        m.config = meta.at("config");
    } catch (const json::exception& err) {
        throw ValidationError(std::string("malformed report JSON: ") + err.what());
    }
    return b;
}

std::vector<std::filesystem::path> write_report(const ReportBundle& bundle, ReportFormat format,
                                                const std::filesystem::path& out) {
    auto write = [](const std::filesystem::path& path, const std::string& text) {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw ValidationError("cannot write output file '" + path.string() + "'");
        f << text;
        f.close();
        if (!f) throw ValidationError("failed writing output file '" + path.string() + "'");
    };
    std::vector<std::filesystem::path> written;
    if (format == ReportFormat::json) {
        write(out, render_json(bundle));
        written.push_back(out);
        return written;
    }
    write(out, render_solution_csv(bundle));
    written.push_back(out);
    if (!bundle.sweep.empty()) {
        std::filesystem::path sweep = out;
        sweep.replace_filename(out.stem().string() + ".sweep.csv");
        write(sweep, render_sweep_csv(bundle));
        written.push_back(sweep);
    }
    return written;
}

}  // namespace fredholm
