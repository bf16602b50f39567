#include "fredholm/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "fredholm/error.hpp"
#include "fredholm/expr.hpp"

namespace fredholm {

using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void schema_error(std::string_view key, const std::string& reason) {
    throw ValidationError("config key '" + std::string(key) + "': " + reason);
}

std::string join(const std::set<std::string>& names) {
    std::string out;
    for (const auto& n : names) {
        if (!out.empty()) out += ", ";
        out += n;
    }
    return out;
}

// Parses and checks the free variables of an expression-valued key.
void check_expression(std::string_view key, const std::string& text, const std::set<std::string>& allowed) {
    expr::Expr e = [&] {
        try {
            return expr::parse(text);
        } catch (const ParseError& err) {
            throw ParseError(err.offset(), err.expected(), "config key '" + std::string(key) + "': " + err.what());
        }
    }();
    for (const auto& v : expr::free_vars(e)) {
        if (!allowed.contains(v)) {
            schema_error(key, "uses variable '" + v + "'; allowed variables: " + join(allowed));
        }
    }
}

std::string get_string(const json& config, std::string_view key) {
    const json& v = config.at(std::string(key));
    if (!v.is_string()) schema_error(key, "expected a string");
    return v.get<std::string>();
}

double constant_expression(std::string_view text, std::string_view what);

// A number, or a string holding a constant expression such as "pi/2".
double scalar_value(const json& v, std::string_view key) {
    double d = 0.0;
    if (v.is_number()) {
        d = v.get<double>();
    } else if (v.is_string()) {
        try {
            d = constant_expression(v.get<std::string>(), "value");
        } catch (const Error& err) {
            schema_error(key, err.what());
        }
    } else {
        schema_error(key, "expected a number or a constant expression");
    }
    if (!std::isfinite(d)) schema_error(key, "must be finite");
    return d;
}

double get_number(const json& config, std::string_view key) { return scalar_value(config.at(std::string(key)), key); }

std::size_t get_count(const json& config, std::string_view key, std::size_t minimum) {
    const json& v = config.at(std::string(key));
    if (!v.is_number_integer()) schema_error(key, "expected an integer");
    if (v.is_number_unsigned() ? false : v.get<long long>() < 0) schema_error(key, "must be non-negative");
    const auto n = v.get<std::size_t>();
    if (n < minimum) schema_error(key, "must be at least " + std::to_string(minimum));
    return n;
}

double constant_expression(std::string_view text, std::string_view what) {
    const std::string s(text);
    expr::Expr e = expr::parse(s);
    if (!expr::free_vars(e).empty()) {
        throw ValidationError(std::string(what) + " '" + s + "' must be a constant expression");
    }
    return expr::eval(e, {});
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t");
    return std::string(s.substr(first, last - first + 1));
}

const std::set<std::string> kCommonKeys = {"name",   "description", "kind",  "grid_n", "grid_scheme", "layers",
                                           "kappa",  "contractive", "queries", "exact", "sweep", "target_error"};

std::set<std::string> kind_keys(ProblemKind kind) {
    switch (kind) {
        case ProblemKind::linear_fie: return {"kernel", "source", "domain"};
        case ProblemKind::nonlinear_fie: return {"kernel", "source", "nonlinearity", "domain", "outer_iterations"};
        case ProblemKind::bvp: return {"g", "h", "alpha", "beta", "domain", "exact_oracle"};
        case ProblemKind::laplace_disc: return {"boundary"};
    }
    return {};
}

std::set<std::string> required_keys(ProblemKind kind) {
    switch (kind) {
        case ProblemKind::linear_fie: return {"kernel", "source", "domain"};
        case ProblemKind::nonlinear_fie: return {"kernel", "source", "nonlinearity", "domain"};
        case ProblemKind::bvp: return {"g", "h", "alpha", "beta"};
        case ProblemKind::laplace_disc: return {"boundary"};
    }
    return {};
}

}  // namespace

ProblemKind parse_kind(std::string_view text) {
    if (text == "linear_fie") return ProblemKind::linear_fie;
    if (text == "nonlinear_fie") return ProblemKind::nonlinear_fie;
    if (text == "bvp") return ProblemKind::bvp;
    if (text == "laplace_disc") return ProblemKind::laplace_disc;
    throw ValidationError("config key 'kind': unknown kind '" + std::string(text) +
                          "'; expected linear_fie, nonlinear_fie, bvp or laplace_disc");
}

std::string_view to_string(ProblemKind kind) {
    switch (kind) {
        case ProblemKind::linear_fie: return "linear_fie";
        case ProblemKind::nonlinear_fie: return "nonlinear_fie";
        case ProblemKind::bvp: return "bvp";
        case ProblemKind::laplace_disc: return "laplace_disc";
    }
    return "?";
}

std::vector<double> parse_range(std::string_view text) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
        const auto colon = text.find(':', start);
        parts.push_back(trim(text.substr(start, colon - start)));
        if (colon == std::string_view::npos) break;
        start = colon + 1;
    }
    if (parts.size() != 3) throw ValidationError("range '" + std::string(text) + "' must have the form a:b:n");
    const double a = constant_expression(parts[0], "range start");
    const double b = constant_expression(parts[1], "range end");
    std::size_t n = 0;
    try {
        std::size_t used = 0;
        const long long v = std::stoll(parts[2], &used);
        if (used != parts[2].size() || v < 1) throw std::invalid_argument("count");
        n = static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        throw ValidationError("range '" + std::string(text) + "': point count must be a positive integer");
    }
    if (n == 1) return {a};
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        out[k] = a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1);
    }
    out.back() = b;
    return out;
}

QuerySpec parse_queries(const json& value, ProblemKind kind) {
    QuerySpec q;
    q.source = value;
    try {
        if (kind == ProblemKind::laplace_disc) {
            if (value.is_object()) {
                for (const auto& [k, v] : value.items()) {
                    if (k != "r" && k != "phi") schema_error("queries", "unknown lattice key '" + k + "'");
                    if (!v.is_string()) schema_error("queries", "lattice '" + k + "' must be a range string");
                }
                if (!value.contains("r") || !value.contains("phi")) {
                    schema_error("queries", "lattice needs both 'r' and 'phi' ranges");
                }
                const auto rs = parse_range(value.at("r").get<std::string>());
                const auto phis = parse_range(value.at("phi").get<std::string>());
                for (double r : rs) {
                    for (double phi : phis) q.polar.push_back({r, phi});
                }
            } else if (value.is_array()) {
                for (const auto& p : value) {
                    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
                        schema_error("queries", "polar points must be [r, phi] pairs");
                    }
                    q.polar.push_back({p[0].get<double>(), p[1].get<double>()});
                }
            } else {
                schema_error("queries", "expected a lattice object {\"r\": ..., \"phi\": ...} or a list of [r, phi]");
            }
            for (const auto& p : q.polar) {
                if (!(p.r >= 0.0 && p.r <= 1.0) || !std::isfinite(p.phi)) {
                    schema_error("queries", "polar point (" + std::to_string(p.r) + ", " + std::to_string(p.phi) +
                                                ") is outside the closed unit disc");
                }
            }
            if (q.polar.empty()) schema_error("queries", "no query points");
            return q;
        }
        if (value.is_string()) {
            const auto text = value.get<std::string>();
            if (text == "grid") {
                q.at_grid = true;
            } else {
                q.points = parse_range(text);
            }
        } else if (value.is_array()) {
            for (const auto& p : value) {
                if (!p.is_number()) schema_error("queries", "list entries must be numbers");
                q.points.push_back(p.get<double>());
            }
            if (q.points.empty()) schema_error("queries", "no query points");
        } else {
            schema_error("queries", "expected \"a:b:n\", \"grid\" or a list of numbers");
        }
    } catch (const ParseError& err) {
        schema_error("queries", err.what());
    } catch (const EvalError& err) {
        schema_error("queries", err.what());
    }
    return q;
}

ProblemSpec parse_problem(const json& config) {
    if (!config.is_object()) throw ValidationError("config must be a JSON object");
    if (!config.contains("kind")) schema_error("kind", "missing");
    ProblemSpec spec;
    spec.kind = parse_kind(get_string(config, "kind"));

    const std::set<std::string> extra = kind_keys(spec.kind);
    for (const auto& [key, value] : config.items()) {
        if (!kCommonKeys.contains(key) && !extra.contains(key)) {
            schema_error(key, "unknown key for kind " + std::string(to_string(spec.kind)));
        }
    }
    for (const auto& key : required_keys(spec.kind)) {
        if (!config.contains(key)) schema_error(key, "missing (required for kind " + std::string(to_string(spec.kind)) + ")");
    }

    if (config.contains("name")) spec.name = get_string(config, "name");

    if (config.contains("domain")) {
        const json& d = config.at("domain");
        if (!d.is_array() || d.size() != 2) schema_error("domain", "expected [a, b]");
        spec.a = scalar_value(d[0], "domain");
        spec.b = scalar_value(d[1], "domain");
        if (!(spec.b > spec.a)) {
            schema_error("domain", "needs finite a < b");
        }
    }

    const std::set<std::string> x_only = {"x"};
    switch (spec.kind) {
        case ProblemKind::linear_fie:
        case ProblemKind::nonlinear_fie:
            spec.kernel = get_string(config, "kernel");
            check_expression("kernel", spec.kernel, {"x", "z"});
            spec.source = get_string(config, "source");
            check_expression("source", spec.source, x_only);
            if (spec.kind == ProblemKind::nonlinear_fie) {
                spec.nonlinearity = get_string(config, "nonlinearity");
                check_expression("nonlinearity", spec.nonlinearity, {"u"});
                if (config.contains("outer_iterations")) {
                    spec.outer_iterations = get_count(config, "outer_iterations", 0);
                }
            }
            break;
        case ProblemKind::bvp:
            spec.g = get_string(config, "g");
            check_expression("g", spec.g, x_only);
            spec.h = get_string(config, "h");
            check_expression("h", spec.h, x_only);
            spec.alpha = get_number(config, "alpha");
            spec.beta = get_number(config, "beta");
            if (spec.a != 0.0 || spec.b != 1.0) schema_error("domain", "bvp problems are posed on [0, 1]");
            if (config.contains("exact_oracle")) {
                spec.exact_oracle = get_string(config, "exact_oracle");
                if (spec.exact_oracle != "airy_series") {
                    schema_error("exact_oracle", "unknown oracle '" + spec.exact_oracle + "'; expected airy_series");
                }
            }
            break;
        case ProblemKind::laplace_disc:
            spec.boundary = get_string(config, "boundary");
            check_expression("boundary", spec.boundary, {"phi"});
            spec.a = 0.0;
            spec.b = 2.0 * std::numbers::pi;
            break;
    }

    if (config.contains("exact")) {
        spec.exact = get_string(config, "exact");
        if (spec.kind == ProblemKind::laplace_disc) {
            check_expression("exact", spec.exact, {"r", "phi", "x", "y"});
        } else {
            check_expression("exact", spec.exact, x_only);
        }
        if (!spec.exact_oracle.empty()) schema_error("exact", "give either 'exact' or 'exact_oracle', not both");
    }

    if (config.contains("grid_n")) spec.grid_n = get_count(config, "grid_n", 2);
    if (config.contains("grid_scheme")) {
        try {
            spec.scheme = parse_scheme(get_string(config, "grid_scheme"));
        } catch (const ValidationError& err) {
            schema_error("grid_scheme", err.what());
        }
    }
    if (spec.kind == ProblemKind::laplace_disc && spec.scheme != Scheme::left) {
        schema_error("grid_scheme", "laplace_disc uses the periodic left-endpoint grid");
    }
    if (spec.kind == ProblemKind::laplace_disc) {
        spec.kappa = {2.0 / 3.0};
    }
    if (spec.kind == ProblemKind::nonlinear_fie) spec.layers = 7;
    if (config.contains("layers")) spec.layers = get_count(config, "layers", 1);

    if (config.contains("kappa")) {
        const json& k = config.at("kappa");
        spec.kappa.clear();
        if (k.is_number()) {
            spec.kappa.push_back(k.get<double>());
        } else if (k.is_array() && !k.empty()) {
            for (const auto& v : k) {
                if (!v.is_number()) schema_error("kappa", "sequence entries must be numbers");
                spec.kappa.push_back(v.get<double>());
            }
        } else {
            schema_error("kappa", "expected a number or a non-empty list of numbers");
        }
        for (double v : spec.kappa) {
            if (!(v > 0.0 && v <= 1.0)) schema_error("kappa", "relaxation parameters must lie in (0, 1]");
        }
    }
    if (config.contains("contractive")) {
        if (!config.at("contractive").is_boolean()) schema_error("contractive", "expected true or false");
        spec.contractive = config.at("contractive").get<bool>();
    }

    if (config.contains("queries")) {
        spec.queries = parse_queries(config.at("queries"), spec.kind);
    } else if (spec.kind == ProblemKind::laplace_disc) {
        spec.queries = parse_queries(json{{"r", "0:1:11"}, {"phi", "0:2*pi:37"}}, spec.kind);
    } else {
        spec.queries = parse_queries(json("grid"), spec.kind);
    }
    if (!spec.queries.at_grid && spec.kind != ProblemKind::laplace_disc) {
        const double tol = 1e-12 * (spec.b - spec.a);
        for (double x : spec.queries.points) {
            if (!(x >= spec.a - tol && x <= spec.b + tol)) {
                schema_error("queries", "point " + std::to_string(x) + " is outside the domain");
            }
        }
    }

    if (config.contains("sweep")) spec.sweep = get_count(config, "sweep", 1);
    if (config.contains("target_error")) {
        spec.target_error = get_number(config, "target_error");
        if (!(*spec.target_error > 0.0)) schema_error("target_error", "must be positive");
    }
    return spec;
}

ProblemSpec load_problem(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read config file '" + path.string() + "'");
    json config;
    try {
        config = json::parse(in);
    } catch (const json::parse_error& err) {
        throw ValidationError("config file '" + path.string() + "' is not valid JSON: " + err.what());
    }
    ProblemSpec spec = parse_problem(config);
    if (spec.name.empty()) spec.name = path.stem().string();
    return spec;
}

json problem_to_json(const ProblemSpec& spec) {
    json j;
    if (!spec.name.empty()) j["name"] = spec.name;
    j["kind"] = std::string(to_string(spec.kind));
    switch (spec.kind) {
        case ProblemKind::linear_fie:
        case ProblemKind::nonlinear_fie:
            j["kernel"] = spec.kernel;
            j["source"] = spec.source;
            if (spec.kind == ProblemKind::nonlinear_fie) {
                j["nonlinearity"] = spec.nonlinearity;
                j["outer_iterations"] = spec.outer_iterations;
            }
            j["domain"] = {spec.a, spec.b};
            break;
        case ProblemKind::bvp:
            j["g"] = spec.g;
            j["h"] = spec.h;
            j["alpha"] = spec.alpha;
            j["beta"] = spec.beta;
            if (!spec.exact_oracle.empty()) j["exact_oracle"] = spec.exact_oracle;
            break;
        case ProblemKind::laplace_disc:
            j["boundary"] = spec.boundary;
            break;
    }
    if (!spec.exact.empty()) j["exact"] = spec.exact;
    j["grid_n"] = spec.grid_n;
    j["grid_scheme"] = std::string(to_string(spec.scheme));
    j["layers"] = spec.layers;
    if (spec.kappa.size() == 1) {
        j["kappa"] = spec.kappa.front();
    } else {
        j["kappa"] = spec.kappa;
    }
    if (spec.contractive) j["contractive"] = *spec.contractive;
    j["queries"] = spec.queries.source;
    if (spec.sweep) j["sweep"] = *spec.sweep;
    if (spec.target_error) j["target_error"] = *spec.target_error;
    return j;
}

void apply_overrides(ProblemSpec& spec, const Overrides& o) {
    if (o.grid_n) {
        if (*o.grid_n < 2) throw ValidationError("--grid must be at least 2");
        spec.grid_n = *o.grid_n;
    }
    if (o.layers) {
        if (*o.layers < 1) throw ValidationError("--layers must be at least 1");
        spec.layers = *o.layers;
    }
    if (o.kappa) {
        if (!(*o.kappa > 0.0 && *o.kappa <= 1.0)) throw ValidationError("--kappa must lie in (0, 1]");
        spec.kappa = {*o.kappa};
    }
    if (o.scheme) {
        if (spec.kind == ProblemKind::laplace_disc && *o.scheme != Scheme::left) {
            throw ValidationError("--scheme: laplace_disc uses the periodic left-endpoint grid");
        }
        spec.scheme = *o.scheme;
    }
    if (o.sweep) {
        if (*o.sweep < 1) throw ValidationError("--sweep must be at least 1");
        spec.sweep = *o.sweep;
    }
    if (o.queries) {
        try {
            if (spec.kind == ProblemKind::laplace_disc) {
                json lattice = spec.queries.source.is_object() ? spec.queries.source : json{{"phi", "0:2*pi:37"}};
                lattice["r"] = *o.queries;
                spec.queries = parse_queries(lattice, spec.kind);
            } else {
                spec.queries = parse_queries(json(*o.queries), spec.kind);
            }
        } catch (const ValidationError& err) {
            throw ValidationError(std::string("--queries: ") + err.what());
        }
    }
}

}  // namespace fredholm
