#pragma once

// JSON problem configs.
//
//   {
//     "kind": "linear_fie" | "nonlinear_fie" | "bvp" | "laplace_disc",
//     "kernel": "x*z", "source": "exp(x)", "domain": [0, 1],
//     "grid_n": 2000, "grid_scheme": "closed", "layers": 10,
//     "kappa": 1 | [0.5, 0.7, ...], "contractive": true,
//     "queries": "0:1:1001" | [0.1, 0.2] | "grid",
//     "exact": "exp(x) + 1", "sweep": 20, "target_error": 1e-6
//   }
//
// nonlinear_fie adds "nonlinearity" (in u) and "outer_iterations"; bvp uses
// "g", "h", "alpha", "beta" on [0, 1]; laplace_disc uses "boundary" (in phi)
// and queries {"r": "0:1:51", "phi": "0:2*pi:72"} or [[r, phi], ...].
// Range bounds are expressions, so "2*pi" is accepted.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fredholm/grid.hpp"
#include "fredholm/laplace_disc.hpp"
#include "json.hpp"

namespace fredholm {

enum class ProblemKind { linear_fie, nonlinear_fie, bvp, laplace_disc };

ProblemKind parse_kind(std::string_view text);
std::string_view to_string(ProblemKind kind);

struct QuerySpec {
    bool at_grid = false;             // "grid": the quadrature nodes
    std::vector<double> points;       // 1-D problems
    std::vector<PolarPoint> polar;    // laplace_disc
    nlohmann::ordered_json source;    // the config value, echoed in reports
};

struct ProblemSpec {
    std::string name;
    ProblemKind kind = ProblemKind::linear_fie;

    std::string kernel;        // {x, z}
    std::string source;        // {x}
    std::string nonlinearity;  // {u}
    std::string g;             // {x}
    std::string h;             // {x}
    std::string boundary;      // {phi}
    std::string exact;         // {x}, or {r, phi, x, y} for laplace_disc
    std::string exact_oracle;  // "airy_series" (bvp only)

    double a = 0.0;
    double b = 1.0;
    double alpha = 0.0;
    double beta = 0.0;

    std::size_t grid_n = 1000;
    Scheme scheme = Scheme::left;
    std::size_t layers = 10;
    std::vector<double> kappa{1.0};
    std::optional<bool> contractive;  // inferred from q_est < 1 when absent
    std::size_t outer_iterations = 5;

    QuerySpec queries;
    std::optional<std::size_t> sweep;
    std::optional<double> target_error;
};

/// Schema and expression validation; errors name the offending key.
ProblemSpec parse_problem(const nlohmann::ordered_json& config);
ProblemSpec load_problem(const std::filesystem::path& path);

/// Canonical config for a spec; parse_problem(problem_to_json(s)) reproduces s.
nlohmann::ordered_json problem_to_json(const ProblemSpec& spec);

/// "a:b:n", n points from a to b inclusive; a and b may be constant expressions.
std::vector<double> parse_range(std::string_view text);

QuerySpec parse_queries(const nlohmann::ordered_json& value, ProblemKind kind);

struct Overrides {
    std::optional<std::size_t> grid_n;
    std::optional<std::size_t> layers;
    std::optional<double> kappa;
    std::optional<Scheme> scheme;
    std::optional<std::string> queries;  // "a:b:n"; the radial range for laplace_disc
    std::optional<std::size_t> sweep;
};

void apply_overrides(ProblemSpec& spec, const Overrides& overrides);

}  // namespace fredholm
