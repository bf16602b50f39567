#include <chrono>
#include <cmath>
#include <map>
#include <memory>
#include <numbers>

#include "fredholm/bvp.hpp"
#include "fredholm/error.hpp"
#include "fredholm/expr.hpp"
#include "fredholm/laplace_disc.hpp"
#include "fredholm/nonlinear.hpp"
#include "fredholm/polar_fd.hpp"
#include "fredholm/report.hpp"

namespace fredholm {

using json = nlohmann::ordered_json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

ScalarFunction compile_unary(const std::string& text, const char* var) {
    auto c = std::make_shared<const expr::CompiledExpr>(expr::parse(text), std::vector<std::string>{var});
    return [c](double x) { return (*c)(x); };
}

Kernel compile_kernel(const std::string& text) {
    auto c = std::make_shared<const expr::CompiledExpr>(expr::parse(text), std::vector<std::string>{"x", "z"});
    return [c](double x, double z) { return (*c)(x, z); };
}

KmSchedule make_schedule(const std::vector<double>& kappa, bool contractive) {
    // Config kappas always relax the operator, so the fixed point does not depend on them.
    if (kappa.size() == 1) return KmSchedule::constant(kappa.front(), contractive).with_form(KmForm::relaxed);
    return KmSchedule::sequence(kappa, contractive).with_form(KmForm::relaxed);
}

std::vector<double> query_points(const ProblemSpec& spec, const Grid1D& grid) {
    if (spec.queries.at_grid) {
        const auto nodes = grid.nodes();
        return {nodes.begin(), nodes.end()};
    }
    return spec.queries.points;
}

ScalarFunction exact_function(const ProblemSpec& spec) {
    if (spec.exact_oracle == "airy_series") {
        return [beta = spec.beta](double x) { return airy_bvp_reference(x, beta); };
    }
    if (!spec.exact.empty()) return compile_unary(spec.exact, "x");
    return {};
}

void fill_rows(ReportBundle& bundle, const std::vector<double>& points, const std::vector<double>& values,
               const ScalarFunction& exact) {
    bundle.coord_names = {"x"};
    bundle.solution.reserve(points.size());
    std::optional<double> worst;
    for (std::size_t k = 0; k < points.size(); ++k) {
        SolutionRow row{{points[k]}, values[k], std::nullopt, std::nullopt};
        if (exact) {
            row.exact = exact(points[k]);
            row.abs_err = std::fabs(values[k] - *row.exact);
            worst = std::max(worst.value_or(0.0), *row.abs_err);
        }
        bundle.solution.push_back(std::move(row));
    }
    bundle.metadata.max_abs_err = worst;
}

void fill_budget(ReportMetadata& meta, const DiscreteOperator& op, const KmSchedule& schedule, std::size_t layers,
                 std::optional<double> target) {
    ErrorBudget budget = make_error_budget(op);
    meta.q_est = budget.q;
    meta.residual = budget.residual;
    meta.derivative_bound = budget.D;
    const bool plain = schedule.is_constant() && schedule.at(1) == 1.0;
    if (budget.q < 1.0) {
        // The a-priori bound is stated for plain successive approximations.
        if (plain) meta.error_bound = error_bound(budget, layers);
        meta.km_estimate = km_error_estimate(budget, schedule, layers);
        if (target && plain) meta.planned_layers = plan_layers(budget, *target).layers;
    } else if (target) {
        meta.warnings.push_back("q_est >= 1: no a-priori bound, target_error not planned");
    }
}

// Sweeps for solvers without an incremental form: rerun with 1..max layers.
template <typename Solve>
std::vector<SweepRow> rerun_sweep(std::size_t max_layers, const std::vector<double>& points,
                                  const ScalarFunction& exact, Solve&& solve) {
    std::vector<SweepRow> rows;
    std::vector<double> reference;
    if (exact) {
        for (double x : points) reference.push_back(exact(x));
    }
    std::vector<double> previous;
    for (std::size_t m = 1; m <= max_layers; ++m) {
        const std::vector<double> values = solve(m);
        double err = 0.0;
        for (std::size_t k = 0; k < values.size(); ++k) {
            const double ref = exact ? reference[k] : (previous.empty() ? 0.0 : previous[k]);
            err = std::max(err, std::fabs(values[k] - ref));
        }
        rows.push_back({m, err});
        previous = values;
    }
    return rows;
}

void run_linear(const ProblemSpec& spec, ReportBundle& bundle) {
    const Grid1D grid = uniform_grid(spec.a, spec.b, spec.grid_n, spec.scheme);
    const FieProblem fie{compile_kernel(spec.kernel), compile_unary(spec.source, "x"), spec.a, spec.b, std::nullopt};
    auto op = std::make_shared<const DiscreteOperator>(discretize(fie, grid));
    const double q = estimate_contraction(*op);
    const KmSchedule schedule = make_schedule(spec.kappa, spec.contractive.value_or(q < 1.0));

    const FredholmNet net(op, spec.layers, schedule);
    const SolutionField field = forward(net);
    const std::vector<double> points = query_points(spec, grid);
    const std::vector<double> values = query(net, field, points);
    bundle.metadata.iterations = 1;

    const ScalarFunction exact = exact_function(spec);
    fill_rows(bundle, points, values, exact);
    fill_budget(bundle.metadata, *op, schedule, spec.layers, spec.target_error);
    if (spec.sweep) bundle.sweep = layer_sweep(op, schedule, *spec.sweep, exact, points);
}

void run_nonlinear(const ProblemSpec& spec, ReportBundle& bundle) {
    const Grid1D grid = uniform_grid(spec.a, spec.b, spec.grid_n, spec.scheme);
    const NonlinearProblem problem{compile_kernel(spec.kernel), compile_unary(spec.source, "x"),
                                   compile_unary(spec.nonlinearity, "u"), spec.a, spec.b};
    const FieProblem linear{problem.kernel, problem.source, spec.a, spec.b, std::nullopt};
    const double q = estimate_contraction(discretize(linear, grid));
    NonlinearOptions options;
    options.outer_iterations = spec.outer_iterations;
    options.layers = spec.layers;
    options.schedule = make_schedule(spec.kappa, spec.contractive.value_or(q < 1.0));

    const NonlinearSolution solution = solve_nonlinear(problem, grid, options);
    const std::vector<double> points = query_points(spec, grid);
    const std::vector<double> values = query_nonlinear(solution, problem, points);
    bundle.metadata.iterations = solution.trace.iterations;
    bundle.metadata.q_est = q;
    bundle.metadata.residual = residual_norm(*solution.op);

    const ScalarFunction exact = exact_function(spec);
    fill_rows(bundle, points, values, exact);
    if (spec.sweep) {
        bundle.sweep = rerun_sweep(*spec.sweep, points, exact, [&](std::size_t m) {
            NonlinearOptions o = options;
            o.layers = m;
            return query_nonlinear(solve_nonlinear(problem, grid, o), problem, points);
        });
    }
}

void run_bvp(const ProblemSpec& spec, ReportBundle& bundle) {
    const Grid1D grid = uniform_grid(0.0, 1.0, spec.grid_n, spec.scheme);
    const BvpSpec bvp{compile_unary(spec.g, "x"), compile_unary(spec.h, "x"), spec.alpha, spec.beta};
    // Contractivity depends on g; the bound is checked after the fact and only warned about.
    const KmSchedule schedule = make_schedule(spec.kappa, spec.contractive.value_or(true));

    const BvpSolution solution = solve_bvp(bvp, grid, spec.layers, schedule);
    if (!(solution.contraction < 1.0)) {
        bundle.metadata.warnings.push_back("q_est = " + format_number(solution.contraction) +
                                           " >= 1: the integral operator may not be a contraction");
    }
    const std::vector<double> points = query_points(spec, grid);
    const std::vector<double> values = recover_solution(solution, bvp, points);
    bundle.metadata.iterations = 1;

    const ScalarFunction exact = exact_function(spec);
    fill_rows(bundle, points, values, exact);
    fill_budget(bundle.metadata, *solution.op, schedule, spec.layers, spec.target_error);
    if (spec.sweep) {
        bundle.sweep = rerun_sweep(*spec.sweep, points, exact, [&](std::size_t m) {
            return recover_solution(solve_bvp(bvp, grid, m, schedule), bvp, points);
        });
    }

    // Second difference of the recovered y against the ODE on uniformly spaced queries.
    if (points.size() >= 5) {
        const double dx = points[1] - points[0];
        bool uniform = dx > 0.0;
        for (std::size_t k = 1; uniform && k < points.size(); ++k) {
            uniform = std::fabs((points[k] - points[k - 1]) - dx) <= 1e-9 * dx;
        }
        if (uniform) {
            double worst = 0.0;
            for (std::size_t k = 1; k + 1 < points.size(); ++k) {
                const double ypp = (values[k + 1] - 2.0 * values[k] + values[k - 1]) / (dx * dx);
                const double x = points[k];
                worst = std::max(worst, std::fabs(ypp + bvp.g(x) * values[k] - bvp.h(x)));
            }
            bundle.metadata.stats.emplace_back("ode_residual", worst);
        }
    }
}

void run_laplace(const ProblemSpec& spec, ReportBundle& bundle) {
    DiscBoundaryProblem problem;
    problem.boundary = compile_unary(spec.boundary, "phi");
    problem.theta_n = spec.grid_n;
    problem.layers = spec.layers;
    // The disc BIE operator has norm exactly 1: non-expansive, not contractive.
    problem.schedule = make_schedule(spec.kappa, spec.contractive.value_or(false));

    const BoundaryDensity density = solve_density(problem);
    const PotentialField field = evaluate_potential(density, spec.queries.polar);
    bundle.metadata.iterations = 1;
    bundle.metadata.q_est = estimate_contraction(*density.op);
    bundle.metadata.residual = residual_norm(*density.op);

    std::function<double(double, double)> exact;
    if (!spec.exact.empty()) {
        auto c = std::make_shared<const expr::CompiledExpr>(expr::parse(spec.exact),
                                                            std::vector<std::string>{"r", "phi", "x", "y"});
        exact = [c](double r, double phi) {
            const double args[4] = {r, phi, r * std::cos(phi), r * std::sin(phi)};
            return (*c)(std::span<const double>(args, 4));
        };
    }
    bundle.coord_names = {"r", "phi"};
    std::optional<double> worst;
    for (std::size_t k = 0; k < field.points.size(); ++k) {
        const PolarPoint& p = field.points[k];
        SolutionRow row{{p.r, p.phi}, field.values[k], std::nullopt, std::nullopt};
        if (exact) {
            row.exact = exact(p.r, p.phi);
            row.abs_err = std::fabs(row.value - *row.exact);
            worst = std::max(worst.value_or(0.0), *row.abs_err);
        }
        bundle.solution.push_back(std::move(row));
    }
    bundle.metadata.max_abs_err = worst;
    if (spec.sweep) {
        if (exact) {
            for (const auto& r : disc_layer_sweep(problem, *spec.sweep, spec.queries.polar, exact)) {
                bundle.sweep.push_back({r.layers, r.max_error});
            }
        } else {
            std::vector<double> previous;
            for (std::size_t m = 1; m <= *spec.sweep; ++m) {
                DiscBoundaryProblem p = problem;
                p.layers = m;
                const PotentialField f = evaluate_potential(solve_density(p), spec.queries.polar);
                double err = 0.0;
                for (std::size_t k = 0; k < f.values.size(); ++k) {
                    err = std::max(err, std::fabs(f.values[k] - (previous.empty() ? 0.0 : previous[k])));
                }
                bundle.sweep.push_back({m, err});
                previous = f.values;
            }
        }
    }
}

}  // namespace

ReportBundle run_problem(const ProblemSpec& spec, const RunOptions& options) {
    const auto start = Clock::now();
    ReportBundle bundle;
    ReportMetadata& meta = bundle.metadata;
    meta.problem = spec.name;
    meta.kind = std::string(to_string(spec.kind));
    meta.scheme = spec.kind == ProblemKind::laplace_disc ? "periodic-left" : std::string(to_string(spec.scheme));
    meta.grid_n = spec.grid_n;
    meta.layers = spec.layers;
    meta.kappa = spec.kappa;
    meta.target_error = spec.target_error;
    meta.config = problem_to_json(spec);

    switch (spec.kind) {
        case ProblemKind::linear_fie: run_linear(spec, bundle); break;
        case ProblemKind::nonlinear_fie: run_nonlinear(spec, bundle); break;
        case ProblemKind::bvp: run_bvp(spec, bundle); break;
        case ProblemKind::laplace_disc: run_laplace(spec, bundle); break;
    }
    if (!options.deterministic) meta.timings.emplace_back("total", seconds_since(start));
    return bundle;
}

ReportBundle compare_fd(const ProblemSpec& spec, const PolarFdOptions& fd, std::size_t max_axis,
                        const RunOptions& options) {
    if (spec.kind != ProblemKind::laplace_disc) {
        throw ValidationError("compare-fd needs a laplace_disc problem, got " + std::string(to_string(spec.kind)));
    }
    if (max_axis < 1) throw ValidationError("compare-fd needs at least one sample per axis");
    const auto start = Clock::now();
    ReportBundle bundle;
    ReportMetadata& meta = bundle.metadata;
    meta.problem = spec.name;
    meta.kind = "laplace_disc_fd";
    meta.scheme = "polar-5-point";
    meta.grid_n = spec.grid_n;
    meta.layers = spec.layers;
    meta.kappa = spec.kappa;
    meta.config = problem_to_json(spec);
    meta.config["fd"] = {{"nr", fd.radial_cells}, {"ntheta", fd.angular_cells}, {"tol", fd.tol}};

    const ScalarFunction boundary = compile_unary(spec.boundary, "phi");
    const PolarGridSolution sol = solve_fd(boundary, fd);
    meta.iterations = sol.iterations;
    meta.residual = sol.residual;
    const auto fd_done = Clock::now();

    DiscBoundaryProblem problem;
    problem.boundary = boundary;
    problem.theta_n = spec.grid_n;
    problem.layers = spec.layers;
    problem.schedule = make_schedule(spec.kappa, spec.contractive.value_or(false));
    const BoundaryDensity density = solve_density(problem);

    std::function<double(double, double)> exact;
    if (!spec.exact.empty()) {
        auto c = std::make_shared<const expr::CompiledExpr>(expr::parse(spec.exact),
                                                            std::vector<std::string>{"r", "phi", "x", "y"});
        exact = [c](double r, double phi) {
            const double args[4] = {r, phi, r * std::cos(phi), r * std::sin(phi)};
            return (*c)(std::span<const double>(args, 4));
        };
    }

    const std::size_t nr = sol.radial_cells();
    const std::size_t nt = sol.angular_cells();
    if (exact) {
        double worst = 0.0;
        for (std::size_t i = 0; i <= nr; ++i) {
            for (std::size_t j = 0; j < (i == 0 ? 1 : nt); ++j) {
                worst = std::max(worst, std::fabs(sol.at(i, j) - exact(sol.radius(i), sol.angle(j))));
            }
        }
        meta.stats.emplace_back("fd_max_err_all_nodes", worst);
    }
    meta.stats.emplace_back("fd_center", sol.center());

    // Subsampled node set shared by the table and the network comparison.
    const std::size_t sr = std::max<std::size_t>(1, (nr + max_axis - 1) / max_axis);
    const std::size_t st = std::max<std::size_t>(1, (nt + max_axis - 1) / max_axis);
    std::vector<PolarPoint> points;
    std::vector<double> fd_values;
    for (std::size_t i = 0;; i = std::min(i + sr, nr)) {
        for (std::size_t j = 0; j < nt; j += st) {
            points.push_back({sol.radius(i), sol.angle(j)});
            fd_values.push_back(sol.at(i, j));
            if (i == 0) break;
        }
        if (i == nr) break;
    }
    const PotentialField nn = evaluate_potential(density, points);
    const FieldComparison diff = compare_fields(fd_values, nn.values);
    meta.stats.emplace_back("fd_vs_network_max", diff.max_abs);
    meta.stats.emplace_back("fd_vs_network_mean", diff.mean_abs);

    bundle.coord_names = {"r", "phi"};
    std::vector<double> exact_values;
    for (std::size_t k = 0; k < points.size(); ++k) {
        SolutionRow row{{points[k].r, points[k].phi}, fd_values[k], std::nullopt, std::nullopt};
        if (exact) {
            row.exact = exact(points[k].r, points[k].phi);
            row.abs_err = std::fabs(row.value - *row.exact);
            exact_values.push_back(*row.exact);
        }
        bundle.solution.push_back(std::move(row));
    }
    if (exact) {
        const FieldComparison fd_err = compare_fields(fd_values, exact_values);
        const FieldComparison nn_err = compare_fields(nn.values, exact_values);
        meta.max_abs_err = fd_err.max_abs;
        meta.stats.emplace_back("fd_max_err_sampled", fd_err.max_abs);
        meta.stats.emplace_back("network_max_err_sampled", nn_err.max_abs);
    }
    if (!options.deterministic) {
        meta.timings.emplace_back("fd", std::chrono::duration<double>(fd_done - start).count());
        meta.timings.emplace_back("total", seconds_since(start));
    }
    return bundle;
}

}  // namespace fredholm
