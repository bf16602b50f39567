#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <optional>
#include <string>

#include "fredholm/config.hpp"
#include "fredholm/error.hpp"
#include "fredholm/expr.hpp"
#include "fredholm/network.hpp"
#include "fredholm/polar_fd.hpp"
#include "fredholm/report.hpp"

namespace py = pybind11;
using namespace fredholm;

namespace {

Overrides make_overrides(std::optional<std::size_t> grid, std::optional<std::size_t> layers,
                         std::optional<double> kappa, std::optional<std::string> scheme,
                         std::optional<std::string> queries, std::optional<std::size_t> sweep) {
    Overrides o;
    o.grid_n = grid;
    o.layers = layers;
    o.kappa = kappa;
    if (scheme) o.scheme = parse_scheme(*scheme);
    o.queries = std::move(queries);
    o.sweep = sweep;
    return o;
}

ScalarFunction compile1(const std::string& text, const char* var) {
    auto c = std::make_shared<const expr::CompiledExpr>(expr::parse(text), std::vector<std::string>{var});
    return [c](double x) { return (*c)(x); };
}

std::shared_ptr<const DiscreteOperator> linear_operator(const std::string& kernel, const std::string& source, double a,
                                                        double b, std::size_t n, const std::string& scheme) {
    auto k = std::make_shared<const expr::CompiledExpr>(expr::parse(kernel), std::vector<std::string>{"x", "z"});
    const FieProblem problem{[k](double x, double z) { return (*k)(x, z); }, compile1(source, "x"), a, b,
                             std::nullopt};
    return std::make_shared<const DiscreteOperator>(discretize(problem, uniform_grid(a, b, n, parse_scheme(scheme))));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Fredholm network solvers";

    // Later registrations are tried first, so the base class goes first.
    auto base = py::register_exception<Error>(m, "FredholmError", PyExc_RuntimeError);
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<EvalError>(m, "EvalError", base.ptr());
    py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
    py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

    m.def(
        "eval_expr",
        [](const std::string& source, const std::map<std::string, double>& env) {
            return expr::eval(expr::parse(source), expr::Bindings(env.begin(), env.end()));
        },
        py::arg("source"), py::arg("env") = std::map<std::string, double>{});
    m.def("free_vars", [](const std::string& source) { return expr::free_vars(expr::parse(source)); });
    m.def("render_expr", [](const std::string& source) { return expr::render(expr::parse(source)); });

    m.def("example_names", &example_names);
    m.def("example_config", [](const std::string& name) { return example_config(name).dump(); });

    // Reports come back as JSON text; the Python layer decodes them.
    m.def(
        "run_example",
        [](const std::string& name, bool deterministic, std::optional<std::size_t> grid,
           std::optional<std::size_t> layers, std::optional<double> kappa, std::optional<std::string> scheme,
           std::optional<std::string> queries, std::optional<std::size_t> sweep) {
            const Overrides o = make_overrides(grid, layers, kappa, scheme, queries, sweep);
            py::gil_scoped_release release;
            return render_json(run_example(name, o, RunOptions{deterministic}));
        },
        py::arg("name"), py::arg("deterministic") = true, py::arg("grid") = py::none(),
        py::arg("layers") = py::none(), py::arg("kappa") = py::none(), py::arg("scheme") = py::none(),
        py::arg("queries") = py::none(), py::arg("sweep") = py::none());

    m.def(
        "run_config",
        [](const std::string& config_json, bool deterministic) {
            const ProblemSpec spec = parse_problem(nlohmann::ordered_json::parse(config_json));
            py::gil_scoped_release release;
            return render_json(run_problem(spec, RunOptions{deterministic}));
        },
        py::arg("config_json"), py::arg("deterministic") = true);

    m.def(
        "render_csv",
        [](const std::string& report_json) { return render_solution_csv(parse_report_json(report_json)); },
        py::arg("report_json"));

    m.def(
        "linear_network",
        [](const std::string& kernel, const std::string& source, double a, double b, std::size_t n,
           std::size_t layers, double kappa, const std::string& scheme, bool contractive) {
            auto op = linear_operator(kernel, source, a, b, n, scheme);
            const FredholmNet net(op, layers, KmSchedule::constant(kappa, contractive).with_form(KmForm::relaxed));
            const SolutionField field = forward(net, true);
            const auto nodes = op->grid().nodes();
            Eigen::MatrixXd history(static_cast<Eigen::Index>(field.history.size()), field.values.size());
            for (std::size_t m2 = 0; m2 < field.history.size(); ++m2) {
                history.row(static_cast<Eigen::Index>(m2)) = field.history[m2].transpose();
            }
            py::dict out;
            out["nodes"] = Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(nodes.data(), nodes.size()));
            out["hidden"] = field.values;
            out["history"] = history;
            out["matrix"] = op->matrix();
            out["q_est"] = estimate_contraction(*op);
            return out;
        },
        py::arg("kernel"), py::arg("source"), py::arg("a"), py::arg("b"), py::arg("n"), py::arg("layers"),
        py::arg("kappa") = 1.0, py::arg("scheme") = "left", py::arg("contractive") = true);

    m.def(
        "plan_layers",
        [](const std::string& kernel, const std::string& source, double a, double b, std::size_t n,
           const std::string& scheme, double epsilon) {
            const ErrorBudget budget = make_error_budget(*linear_operator(kernel, source, a, b, n, scheme));
            return plan_layers(budget, epsilon).layers;
        },
        py::arg("kernel"), py::arg("source"), py::arg("a"), py::arg("b"), py::arg("n"), py::arg("scheme"),
        py::arg("epsilon"));

    m.def(
        "solve_fd",
        [](const std::string& boundary, std::size_t nr, std::size_t ntheta, double tol) {
            PolarFdOptions o;
            o.radial_cells = nr;
            o.angular_cells = ntheta;
            o.tol = tol;
            const ScalarFunction f = compile1(boundary, "phi");
            PolarGridSolution s = [&] {
                py::gil_scoped_release release;
                return solve_fd(f, o);
            }();
            Eigen::MatrixXd u(static_cast<Eigen::Index>(nr + 1), static_cast<Eigen::Index>(ntheta));
            for (std::size_t i = 0; i <= nr; ++i)
                for (std::size_t j = 0; j < ntheta; ++j) u(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s.at(i, j);
            return py::make_tuple(u, s.residual, s.iterations);
        },
        py::arg("boundary"), py::arg("nr") = 100, py::arg("ntheta") = 100, py::arg("tol") = 1e-10);
}
