#include "fredholm/nonlinear.hpp"

#include <cmath>
#include <string>

#include "fredholm/error.hpp"

namespace fredholm {

namespace {

Eigen::VectorXd apply_nonlinearity(const ScalarFunction& g, const Eigen::VectorXd& values) {
    Eigen::VectorXd out(values.size());
    for (Eigen::Index j = 0; j < values.size(); ++j) {
        double v = 0.0;
        try {
            v = g(values(j));
        } catch (const EvalError& e) {
            throw EvalError(std::string(e.what()) + " (nonlinearity at node " + std::to_string(j) +
                            ", u = " + std::to_string(values(j)) + ")");
        }
        if (!std::isfinite(v)) {
            throw NumericalError("nonlinearity is not finite at node " + std::to_string(j));
        }
        out(j) = v;
    }
    return out;
}

struct LinearPass {
    Eigen::VectorXd hidden;
    Eigen::VectorXd output;
};

// One outer pass: network on the grid, then the query layer at the nodes.
LinearPass solve_linear_pass(const std::shared_ptr<const DiscreteOperator>& op, const Eigen::VectorXd& source,
                             const NonlinearOptions& options) {
    const FredholmNet net(op, options.layers, options.schedule, source);
    SolutionField hidden = forward(net);
    Eigen::VectorXd output = QueryLayer::at_nodes(*op, source).apply(hidden.values);
    return {std::move(hidden.values), std::move(output)};
}

}  // namespace

Eigen::VectorXd linearized_source(const DiscreteOperator& op, const ScalarFunction& nonlinearity,
                                  const Eigen::VectorXd& previous) {
    if (previous.size() != static_cast<Eigen::Index>(op.size())) {
        throw ValidationError("previous iterate does not live on the operator grid");
    }
    const Eigen::VectorXd correction = apply_nonlinearity(nonlinearity, previous) - previous;
    Eigen::VectorXd out = op.matrix() * correction;
    out += op.source();
    return out;
}

NonlinearSolution solve_nonlinear(const NonlinearProblem& problem, const Grid1D& grid,
                                  const NonlinearOptions& options) {
    if (!problem.nonlinearity) throw ValidationError("nonlinear problem needs a nonlinearity");
    if (options.outer_iterations < 1) throw ValidationError("outer_iterations must be >= 1");
    if (options.layers < 1) throw ValidationError("layers must be >= 1");

    auto op = std::make_shared<const DiscreteOperator>(
        discretize(FieProblem{problem.kernel, problem.source, problem.a, problem.b, problem.nonlinearity}, grid));

    NonlinearSolution out{op, SolutionField{grid, {}, {}}, {}, {}, op->source(), {}};
    out.trace.sources.push_back(op->source());
    LinearPass pass = solve_linear_pass(op, op->source(), options);
    out.trace.iterations = 1;
    out.previous = Eigen::VectorXd::Zero(pass.output.size());

    for (std::size_t n = 1; n <= options.outer_iterations; ++n) {
        Eigen::VectorXd source = linearized_source(*op, problem.nonlinearity, pass.output);
        LinearPass next = solve_linear_pass(op, source, options);
        if (!next.output.allFinite()) throw NumericalError("outer iteration " + std::to_string(n) + " diverged");

        out.trace.deltas.push_back((next.output - pass.output).cwiseAbs().maxCoeff());
        out.trace.sources.push_back(source);
        out.trace.iterations += 1;
        out.previous = std::move(pass.output);
        out.last_source = std::move(source);
        pass = std::move(next);
        if (options.early_stop && out.trace.deltas.back() < *options.early_stop) break;
    }
    out.field.values = std::move(pass.output);
    out.hidden = std::move(pass.hidden);
    return out;
}

std::vector<double> query_nonlinear(const NonlinearSolution& solution, const NonlinearProblem& problem,
                                    std::span<const double> points) {
    const DiscreteOperator& op = *solution.op;
    // Source of the last linear pass at the query points: g(x) + sum_j K(x,z_j) dz (G(f_j) - f_j).
    const QueryLayer kernel_rows(op, points, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(points.size())));
    Eigen::VectorXd source(static_cast<Eigen::Index>(points.size()));
    for (std::size_t k = 0; k < points.size(); ++k) source(static_cast<Eigen::Index>(k)) = problem.source(points[k]);
    if (solution.trace.iterations > 1) {
        const Eigen::VectorXd correction =
            apply_nonlinearity(problem.nonlinearity, solution.previous) - solution.previous;
        source += kernel_rows.weights() * correction;
    }
    const Eigen::VectorXd out = kernel_rows.weights() * solution.hidden + source;
    return {out.begin(), out.end()};
}

}  // namespace fredholm
