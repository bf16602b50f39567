#pragma once

// Nonlinear equations f = g + \int K G(f) are solved by re-linearization:
// each outer pass solves the linear equation
//     f_n = g_n + \int K f_n,   g_n = g + \int K (G(f_{n-1}) - f_{n-1})
// with a Fredholm network.  The first pass uses g_0 = g; `outer_iterations`
// counts the re-linearized passes that follow it.

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "fredholm/network.hpp"

namespace fredholm {

struct NonlinearProblem {
    Kernel kernel;
    ScalarFunction source;
    ScalarFunction nonlinearity;
    double a = 0.0;
    double b = 1.0;
};

struct IterationTrace {
    std::size_t iterations = 0;           // linear solves performed
    std::vector<double> deltas;           // ||f_n - f_{n-1}||_inf, n >= 1
    std::vector<Eigen::VectorXd> sources; // g_0, g_1, ...
};

struct NonlinearOptions {
    std::size_t outer_iterations = 5;
    std::size_t layers = 7;
    KmSchedule schedule = KmSchedule::constant(1.0, true);
    std::optional<double> early_stop;  // stop once a delta falls below this
};

struct NonlinearSolution {
    std::shared_ptr<const DiscreteOperator> op;
    SolutionField field;             // f at the grid nodes after the last pass
    Eigen::VectorXd hidden;          // last hidden layer h_M of the last pass
    Eigen::VectorXd previous;        // iterate that defined the last source
    Eigen::VectorXd last_source;     // g_n of the last pass
    IterationTrace trace;
};

/// g(z_i) + sum_j A_ij (G(f_j) - f_j).  G failures are reported with the node index.
Eigen::VectorXd linearized_source(const DiscreteOperator& op, const ScalarFunction& nonlinearity,
                                  const Eigen::VectorXd& previous);

NonlinearSolution solve_nonlinear(const NonlinearProblem& problem, const Grid1D& grid,
                                  const NonlinearOptions& options);

/// Solution at arbitrary points of [a, b] through the last linear pass's query layer.
std::vector<double> query_nonlinear(const NonlinearSolution& solution, const NonlinearProblem& problem,
                                    std::span<const double> points);

}  // namespace fredholm
