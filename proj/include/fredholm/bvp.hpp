#pragma once

// Two-point problems y'' + g(x) y = h(x) on (0, 1), y(0) = alpha, y(1) = beta,
// rewritten for u = y'' as u(x) = f(x) + \int_0^1 K(x,t) u(t) dt with
//     K(x,t) = t (1-x) g(x)   for t <= x
//              x (1-t) g(x)   for t >= x
//     f(x)   = h(x) - alpha g(x) - (beta - alpha) x g(x)
// and recovered through y = (h - u) / g.

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fredholm/network.hpp"

namespace fredholm {

struct BvpSpec {
    ScalarFunction g;
    ScalarFunction h;
    double alpha = 0.0;
    double beta = 0.0;
};

/// Green's-function kernel of y'' on (0,1) with homogeneous Dirichlet ends, times g(x).
double bvp_kernel(double x, double t, double gx) noexcept;

FieProblem bvp_to_fie(const BvpSpec& spec);

struct BvpSolution {
    std::shared_ptr<const DiscreteOperator> op;
    FredholmNet net;
    SolutionField u;     // hidden output on the grid
    double g_scale;      // max |g| over the grid nodes
    double contraction;  // estimate_contraction(op)
};

/// Discretizes on `grid` (which must cover [0, 1]) and runs the network.
BvpSolution solve_bvp(const BvpSpec& spec, const Grid1D& grid, std::size_t layers, const KmSchedule& schedule);

struct RecoveryOptions {
    double tol_g = 1e-12;  // relative to g_scale
};

/// y at the query points.  x = 0 and x = 1 return alpha and beta.  Where
/// |g(x)| < tol_g * g_scale, y is linearly interpolated from the neighbouring
/// recoverable queries (in the order given, which must be ascending for this to
/// be meaningful); a run of three or more such queries is an error.
std::vector<double> recover_solution(const BvpSolution& solution, const BvpSpec& spec,
                                     std::span<const double> queries, const RecoveryOptions& options = {});

/// Reference solution of y'' + x y = 0, y(0) = 0, y(1) = beta, from the power
/// series of the odd fundamental solution (a_{n+3} = -a_n / ((n+3)(n+2))).
double airy_bvp_reference(double x, double beta);

}  // namespace fredholm
