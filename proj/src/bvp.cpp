#include "fredholm/bvp.hpp"

#include <cmath>

#include "fredholm/error.hpp"

namespace fredholm {

double bvp_kernel(double x, double t, double gx) noexcept {
    return t <= x ? t * (1.0 - x) * gx : x * (1.0 - t) * gx;
}

FieProblem bvp_to_fie(const BvpSpec& spec) {
    if (!spec.g || !spec.h) throw ValidationError("BVP needs both g and h");
    FieProblem problem;
    problem.a = 0.0;
    problem.b = 1.0;
    problem.kernel = [g = spec.g](double x, double t) { return bvp_kernel(x, t, g(x)); };
    problem.source = [g = spec.g, h = spec.h, alpha = spec.alpha, beta = spec.beta](double x) {
        const double gx = g(x);
        return h(x) - alpha * gx - (beta - alpha) * x * gx;
    };
    return problem;
}

BvpSolution solve_bvp(const BvpSpec& spec, const Grid1D& grid, std::size_t layers, const KmSchedule& schedule) {
    if (grid.periodic() || grid.a() != 0.0 || grid.b() != 1.0) {
        throw ValidationError("BVP grids must be interval grids on [0, 1]");
    }
    auto op = std::make_shared<const DiscreteOperator>(discretize(bvp_to_fie(spec), grid));
    double scale = 0.0;
    for (double x : grid.nodes()) scale = std::max(scale, std::fabs(spec.g(x)));
    FredholmNet net(op, layers, schedule);
    SolutionField u = forward(net);
    const double q = estimate_contraction(*op);
    return {op, std::move(net), std::move(u), scale, q};
}

std::vector<double> recover_solution(const BvpSolution& solution, const BvpSpec& spec,
                                     std::span<const double> queries, const RecoveryOptions& options) {
    const std::vector<double> u = query(solution.net, solution.u, queries);
    const double threshold = options.tol_g * solution.g_scale;
    const std::size_t n = queries.size();

    std::vector<double> y(n, 0.0);
    std::vector<bool> known(n, false);
    for (std::size_t k = 0; k < n; ++k) {
        const double x = queries[k];
        if (x == 0.0) {
            y[k] = spec.alpha;
            known[k] = true;
            continue;
        }
        if (x == 1.0) {
            y[k] = spec.beta;
            known[k] = true;
            continue;
        }
        const double gx = spec.g(x);
        if (std::fabs(gx) >= threshold && gx != 0.0) {
            y[k] = (spec.h(x) - u[k]) / gx;
            if (!std::isfinite(y[k])) throw NumericalError("recovered y is not finite at x = " + std::to_string(x));
            known[k] = true;
        }
    }

    for (std::size_t k = 0; k < n;) {
        if (known[k]) {
            ++k;
            continue;
        }
        std::size_t end = k;
        while (end < n && !known[end]) ++end;
        if (end - k >= 3) {
            throw NumericalError("|g| vanishes on " + std::to_string(end - k) +
                                 " adjacent queries starting at x = " + std::to_string(queries[k]) +
                                 "; y = (h - u)/g cannot be recovered there");
        }
        if (k == 0 || end == n) {
            throw NumericalError("|g| vanishes at x = " + std::to_string(queries[k]) +
                                 " with no recoverable neighbour on one side");
        }
        const double x0 = queries[k - 1];
        const double x1 = queries[end];
        for (std::size_t i = k; i < end; ++i) {
            const double w = (queries[i] - x0) / (x1 - x0);
            y[i] = (1.0 - w) * y[k - 1] + w * y[end];
        }
        k = end;
    }
    return y;
}

double airy_bvp_reference(double x, double beta) {
    // y2(x) = sum a_n x^n with a_1 = 1 and a_{n+3} = -a_n / ((n+3)(n+2)).
    auto odd_solution = [](double t) {
        double term = t;
        double sum = t;
        for (int n = 1; n < 200; n += 3) {
            term *= -t * t * t / ((n + 3.0) * (n + 2.0));
            sum += term;
            if (std::fabs(term) < 1e-18 * std::fabs(sum)) break;
        }
        return sum;
    };
    return beta * odd_solution(x) / odd_solution(1.0);
}

}  // namespace fredholm
