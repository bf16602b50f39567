#include <cmath>
#include <memory>
#include <numbers>

#include "doctest.h"
#include "fredholm/bvp.hpp"
#include "fredholm/error.hpp"
#include "fredholm/laplace_disc.hpp"
#include "fredholm/nonlinear.hpp"
#include "fredholm/polar_fd.hpp"

using namespace fredholm;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

double max_abs(const Eigen::VectorXd& v) { return v.lpNorm<Eigen::Infinity>(); }

}  // namespace

TEST_CASE("linearized source") {
    const FieProblem fie{[](double x, double z) { return x * z / 4; }, [](double x) { return 1 + x; }, 0.0, 1.0,
                         std::nullopt};
    const DiscreteOperator op = discretize(fie, uniform_grid(0.0, 1.0, 16));
    const Eigen::VectorXd prev = Eigen::VectorXd::LinSpaced(16, 0.5, 2.0);
    CHECK(max_abs(linearized_source(op, [](double u) { return u; }, prev) - op.source()) < 1e-15);
    CHECK(linearized_source(op, [](double u) { return u * u; }, Eigen::VectorXd::Zero(16)) == op.source());
    CHECK_THROWS_AS(linearized_source(op, [](double u) { return std::sqrt(u) * NAN; }, prev), NumericalError);
}

TEST_CASE("identity nonlinearity reduces to the linear solver") {
    const NonlinearProblem p{[](double, double z) { return z / 36; }, [](double x) { return std::exp(x); },
                             [](double u) { return u; }, 0.0, 1.0};
    const Grid1D grid = uniform_grid(0.0, 1.0, 200, Scheme::closed);
    NonlinearOptions opt;
    opt.outer_iterations = 3;
    opt.layers = 7;
    const NonlinearSolution s = solve_nonlinear(p, grid, opt);
    const auto op = std::make_shared<const DiscreteOperator>(
        discretize(FieProblem{p.kernel, p.source, 0.0, 1.0, std::nullopt}, grid));
    const Eigen::VectorXd h = forward(FredholmNet(op, 7, KmSchedule::constant(1.0, true))).values;
    CHECK(max_abs(s.hidden - h) < 1e-13);
    CHECK(s.trace.iterations == 4);
}

TEST_CASE("nl1 converges at the pinned settings") {
    const NonlinearProblem p{[](double, double z) { return z / 36; }, [](double x) { return std::log(x) + 143.0 / 144; },
                             [](double u) { return u * u; }, 0.0, 1.0};
    const Grid1D grid = uniform_grid(0.0, 1.0, 1000, Scheme::midpoint);
    const NonlinearSolution s = solve_nonlinear(p, grid, NonlinearOptions{});
    const auto nodes = grid.nodes();
    const auto values = query_nonlinear(s, p, std::vector<double>(nodes.begin(), nodes.end()));
    double err = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) err = std::max(err, std::fabs(values[i] - std::log(grid[i]) - 1));
    CHECK(err < 5e-5);
    for (std::size_t i = 1; i < s.trace.deltas.size(); ++i) CHECK(s.trace.deltas[i] <= s.trace.deltas[i - 1]);
}

TEST_CASE("nonlinearity domain errors name the node") {
    const NonlinearProblem p{[](double, double) { return 1.0; }, [](double) { return -1.0; },
                             [](double u) {
                                 if (u < 0) throw EvalError("sqrt of negative argument");
                                 return std::sqrt(u);
                             },
                             0.0, 1.0};
    try {
        solve_nonlinear(p, uniform_grid(0.0, 1.0, 8), NonlinearOptions{});
        FAIL("expected EvalError");
    } catch (const EvalError& e) {
        CHECK(std::string(e.what()).find("node") != std::string::npos);
    }
}

TEST_CASE("BVP transform") {
    const BvpSpec airy{[](double x) { return x; }, [](double) { return 0.0; }, 0.0, 2.0};
    const FieProblem fie = bvp_to_fie(airy);
    for (double x : {0.0, 0.3, 1.0}) CHECK(fie.source(x) == Approx(-2 * x * x));
    CHECK(fie.kernel(0.5, 0.25) == Approx(0.25 * 0.5 * 0.5));
    CHECK(fie.kernel(0.5, 0.75) == Approx(0.5 * 0.25 * 0.5));

    const double p = 3.2;
    const BvpSpec ode1{[p](double x) { return 3 * p / ((p + x * x) * (p + x * x)); }, [](double) { return 0.0; }, 0.0,
                       1 / std::sqrt(4.2)};
    const FieProblem f1 = bvp_to_fie(ode1);
    CHECK(f1.source(0.0) == 0.0);
    CHECK(f1.source(0.6) == Approx(-(1 / std::sqrt(4.2)) * 0.6 * 3 * p / std::pow(p + 0.36, 2)));

    const BvpSpec flat{[](double) { return 0.0; }, [](double x) { return x * x; }, 1.0, 2.0};
    const FieProblem f0 = bvp_to_fie(flat);
    CHECK(f0.kernel(0.3, 0.6) == 0.0);
    CHECK(f0.source(0.7) == Approx(0.49));
}

TEST_CASE("BVP solve and recovery") {
    const double p = 3.2;
    const BvpSpec spec{[p](double x) { return 3 * p / ((p + x * x) * (p + x * x)); }, [](double) { return 0.0; }, 0.0,
                       1 / std::sqrt(4.2)};
    const Grid1D grid = uniform_grid(0.0, 1.0, 400, Scheme::closed);
    const BvpSolution sol = solve_bvp(spec, grid, 10, KmSchedule::constant(1.0, true));
    CHECK(sol.contraction < 1.0);
    const std::vector<double> xs = {0.0, 0.25, 0.5, 1.0};
    const auto y = recover_solution(sol, spec, xs);
    CHECK(y[0] == 0.0);
    CHECK(y[3] == spec.beta);
    CHECK(y[3] == Approx(0.48795).epsilon(1e-5));
    for (std::size_t k = 1; k < 3; ++k) CHECK(y[k] == Approx(xs[k] / std::sqrt(p + xs[k] * xs[k])).epsilon(1e-4));

    // y'' + x y = 0: g(0) = 0, so x = 0 takes the boundary value.
    const BvpSpec airy{[](double x) { return x; }, [](double) { return 0.0; }, 0.0, 2.0};
    const BvpSolution as = solve_bvp(airy, grid, 15, KmSchedule::constant(1.0, true));
    const std::vector<double> ax = {0.0, 0.001, 0.5, 1.0};
    const auto ay = recover_solution(as, airy, ax);
    CHECK(ay[0] == 0.0);
    for (std::size_t k = 1; k < ax.size(); ++k) CHECK(ay[k] == Approx(airy_bvp_reference(ax[k], 2.0)).epsilon(1e-4));
    CHECK(airy_bvp_reference(1.0, 2.0) == Approx(2.0).epsilon(1e-14));
    CHECK(airy_bvp_reference(0.0, 2.0) == 0.0);

    const BvpSpec dead{[](double x) { return x < 0.5 ? 0.0 : 1.0; }, [](double) { return 0.0; }, 0.0, 1.0};
    const BvpSolution ds = solve_bvp(dead, grid, 5, KmSchedule::constant(1.0, true));
    const std::vector<double> run = {0.1, 0.2, 0.3, 0.4};
    CHECK_THROWS_AS(recover_solution(ds, dead, run), NumericalError);
}

TEST_CASE("polar double-layer kernel") {
    CHECK(polar_double_layer_kernel(0.0, 0.3, 2.0) == Approx(1 / (2 * kPi)));
    CHECK(polar_double_layer_kernel(1.0, 0.0, kPi) == Approx(1 / (4 * kPi)));
    CHECK(polar_double_layer_kernel(1.0, 0.2, 1.7) == Approx(kBoundaryKernel));
    CHECK(polar_double_layer_kernel(0.5, 1.0, 1.0) == Approx(1 / kPi));
    CHECK_THROWS_AS(polar_double_layer_kernel(1.0, 0.4, 0.4), EvalError);
    CHECK_THROWS_AS(polar_double_layer_kernel(1.5, 0.0, 1.0), ValidationError);
}

TEST_CASE("disc BIE and density") {
    DiscBoundaryProblem p;
    p.boundary = [](double phi) { return 1 + 2 * std::cos(2 * phi); };
    p.theta_n = 4;
    const auto op = build_bie(p);
    CHECK(op->matrix()(0, 0) == Approx(-0.25));
    CHECK(op->matrix()(2, 3) == Approx(-0.25));
    CHECK(op->source()(0) == Approx(6.0));

    p.theta_n = 256;
    const BoundaryDensity d = solve_density(p);
    for (std::size_t j = 0; j < d.grid().size(); ++j) {
        CHECK(d.values(static_cast<Eigen::Index>(j)) == Approx(1 + 4 * std::cos(2 * d.grid()[j])).epsilon(1e-6));
    }

    p.boundary = [](double) { return 3.0; };
    CHECK(max_abs(solve_density(p).values.array() - 3.0) < 1e-6);
    p.boundary = [](double) { return 0.0; };
    CHECK(max_abs(solve_density(p).values) == 0.0);
}

TEST_CASE("boundary projection and potential") {
    DiscBoundaryProblem p;
    p.boundary = [](double phi) { return 1 + std::cos(2 * phi); };
    p.theta_n = 400;
    const BoundaryDensity d = solve_density(p);
    const BoundaryProjection a = boundary_project(d, 0.5, 0.0);
    CHECK(a.phi == 0.0);
    CHECK(a.mu == d.values(0));
    CHECK(boundary_project(d, 0.0, 0.0).phi == 0.0);
    const double mid = 0.5 * d.grid().spacing();
    const BoundaryProjection m = boundary_project(d, std::cos(mid), std::sin(mid));
    CHECK(m.mu == Approx(0.5 * (d.values(0) + d.values(1))));
    const BoundaryProjection q = boundary_project(d, 0.3, 0.3);
    CHECK(q.phi == Approx(kPi / 4));
    CHECK(q.mu == Approx(1.0).epsilon(1e-3));

    const std::vector<PolarPoint> pts = {{0.0, 0.0}, {0.5, 0.3}, {0.9, 1.0}, {1.0, 0.7}, {1.0, 0.0}};
    const PotentialField f = evaluate_potential(d, pts);
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const double exact = pts[k].r * pts[k].r * std::cos(2 * pts[k].phi) + 1;
        CHECK(f.values[k] == Approx(exact).epsilon(1e-6));
    }
    CHECK(boundary_potential(d) == Approx(d.grid().spacing() / (4 * kPi) * d.values.sum()));
    const std::vector<PolarPoint> outside = {{1.2, 0.0}};
    CHECK_THROWS_AS(evaluate_potential(d, outside), ValidationError);
}

TEST_CASE("disc layer sweep decreases") {
    DiscBoundaryProblem p;
    p.boundary = [](double phi) { return 1 + std::cos(2 * phi); };
    p.theta_n = 200;
    const std::vector<PolarPoint> pts = {{0.3, 0.1}, {0.8, 2.0}, {1.0, 4.0}};
    const auto rows = disc_layer_sweep(p, 12, pts, [](double r, double phi) { return r * r * std::cos(2 * phi) + 1; });
    REQUIRE(rows.size() == 12);
    CHECK(rows.back().max_error < 1e-4);
    CHECK(rows.back().max_error < rows.front().max_error);
}

TEST_CASE("finite-difference reference") {
    PolarFdOptions o;
    o.radial_cells = 40;
    o.angular_cells = 32;
    const PolarGridSolution one = solve_fd([](double) { return 1.0; }, o);
    CHECK(one.center() == Approx(1.0).epsilon(1e-12));
    CHECK(one.residual <= o.tol);
    CHECK(fd_residual(one) <= o.tol);
    for (std::size_t j = 0; j < 32; ++j) CHECK(one.at(20, j) == Approx(1.0).epsilon(1e-12));

    const PolarGridSolution u = solve_fd([](double t) { return 1 + std::cos(2 * t); }, o);
    CHECK(u.at(40, 0) == 2.0);
    CHECK(u.center() == Approx(1.0).epsilon(1e-10));
    CHECK(std::fabs(u.at(20, 0) - 1.25) < 1e-2);

    o.radial_cells = 4;
    CHECK_THROWS_AS(solve_fd([](double) { return 1.0; }, o), ValidationError);
    o.radial_cells = 16;
    o.tol = 0.0;
    CHECK_THROWS_AS(solve_fd([](double) { return 1.0; }, o), ValidationError);
}

TEST_CASE("compare_fields") {
    const std::vector<double> a = {1.0, 2.0, 3.0};
    const std::vector<double> b = {1.5, 2.5, 3.5};
    CHECK(compare_fields(a, a).max_abs == 0.0);
    const FieldComparison c = compare_fields(a, b);
    CHECK(c.max_abs == 0.5);
    CHECK(c.mean_abs == 0.5);
    const std::vector<double> short_b = {1.0};
    CHECK_THROWS_AS(compare_fields(a, short_b), ValidationError);
    CHECK_THROWS_AS(compare_fields(std::vector<double>{}, std::vector<double>{}), ValidationError);
}
