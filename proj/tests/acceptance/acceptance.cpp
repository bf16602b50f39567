// Acceptance run: one PASS/FAIL line per criterion.  Reference values come from
// std math closed forms, an RK4 shooting solver and hand-assembled matrices,
// never from the library's own exact/oracle plumbing.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "fredholm/bvp.hpp"
#include "fredholm/error.hpp"
#include "fredholm/expr.hpp"
#include "fredholm/laplace_disc.hpp"
#include "fredholm/network.hpp"
#include "fredholm/polar_fd.hpp"
#include "fredholm/report.hpp"

using namespace fredholm;

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kPi = std::numbers::pi;

int g_failures = 0;

void verdict(int id, bool pass, const std::string& detail) {
    std::printf("%s criterion %2d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(const char* f, double a) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double seconds(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

// Deterministic CSV of every registry run, kept for the determinism criterion.
std::vector<std::pair<std::string, std::string>> g_first_csv;

ReportBundle run_and_keep(const std::string& name) {
    ReportBundle b = run_example(name, {}, RunOptions{true});
    g_first_csv.emplace_back(name, render_solution_csv(b) + render_sweep_csv(b));
    return b;
}

double max_err_1d(const ReportBundle& b, const std::function<double(double)>& exact) {
    double worst = 0.0;
    for (const auto& row : b.solution) worst = std::max(worst, std::fabs(row.value - exact(row.coords[0])));
    return worst;
}

template <typename F>
bool throws_eval(F&& f) {
    try {
        f();
    } catch (const EvalError&) {
        return true;
    } catch (...) {
        return false;
    }
    return false;
}

// --- 1, 2, 3 --------------------------------------------------------------

void criterion_1() {
    const auto start = Clock::now();
    const ReportBundle b = run_and_keep("ex1");
    const double elapsed = seconds(start);
    const double err = max_err_1d(b, [](double x) { return std::exp(x) + 1.0; });
    const bool ok = err >= 4e-4 && err <= 1.6e-3 && elapsed < 5.0 && b.solution.size() == 1001;
    verdict(1, ok, "ex1 max error " + fmt("%.3e", err) + " in [4e-4, 1.6e-3], runtime " + fmt("%.2f s", elapsed) + " < 5 s");
}

void criterion_2() {
    const ReportBundle b = run_and_keep("ex2");
    const double err = max_err_1d(b, [](double x) { return 2.0 * std::sin(x); });

    // Iterates at the grid nodes, assembled here without the config path.
    const Grid1D grid = uniform_grid(0.0, kPi / 2, 2000, Scheme::closed);
    const FieProblem fie{[](double x, double z) { return std::sin(x) * std::cos(z); },
                         [](double x) { return std::sin(x); }, 0.0, kPi / 2, std::nullopt};
    auto op = std::make_shared<const DiscreteOperator>(discretize(fie, grid));
    const SolutionField field = forward(FredholmNet(op, 10, KmSchedule::constant(1.0, true)), true);
    double law = 0.0;
    for (std::size_t m = 2; m <= 10; ++m) {
        const double factor = 2.0 - std::pow(2.0, -static_cast<double>(m - 1));
        for (std::size_t j = 0; j < grid.size(); ++j) {
            law = std::max(law, std::fabs(field.history[m - 1](static_cast<Eigen::Index>(j)) - factor * std::sin(grid[j])));
        }
    }
    verdict(2, err <= 2e-3 && law <= 2e-3,
            "ex2 max error " + fmt("%.3e", err) + " <= 2e-3, iterate law m=2..10 " + fmt("%.3e", law) + " <= 2e-3");
}

void criterion_3() {
    const double e1 = max_err_1d(run_and_keep("nl1"), [](double x) { return std::log(x) + 1.0; });
    const double e2 = max_err_1d(run_and_keep("nl2"), [](double x) { return std::sin(x) + 1.0; });
    const double e3 = max_err_1d(run_and_keep("nl3"), [](double x) { return 2.0 - x * x; });
    verdict(3, e1 <= 5e-5 && e2 <= 5e-3 && e3 <= 1e-2,
            "nl1 " + fmt("%.3e", e1) + " <= 5e-5, nl2 " + fmt("%.3e", e2) + " <= 5e-3, nl3 " + fmt("%.3e", e3) +
                " <= 1e-2");
}

// --- 4 --------------------------------------------------------------------

void criterion_4() {
    const auto start = Clock::now();
    const ReportBundle b = run_and_keep("laplace_disc");
    const double elapsed = seconds(start);
    double err = 0.0;
    std::size_t on_circle = 0;
    for (const auto& row : b.solution) {
        const double r = row.coords[0], phi = row.coords[1];
        const double x = r * std::cos(phi), y = r * std::sin(phi);
        err = std::max(err, std::fabs(row.value - (x * x - y * y + 1.0)));
        if (r == 1.0) ++on_circle;
    }
    const auto& cfg = b.metadata;
    const bool settings = cfg.grid_n == 2000 && cfg.layers == 15;
    verdict(4, err <= 1e-6 && elapsed < 60.0 && on_circle > 0 && settings,
            "disc max error " + fmt("%.3e", err) + " <= 1e-6 over " + std::to_string(b.solution.size()) +
                " points (" + std::to_string(on_circle) + " at r=1), runtime " + fmt("%.2f s", elapsed) + " < 60 s");
}

// --- 5 --------------------------------------------------------------------

// Explicit KM iteration f_{n+1} = (1-k) f_n + k (g + A f_n), f_1 = k g, on plain vectors.
std::vector<std::vector<double>> km_reference(const std::vector<std::vector<double>>& a, const std::vector<double>& g,
                                              double kappa, std::size_t layers) {
    const std::size_t n = g.size();
    std::vector<std::vector<double>> out;
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = kappa * g[i];
    out.push_back(f);
    for (std::size_t m = 2; m <= layers; ++m) {
        std::vector<double> next(n);
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += a[i][j] * f[j];
            next[i] = (1.0 - kappa) * f[i] + kappa * (g[i] + s);
        }
        f = std::move(next);
        out.push_back(f);
    }
    return out;
}

double relative_gap(const std::vector<std::vector<double>>& ref, const std::vector<Eigen::VectorXd>& got) {
    double worst = 0.0;
    if (ref.size() != got.size()) return INFINITY;
    for (std::size_t m = 0; m < ref.size(); ++m) {
        for (std::size_t i = 0; i < ref[m].size(); ++i) {
            const double d = std::fabs(ref[m][i] - got[m](static_cast<Eigen::Index>(i)));
            worst = std::max(worst, d / std::max(1.0, std::fabs(ref[m][i])));
        }
    }
    return worst;
}

// Max relative gap for an interval problem at N = 64 with nodes written out by hand.
double equivalence_case(double a, double b, const std::function<double(double, double)>& k,
                        const std::function<double(double)>& g, std::size_t layers) {
    const std::size_t n = 64;
    const double dz = (b - a) / static_cast<double>(n - 1);
    std::vector<double> z(n), gv(n);
    std::vector<std::vector<double>> mat(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        z[i] = a + static_cast<double>(i) * dz;
        gv[i] = g(z[i]);
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) mat[i][j] = k(z[i], z[j]) * dz;

    const Grid1D grid = uniform_grid(a, b, n, Scheme::closed);
    auto op = std::make_shared<const DiscreteOperator>(discretize(FieProblem{k, g, a, b, std::nullopt}, grid));
    const SolutionField field = forward(FredholmNet(op, layers, KmSchedule::constant(1.0, true)), true);
    double gap = relative_gap(km_reference(mat, gv, 1.0, layers), field.history);

    // Query layer at off-grid points against sum_j K(x, z_j) dz h_M(z_j) + g(x).
    const std::vector<double> xs = {a + 0.1 * (b - a), a + 0.55 * (b - a), b};
    const auto net = FredholmNet(op, layers, KmSchedule::constant(1.0, true));
    const std::vector<double> q = query(net, field, xs);
    const auto ref = km_reference(mat, gv, 1.0, layers).back();
    for (std::size_t k2 = 0; k2 < xs.size(); ++k2) {
        double s = g(xs[k2]);
        for (std::size_t j = 0; j < n; ++j) s += k(xs[k2], z[j]) * dz * ref[j];
        gap = std::max(gap, std::fabs(q[k2] - s) / std::max(1.0, std::fabs(s)));
    }
    return gap;
}

void criterion_5() {
    const double g1 = equivalence_case(0.0, 1.0, [](double, double) { return std::exp(-1.0); },
                                       [](double x) { return std::exp(x); }, 10);
    const double g2 = equivalence_case(0.0, kPi / 2, [](double x, double z) { return std::sin(x) * std::cos(z); },
                                       [](double x) { return std::sin(x); }, 15);

    // Disc BIE: periodic left grid, A_ij = -dtheta/(2pi), source 2 f(theta), kappa = 2/3.
    const std::size_t n = 64;
    const double kappa = 2.0 / 3.0;
    const double dt = 2.0 * kPi / static_cast<double>(n);
    std::vector<double> gv(n);
    std::vector<std::vector<double>> mat(n, std::vector<double>(n, -dt / (2.0 * kPi)));
    for (std::size_t i = 0; i < n; ++i) gv[i] = 2.0 * (1.0 + std::cos(2.0 * static_cast<double>(i) * dt));
    DiscBoundaryProblem problem;
    problem.boundary = [](double phi) { return 1.0 + std::cos(2.0 * phi); };
    problem.theta_n = n;
    problem.layers = 15;
    problem.schedule = KmSchedule::constant(kappa);
    const auto op = build_bie(problem);
    const FredholmNet net(op, 15, problem.schedule.with_form(KmForm::relaxed));
    const SolutionField field = forward(net, true);
    const double g3 = relative_gap(km_reference(mat, gv, kappa, 15), field.history);
    const double density_gap = [&] {
        const BoundaryDensity d = solve_density(problem);
        double w = 0.0;
        for (Eigen::Index i = 0; i < d.values.size(); ++i) w = std::max(w, std::fabs(d.values(i) - field.values(i)));
        return w;
    }();

    verdict(5, g1 <= 1e-12 && g2 <= 1e-12 && g3 <= 1e-12 && density_gap <= 1e-12,
            "forward vs explicit KM (N=64) rel gap ex1 " + fmt("%.2e", g1) + ", ex2 " + fmt("%.2e", g2) + ", disc BIE " +
                fmt("%.2e", g3) + " <= 1e-12");
}

// --- 6 --------------------------------------------------------------------

// Max over M of (||h_M - f*|| - bound_M); also reports the worst ratio to the bound.
struct BoundCheck {
    double worst_excess = -INFINITY;
    double q = 0.0;
    bool ok = true;
};

BoundCheck contraction_case(std::shared_ptr<const DiscreteOperator> op) {
    BoundCheck out;
    out.q = estimate_contraction(*op);
    const DenseSolution exact = dense_solve(*op);
    const SolutionField field = forward(FredholmNet(op, 20, KmSchedule::constant(1.0, true)), true);
    const double step = (field.history[1] - field.history[0]).lpNorm<Eigen::Infinity>();
    const double scale = std::max(1.0, exact.field.values.lpNorm<Eigen::Infinity>());
    // Round-off floor: dense LU and 20 matrix-vector products at N = 2000.
    const double slack = 1e3 * std::numeric_limits<double>::epsilon() * scale;
    for (std::size_t m = 2; m <= 20; ++m) {
        const double gap = (field.history[m - 1] - exact.field.values).lpNorm<Eigen::Infinity>();
        const double bound = std::pow(out.q, static_cast<double>(m - 1)) / (1.0 - out.q) * step;
        out.worst_excess = std::max(out.worst_excess, gap - bound);
        if (!(gap <= bound + slack)) out.ok = false;
    }
    return out;
}

void criterion_6() {
    const Grid1D grid = uniform_grid(0.0, 1.0, 2000, Scheme::closed);
    auto ex1 = std::make_shared<const DiscreteOperator>(discretize(
        FieProblem{[](double, double) { return std::exp(-1.0); }, [](double x) { return std::exp(x); }, 0.0, 1.0,
                   std::nullopt},
        grid));
    BvpSpec spec;
    spec.g = [](double x) { return 3.0 * 3.2 / ((3.2 + x * x) * (3.2 + x * x)); };
    spec.h = [](double) { return 0.0; };
    spec.alpha = 0.0;
    spec.beta = 1.0 / std::sqrt(4.2);
    auto bvp = std::make_shared<const DiscreteOperator>(discretize(bvp_to_fie(spec), grid));
    const BoundCheck a = contraction_case(ex1);
    const BoundCheck b = contraction_case(bvp);
    verdict(6, a.ok && b.ok && a.q < 1.0 && b.q < 1.0,
            "||h_M - dense|| <= q^(M-1)/(1-q) ||h_2-h_1|| for M=2..20: ex1 (q=" + fmt("%.4f", a.q) +
                ") worst excess " + fmt("%.2e", a.worst_excess) + ", bvp_p (q=" + fmt("%.4f", b.q) +
                ") worst excess " + fmt("%.2e", b.worst_excess) + " (round-off slack 1e3 eps)");
}

// --- 7 --------------------------------------------------------------------

void criterion_7() {
    // Closed-form budget for ex1 on the closed grid: A_ij = dz / e.
    const std::size_t n = 2000;
    const double dz = 1.0 / static_cast<double>(n - 1);
    const double q = static_cast<double>(n) * dz / std::exp(1.0);
    double sum_g = 0.0;
    for (std::size_t j = 0; j < n; ++j) sum_g += std::exp(static_cast<double>(j) * dz);
    const double residual = dz / std::exp(1.0) * sum_g;
    // d/dz of e^{-1} e^z peaks at 1 (up to the central difference at the last interior node).
    const double d = 1.0;
    const double seed = d / (2.0 * static_cast<double>(n)) + residual;
    std::size_t m_star = 0;
    while (std::pow(q, static_cast<double>(m_star)) / (1.0 - q) * seed > 1e-6) ++m_star;

    const Grid1D grid = uniform_grid(0.0, 1.0, n, Scheme::closed);
    const DiscreteOperator op = discretize(
        FieProblem{[](double, double) { return std::exp(-1.0); }, [](double x) { return std::exp(x); }, 0.0, 1.0,
                   std::nullopt},
        grid);
    const ErrorBudget budget = make_error_budget(op);
    const LayerPlan plan = plan_layers(budget, 1e-6);
    const double bound = error_bound(budget, plan.layers);
    verdict(7, m_star == 14 && plan.layers == 14 && bound <= 1e-6,
            "plan_layers(ex1, 1e-6) = " + std::to_string(plan.layers) + ", closed form " + std::to_string(m_star) +
                ", expected 14; error_bound(M*) = " + fmt("%.3e", bound) + " <= 1e-6");
}

// --- 8 --------------------------------------------------------------------

// y'' = -x y, y(0) = 0, y'(0) = 1 by RK4 with step 1e-4; values at multiples of 1e-3.
std::vector<double> airy_shooting() {
    const int steps = 10000;
    const double h = 1.0 / steps;
    std::vector<double> out{0.0};
    double y = 0.0, v = 1.0;
    for (int s = 0; s < steps; ++s) {
        const double x = s * h;
        const double k1y = v, k1v = -x * y;
        const double k2y = v + 0.5 * h * k1v, k2v = -(x + 0.5 * h) * (y + 0.5 * h * k1y);
        const double k3y = v + 0.5 * h * k2v, k3v = -(x + 0.5 * h) * (y + 0.5 * h * k2y);
        const double k4y = v + h * k3v, k4v = -(x + h) * (y + h * k3y);
        y += h / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y);
        v += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
        if ((s + 1) % 10 == 0) out.push_back(y);
    }
    return out;
}

void criterion_8() {
    const ReportBundle p = run_and_keep("bvp_p");
    const double beta = 1.0 / std::sqrt(4.2);
    bool ends_exact = false;
    if (p.solution.size() == 1001) {
        ends_exact = p.solution.front().coords[0] == 0.0 && p.solution.front().value == 0.0 &&
                     p.solution.back().coords[0] == 1.0 && p.solution.back().value == beta;
    }
    const double err = max_err_1d(p, [](double x) { return x / std::sqrt(3.2 + x * x); });

    // y'' + g y = 0 by central differences on the query lattice; the stencil's own
    // error is dx^2 |y''''| / 12 with |y''''| well below 120 here.
    double ode = 0.0;
    const double dx = 1e-3;
    for (std::size_t k = 1; k + 1 < p.solution.size(); ++k) {
        const double x = p.solution[k].coords[0];
        const double ypp = (p.solution[k + 1].value - 2.0 * p.solution[k].value + p.solution[k - 1].value) / (dx * dx);
        ode = std::max(ode, std::fabs(ypp + 9.6 / ((3.2 + x * x) * (3.2 + x * x)) * p.solution[k].value));
    }
    const double ode_limit = 10.0 * (dx * dx + err);

    const ReportBundle airy = run_and_keep("bvp_airy");
    const std::vector<double> shot = airy_shooting();
    const double scale = 2.0 / shot.back();
    double airy_err = 0.0;
    for (std::size_t k = 0; k < airy.solution.size() && k < shot.size(); ++k) {
        airy_err = std::max(airy_err, std::fabs(airy.solution[k].value - scale * shot[k]));
    }
    const bool airy_ok = airy.solution.size() == shot.size() && airy_err <= 1e-2;

    verdict(8, ends_exact && err <= 1e-2 && ode <= ode_limit && airy_ok,
            std::string("bvp_p ends ") + (ends_exact ? "bitwise exact" : "NOT exact") + ", error " + fmt("%.3e", err) +
                " <= 1e-2, ODE residual " + fmt("%.3e", ode) + " <= " + fmt("%.3e", ode_limit) +
                "; bvp_airy vs RK4 shooting " + fmt("%.3e", airy_err) + " <= 1e-2");
}

// --- 9 --------------------------------------------------------------------

double fd_error(std::size_t cells) {
    PolarFdOptions o;
    o.radial_cells = cells;
    o.angular_cells = cells;
    const PolarGridSolution s = solve_fd([](double phi) { return 1.0 + std::cos(2.0 * phi); }, o);
    double worst = 0.0;
    for (std::size_t i = 0; i <= cells; ++i) {
        for (std::size_t j = 0; j < cells; ++j) {
            const double r = s.radius(i), t = s.angle(j);
            worst = std::max(worst, std::fabs(s.at(i, j) - (r * r * std::cos(2.0 * t) + 1.0)));
        }
    }
    return worst;
}

void criterion_9() {
    PolarFdOptions o;
    const PolarGridSolution one = solve_fd([](double) { return 1.0; }, o);
    double dev = 0.0;
    for (std::size_t i = 0; i <= o.radial_cells; ++i)
        for (std::size_t j = 0; j < o.angular_cells; ++j) dev = std::max(dev, std::fabs(one.at(i, j) - 1.0));
    const double e100 = fd_error(100);
    const double e200 = fd_error(200);
    const double ratio = e100 / e200;
    verdict(9, dev <= o.tol && ratio >= 3.0 && ratio <= 5.0,
            "FD f=1 deviation " + fmt("%.2e", dev) + " <= tol " + fmt("%.0e", o.tol) + "; error 100x100 " +
                fmt("%.3e", e100) + ", 200x200 " + fmt("%.3e", e200) + ", ratio " + fmt("%.3f", ratio) + " in [3, 5]");
}

// --- 10 -------------------------------------------------------------------

void criterion_10() {
    std::vector<std::string> failed;
    auto value = [&](const char* src, double expected, expr::Bindings env = {}) {
        try {
            if (expr::eval(expr::parse(src), env) != expected) failed.emplace_back(src);
        } catch (...) {
            failed.emplace_back(src);
        }
    };
    value("2+3*4", 14.0);
    value("2^3^2", 512.0);
    value("-2^2", -4.0);
    value("(2+3)*4", 20.0);
    value("8/4/2", 1.0);
    value("2-3-4", -5.0);
    value("-x^2", -9.0, {{"x", 3.0}});
    value("3*3.2/(3.2+0^2)^2", 0.9375);
    value("e^x", std::exp(1.0), {{"x", 1.0}});
    value("1.5e2", 150.0);

    auto offset = [&](const char* src, std::size_t expected) {
        try {
            expr::parse(src);
            failed.emplace_back(std::string("accepted ") + src);
        } catch (const ParseError& e) {
            if (e.offset() != expected) failed.emplace_back(std::string(src) + " @" + std::to_string(e.offset()));
        } catch (...) {
            failed.emplace_back(std::string("wrong exception ") + src);
        }
    };
    offset("2*+3", 2);
    offset("sin(x*", 6);
    offset("1 +", 3);
    offset("2x", 1);
    offset("(1+2", 4);
    offset("foo(x)", 0);

    auto domain = [&](const char* src, expr::Bindings env = {}) {
        if (!throws_eval([&] { (void)expr::eval(expr::parse(src), env); })) failed.emplace_back(std::string("no error ") + src);
    };
    domain("log(0)");
    domain("log(x)", {{"x", 0.0}});
    domain("log(-1)");
    domain("sqrt(-1)");
    domain("1/0");
    domain("0^-1");
    domain("(-8)^(1/3)");
    domain("x + 1");

    std::string detail = "precedence, error offsets and domain errors";
    for (const auto& f : failed) detail += "; " + f;
    verdict(10, failed.empty(), detail);
}

// --- 11 -------------------------------------------------------------------

void criterion_11() {
    std::vector<std::string> differing;
    for (const auto& name : example_names()) {
        const auto first = std::find_if(g_first_csv.begin(), g_first_csv.end(), [&](auto& p) { return p.first == name; });
        std::string a = first != g_first_csv.end() ? first->second : [&] {
            const ReportBundle b = run_example(name, {}, RunOptions{true});
            return render_solution_csv(b) + render_sweep_csv(b);
        }();
        const ReportBundle b = run_example(name, {}, RunOptions{true});
        if (a != render_solution_csv(b) + render_sweep_csv(b) || a.empty()) differing.push_back(name);
    }
    std::string detail = std::to_string(example_names().size()) + " registry examples re-run with identical CSV bytes";
    for (const auto& n : differing) detail += "; differs: " + n;
    verdict(11, differing.empty(), detail);
}

}  // namespace

int main() {
    const std::vector<void (*)()> criteria = {criterion_1, criterion_2, criterion_3, criterion_4,
                                              criterion_5, criterion_6, criterion_7, criterion_8,
                                              criterion_9, criterion_10, criterion_11};
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        try {
            criteria[i]();
        } catch (const std::exception& e) {
            verdict(static_cast<int>(i + 1), false, std::string("exception: ") + e.what());
        }
    }
    std::printf("%d of %zu criteria failed\n", g_failures, criteria.size());
    return g_failures == 0 ? 0 : 1;
}
