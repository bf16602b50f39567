#include "fredholm/laplace_disc.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fredholm/error.hpp"

namespace fredholm {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double phi) {
    double w = std::fmod(phi, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    if (w >= kTwoPi) w = 0.0;
    return w;
}

// (1 - r)^2 + 4 r sin^2(d/2) == 1 - 2 r cos d + r^2 without cancellation near r = 1, d = 0.
double kernel_denominator(double r, double d) {
    const double s = std::sin(0.5 * d);
    return (1.0 - r) * (1.0 - r) + 4.0 * r * s * s;
}

}  // namespace

double polar_double_layer_kernel(double r, double phi, double theta) {
    if (!(r >= 0.0 && r <= 1.0)) throw ValidationError("polar kernel needs 0 <= r <= 1");
    const double d = theta - phi;
    const double denom = kernel_denominator(r, d);
    if (denom == 0.0) {
        throw EvalError("double-layer kernel is 0/0 at r = 1, theta = phi; use the boundary value 1/(4 pi)");
    }
    const double s = std::sin(0.5 * d);
    const double numer = (1.0 - r) + 2.0 * r * s * s;  // 1 - r cos d
    return numer / (kTwoPi * denom);
}

std::shared_ptr<const DiscreteOperator> build_bie(const DiscBoundaryProblem& problem) {
    if (!problem.boundary) throw ValidationError("disc problem needs boundary data");
    FieProblem fie;
    fie.a = 0.0;
    fie.b = kTwoPi;
    fie.kernel = [](double, double) { return -1.0 / kTwoPi; };
    fie.source = [f = problem.boundary](double phi) { return 2.0 * f(phi); };
    const Grid1D grid = uniform_grid(0.0, kTwoPi, problem.theta_n, Scheme::left, Topology::periodic);
    return std::make_shared<const DiscreteOperator>(discretize(fie, grid));
}

BoundaryDensity solve_density(const DiscBoundaryProblem& problem) {
    auto op = build_bie(problem);
    const FredholmNet net(op, problem.layers, problem.schedule.with_form(KmForm::relaxed));
    SolutionField field = forward(net);
    return {op, std::move(field.values)};
}

double density_at(const BoundaryDensity& density, double phi, DensityInterpolation interpolation) {
    const Grid1D& grid = density.grid();
    const double w_phi = wrap_angle(phi);
    if (interpolation == DensityInterpolation::linear) {
        const double s = w_phi / grid.spacing();
        auto i = static_cast<std::size_t>(std::floor(s));
        const std::size_t n = grid.size();
        if (i >= n) i = n - 1;
        const double w = s - static_cast<double>(i);
        return (1.0 - w) * density.values(static_cast<Eigen::Index>(i)) +
               w * density.values(static_cast<Eigen::Index>((i + 1) % n));
    }
    const DiscreteOperator& op = *density.op;
    const double dz = grid.spacing();
    double sum = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        sum += op.kernel(w_phi, grid[j]) * dz * density.values(static_cast<Eigen::Index>(j));
    }
    return sum + op.source_at(w_phi);
}

BoundaryProjection boundary_project(const BoundaryDensity& density, double x, double y,
                                    DensityInterpolation interpolation) {
    const double phi = (x == 0.0 && y == 0.0) ? 0.0 : wrap_angle(std::atan2(y, x));
    return {phi, density_at(density, phi, interpolation)};
}

double boundary_potential(const BoundaryDensity& density) {
    return density.grid().spacing() / (2.0 * kTwoPi) * density.values.sum();
}

PotentialField evaluate_potential(const BoundaryDensity& density, std::span<const PolarPoint> points,
                                  DensityInterpolation interpolation) {
    const Grid1D& grid = density.grid();
    const double dtheta = grid.spacing();
    const double p_star = boundary_potential(density);
    const auto& mu = density.values;

    PotentialField out;
    out.points.assign(points.begin(), points.end());
    out.values.reserve(points.size());
    out.projected_phi.reserve(points.size());
    out.projected_mu.reserve(points.size());

    for (const PolarPoint& p : points) {
        if (!(p.r >= 0.0 && p.r <= 1.0) || !std::isfinite(p.phi)) {
            throw ValidationError("potential query (r = " + std::to_string(p.r) + ", phi = " +
                                  std::to_string(p.phi) + ") is outside the closed unit disc");
        }
        const double phi_star = p.r == 0.0 ? 0.0 : wrap_angle(p.phi);
        const double mu_star = density_at(density, phi_star, interpolation);

        double value = 0.5 * mu_star + p_star;
        if (p.r < 1.0) {
            // k - 1/(4pi) = (1 - r^2) / (4pi (1 - 2 r cos + r^2)), the Poisson kernel over 4pi.
            const double scale = (1.0 - p.r) * (1.0 + p.r) / (2.0 * kTwoPi);
            double sum = 0.0;
            for (std::size_t j = 0; j < grid.size(); ++j) {
                const double diff = mu(static_cast<Eigen::Index>(j)) - mu_star;
                if (diff == 0.0) continue;
                const double denom = kernel_denominator(p.r, grid[j] - phi_star);
                if (denom == 0.0) continue;
                sum += diff * scale / denom;
            }
            value += sum * dtheta;
        }
        out.values.push_back(value);
        out.projected_phi.push_back(phi_star);
        out.projected_mu.push_back(mu_star);
    }
    return out;
}

std::vector<DiscSweepRow> disc_layer_sweep(const DiscBoundaryProblem& problem, std::size_t max_layers,
                                           std::span<const PolarPoint> points,
                                           const std::function<double(double, double)>& exact,
                                           DensityInterpolation interpolation) {
    if (max_layers < 1) throw ValidationError("layer sweep needs max_layers >= 1");
    auto op = build_bie(problem);
    const FredholmNet net(op, max_layers, problem.schedule.with_form(KmForm::relaxed));
    std::vector<double> reference;
    reference.reserve(points.size());
    for (const PolarPoint& p : points) reference.push_back(exact(p.r, p.phi));

    std::vector<DiscSweepRow> rows;
    BoundaryDensity density{op, net.first_layer_output()};
    for (std::size_t m = 1; m <= max_layers; ++m) {
        if (m > 1) density.values = net.step(density.values, m);
        const PotentialField field = evaluate_potential(density, points, interpolation);
        double err = 0.0;
        for (std::size_t k = 0; k < points.size(); ++k) err = std::max(err, std::fabs(field.values[k] - reference[k]));
        rows.push_back({m, err});
    }
    return rows;
}

}  // namespace fredholm
