#pragma once

// Dirichlet problem for the Laplace equation on the unit disc through the
// double-layer potential.  In polar coordinates the potential of a density
// mu(theta) is
//     u(r, phi) = \int_0^{2pi} k(r, phi, theta) mu(theta) dtheta,
//     k = (1/2pi) (1 - r cos(theta - phi)) / (1 - 2 r cos(theta - phi) + r^2),
// k tends to 1/(4pi) on the circle, and mu solves the boundary equation
//     mu(phi) = 2 f(phi) - (1/2pi) \int_0^{2pi} mu(theta) dtheta.
// Evaluation near the boundary subtracts the boundary limit of the kernel and
// the projected density so the summand stays bounded.

#include <Eigen/Dense>
#include <memory>
#include <span>
#include <vector>

#include "fredholm/network.hpp"

namespace fredholm {

struct DiscBoundaryProblem {
    ScalarFunction boundary;  // f(phi)
    std::size_t theta_n = 2000;
    KmSchedule schedule = KmSchedule::constant(2.0 / 3.0);  // always applied in KmForm::relaxed
    std::size_t layers = 15;
};

/// Polar double-layer kernel.  Throws EvalError at the 0/0 point r = 1, theta = phi.
double polar_double_layer_kernel(double r, double phi, double theta);

/// Boundary value of the kernel on the unit circle (theta != phi).
inline constexpr double kBoundaryKernel = 0.07957747154594767;  // 1/(4 pi)

/// Constant matrix A_ij = -dtheta/(2pi) and source 2 f(theta_i) on a periodic grid.
std::shared_ptr<const DiscreteOperator> build_bie(const DiscBoundaryProblem& problem);

struct BoundaryDensity {
    std::shared_ptr<const DiscreteOperator> op;
    Eigen::VectorXd values;  // mu on the theta grid

    const Grid1D& grid() const { return op->grid(); }
};

BoundaryDensity solve_density(const DiscBoundaryProblem& problem);

enum class DensityInterpolation {
    linear,   // piecewise linear on the periodic grid
    nystrom,  // one application of the boundary equation at phi (query layer)
};

struct BoundaryProjection {
    double phi;  // angle of the radial projection, in [0, 2pi)
    double mu;   // density at phi
};

/// Radial projection of (x, y) onto the circle.  The origin projects to phi = 0.
BoundaryProjection boundary_project(const BoundaryDensity& density, double x, double y,
                                    DensityInterpolation interpolation = DensityInterpolation::linear);

/// Density at an arbitrary angle.
double density_at(const BoundaryDensity& density, double phi, DensityInterpolation interpolation);

struct PolarPoint {
    double r;
    double phi;
};

struct PotentialField {
    std::vector<PolarPoint> points;
    std::vector<double> values;
    std::vector<double> projected_phi;
    std::vector<double> projected_mu;
};

/// P* = (dtheta / 4pi) sum_j mu_j, the discrete boundary potential.
double boundary_potential(const BoundaryDensity& density);

/// u(r, phi) = sum_j (mu_j - mu*) (k(r, phi, theta_j) - 1/(4pi)) dtheta + mu*/2 + P*.
/// At r = 1 the sum vanishes and u = mu*/2 + P*.
PotentialField evaluate_potential(const BoundaryDensity& density, std::span<const PolarPoint> points,
                                  DensityInterpolation interpolation = DensityInterpolation::nystrom);

struct DiscSweepRow {
    std::size_t layers;
    double max_error;
};

/// Max error of the potential against `exact(r, phi)` for 1..max_layers hidden layers.
std::vector<DiscSweepRow> disc_layer_sweep(const DiscBoundaryProblem& problem, std::size_t max_layers,
                                           std::span<const PolarPoint> points,
                                           const std::function<double(double, double)>& exact,
                                           DensityInterpolation interpolation = DensityInterpolation::nystrom);

}  // namespace fredholm
