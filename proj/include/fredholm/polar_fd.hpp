#pragma once

// Finite-difference reference for the Dirichlet problem on the unit disc.
// Polar 5-point stencil for u_rr + u_r / r + u_thth / r^2 = 0 at r_i = i dr,
// periodic in theta, with the center value closed as the mean of the first ring.
// Each Fourier mode in theta decouples into a tridiagonal system in r.

#include <cstddef>
#include <span>
#include <vector>

#include "fredholm/integral_operator.hpp"

namespace fredholm {

struct PolarFdOptions {
    std::size_t radial_cells = 100;   // Nr, dr = 1/Nr
    std::size_t angular_cells = 100;  // Ntheta, dtheta = 2pi/Ntheta
    double tol = 1e-10;               // on the scaled residual
    std::size_t max_refinements = 8;
};

class PolarGridSolution {
public:
    PolarGridSolution(std::size_t nr, std::size_t ntheta);

    std::size_t radial_cells() const noexcept { return nr_; }
    std::size_t angular_cells() const noexcept { return ntheta_; }
    double dr() const noexcept;
    double dtheta() const noexcept;
    double radius(std::size_t i) const noexcept { return static_cast<double>(i) * dr(); }
    double angle(std::size_t j) const noexcept { return static_cast<double>(j) * dtheta(); }

    /// Ring 0 is the center (every j gives u_c), ring Nr is the boundary data.
    double at(std::size_t i, std::size_t j) const { return values_[i * ntheta_ + j]; }
    double& at(std::size_t i, std::size_t j) { return values_[i * ntheta_ + j]; }
    double center() const { return values_[0]; }

    std::size_t iterations = 0;  // number of tridiagonal sweeps, including refinements
    double residual = 0.0;       // final scaled residual

private:
    std::size_t nr_;
    std::size_t ntheta_;
    std::vector<double> values_;
};

/// Throws ValidationError for Nr or Ntheta < 8 or tol <= 0, NumericalError when
/// the residual is still above tol after max_refinements corrections.
PolarGridSolution solve_fd(const ScalarFunction& boundary, const PolarFdOptions& options);

/// Max |residual_ij| / |diagonal_ij| over the interior, relative to max(|f|, 1).
double fd_residual(const PolarGridSolution& solution);

struct FieldComparison {
    double max_abs = 0.0;
    double mean_abs = 0.0;
    std::size_t argmax = 0;
};

FieldComparison compare_fields(std::span<const double> a, std::span<const double> b);

}  // namespace fredholm
