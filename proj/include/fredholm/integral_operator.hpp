#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "fredholm/grid.hpp"

namespace fredholm {

using Kernel = std::function<double(double x, double z)>;
using ScalarFunction = std::function<double(double)>;

/// f(x) = g(x) + \int_a^b K(x,z) G(f(z)) dz.  G absent means the linear equation.
struct FieProblem {
    Kernel kernel;
    ScalarFunction source;
    double a = 0.0;
    double b = 1.0;
    std::optional<ScalarFunction> nonlinearity;
};

/// Riemann-sum discretization of the integral operator on a grid:
/// A_ij = K(z_i, z_j) * dz and g_i = g(z_i).  Keeps the kernel and source
/// callables so the operator can also be applied at off-grid points.
class DiscreteOperator {
public:
    DiscreteOperator(Grid1D grid, Eigen::MatrixXd matrix, Eigen::VectorXd source, Kernel kernel = {},
                     ScalarFunction source_fn = {});

    const Grid1D& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return grid_.size(); }
    const Eigen::MatrixXd& matrix() const noexcept { return matrix_; }
    const Eigen::VectorXd& source() const noexcept { return source_; }

    bool has_kernel() const noexcept { return static_cast<bool>(kernel_); }
    bool has_source_function() const noexcept { return static_cast<bool>(source_fn_); }
    double kernel(double x, double z) const;
    double source_at(double x) const;

private:
    Grid1D grid_;
    Eigen::MatrixXd matrix_;
    Eigen::VectorXd source_;
    Kernel kernel_;
    ScalarFunction source_fn_;
};

/// Throws NumericalError naming the first node (pair) with a non-finite value.
DiscreteOperator discretize(const FieProblem& problem, const Grid1D& grid);

/// One relaxed step on the grid: kappa*g + (A + (1-kappa) I) f.
Eigen::VectorXd apply_km_step(const DiscreteOperator& op, const Eigen::VectorXd& f, double kappa);

/// Same step with a replacement source vector (the re-linearized sources of the
/// nonlinear solver share one matrix).
Eigen::VectorXd apply_km_step(const DiscreteOperator& op, const Eigen::VectorXd& source, const Eigen::VectorXd& f,
                              double kappa);

/// (1-kappa) f + kappa (g + A f): the relaxation is applied to the operator as
/// well, so the fixed point solves f = g + A f for every kappa.
Eigen::VectorXd apply_relaxed_km_step(const DiscreteOperator& op, const Eigen::VectorXd& source,
                                      const Eigen::VectorXd& f, double kappa);

/// Induced infinity norm of A: max_i sum_j |A_ij|.
double estimate_contraction(const DiscreteOperator& op);

/// || A g ||_inf, the grid surrogate of ||T g - g||.
double residual_norm(const DiscreteOperator& op);

/// max over (z_i, z_j), j interior, of the central difference of K(z_i, z) g(z) in z.
double estimate_derivative_bound(const DiscreteOperator& op);

/// How a network layer uses kappa.  `absorbed`: the operator already carries the
/// relaxation and W = A + (1-kappa) I.  `relaxed`: W = kappa A + (1-kappa) I.
/// The two coincide for kappa = 1.
enum class KmForm { absorbed, relaxed };

/// Relaxation parameters kappa_1, kappa_2, ... for the Krasnoselskii-Mann iteration.
/// A finite sequence is extended by repeating its last entry.
class KmSchedule {
public:
    /// `contractive` records the caller's assertion that the operator is a contraction,
    /// which is what makes kappa = 1 admissible.
    static KmSchedule constant(double kappa, bool contractive = false);
    static KmSchedule sequence(std::vector<double> kappas, bool contractive = false);

    /// kappa for hidden layer m (1-based).
    double at(std::size_t layer) const;

    KmSchedule with_form(KmForm form) const;
    KmForm form() const noexcept { return form_; }

    bool is_constant() const noexcept { return kappas_.size() == 1; }
    bool contractive() const noexcept { return contractive_; }
    const std::vector<double>& values() const noexcept { return kappas_; }

    /// sum_n kappa_n (1 - kappa_n) = infinity, or kappa = 1 with a contraction.
    bool satisfies_km_condition() const noexcept;

    /// v_M = sum of the first M relaxation parameters (v_0 = 0).
    double partial_sum(std::size_t m) const;

private:
    KmSchedule(std::vector<double> kappas, bool contractive);

    std::vector<double> kappas_;
    bool contractive_;
    KmForm form_ = KmForm::absorbed;
};

}  // namespace fredholm
