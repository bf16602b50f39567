#include "fredholm/integral_operator.hpp"

#include <cmath>
#include <string>

#include "fredholm/error.hpp"

namespace fredholm {

DiscreteOperator::DiscreteOperator(Grid1D grid, Eigen::MatrixXd matrix, Eigen::VectorXd source, Kernel kernel,
                                   ScalarFunction source_fn)
    : grid_(std::move(grid)),
      matrix_(std::move(matrix)),
      source_(std::move(source)),
      kernel_(std::move(kernel)),
      source_fn_(std::move(source_fn)) {
    const auto n = static_cast<Eigen::Index>(grid_.size());
    if (matrix_.rows() != n || matrix_.cols() != n) {
        throw ValidationError("operator matrix must be " + std::to_string(n) + "x" + std::to_string(n));
    }
    if (source_.size() != n) throw ValidationError("source vector must have " + std::to_string(n) + " entries");
    if (!matrix_.allFinite()) throw NumericalError("operator matrix contains non-finite entries");
    if (!source_.allFinite()) throw NumericalError("source vector contains non-finite entries");
}

double DiscreteOperator::kernel(double x, double z) const {
    if (!kernel_) throw ValidationError("operator has no kernel function for off-grid evaluation");
    return kernel_(x, z);
}

double DiscreteOperator::source_at(double x) const {
    if (!source_fn_) throw ValidationError("operator has no source function for off-grid evaluation");
    return source_fn_(x);
}

DiscreteOperator discretize(const FieProblem& problem, const Grid1D& grid) {
    if (!problem.kernel || !problem.source) throw ValidationError("problem needs a kernel and a source");
    const auto n = static_cast<Eigen::Index>(grid.size());
    const double dz = grid.spacing();
    const auto nodes = grid.nodes();

    Eigen::MatrixXd a(n, n);
    Eigen::VectorXd g(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = nodes[static_cast<std::size_t>(i)];
        double gi = 0.0;
        try {
            gi = problem.source(x);
        } catch (const EvalError& err) {
            throw EvalError("source at node " + std::to_string(i) + " (x = " + std::to_string(x) + "): " + err.what());
        }
        if (!std::isfinite(gi)) {
            throw NumericalError("source is not finite at node " + std::to_string(i) + " (x = " +
                                 std::to_string(x) + ")");
        }
        g(i) = gi;
        for (Eigen::Index j = 0; j < n; ++j) {
            double k = 0.0;
            try {
                k = problem.kernel(x, nodes[static_cast<std::size_t>(j)]);
            } catch (const EvalError& err) {
                throw EvalError("kernel at node pair (" + std::to_string(i) + ", " + std::to_string(j) + "): " +
                                err.what());
            }
            if (!std::isfinite(k)) {
                throw NumericalError("kernel is not finite at node pair (" + std::to_string(i) + ", " +
                                     std::to_string(j) + ")");
            }
            a(i, j) = k * dz;
        }
    }
    return DiscreteOperator(grid, std::move(a), std::move(g), problem.kernel, problem.source);
}

Eigen::VectorXd apply_km_step(const DiscreteOperator& op, const Eigen::VectorXd& f, double kappa) {
    return apply_km_step(op, op.source(), f, kappa);
}

Eigen::VectorXd apply_km_step(const DiscreteOperator& op, const Eigen::VectorXd& source, const Eigen::VectorXd& f,
                              double kappa) {
    const auto n = static_cast<Eigen::Index>(op.size());
    if (f.size() != n || source.size() != n) throw ValidationError("apply_km_step: size mismatch");
    if (!(kappa > 0.0 && kappa <= 1.0)) throw ValidationError("kappa must lie in (0, 1]");
    if (!f.allFinite()) throw NumericalError("apply_km_step: non-finite input");
    Eigen::VectorXd out = op.matrix() * f;
    out += kappa * source;
    if (kappa != 1.0) out += (1.0 - kappa) * f;
    return out;
}

Eigen::VectorXd apply_relaxed_km_step(const DiscreteOperator& op, const Eigen::VectorXd& source,
                                      const Eigen::VectorXd& f, double kappa) {
    const auto n = static_cast<Eigen::Index>(op.size());
    if (f.size() != n || source.size() != n) throw ValidationError("apply_relaxed_km_step: size mismatch");
    if (!(kappa > 0.0 && kappa <= 1.0)) throw ValidationError("kappa must lie in (0, 1]");
    if (!f.allFinite()) throw NumericalError("apply_relaxed_km_step: non-finite input");
    Eigen::VectorXd out = op.matrix() * f;
    out += source;
    if (kappa != 1.0) {
        out *= kappa;
        out += (1.0 - kappa) * f;
    }
    return out;
}

double estimate_contraction(const DiscreteOperator& op) {
    return op.matrix().cwiseAbs().rowwise().sum().maxCoeff();
}

double residual_norm(const DiscreteOperator& op) {
    return (op.matrix() * op.source()).cwiseAbs().maxCoeff();
}

double estimate_derivative_bound(const DiscreteOperator& op) {
    const auto n = static_cast<Eigen::Index>(op.size());
    if (n < 3) throw ValidationError("derivative estimate needs at least 3 nodes");
    const double dz = op.grid().spacing();
    const Eigen::MatrixXd& a = op.matrix();
    const Eigen::VectorXd& g = op.source();
    // A_ij g_j = K(z_i, z_j) g(z_j) dz, hence the extra factor of dz below.
    const double scale = 1.0 / (2.0 * dz * dz);
    double best = 0.0;
    for (Eigen::Index j = 1; j + 1 < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double d = std::fabs(a(i, j + 1) * g(j + 1) - a(i, j - 1) * g(j - 1)) * scale;
            best = std::max(best, d);
        }
    }
    return best;
}

KmSchedule::KmSchedule(std::vector<double> kappas, bool contractive)
    : kappas_(std::move(kappas)), contractive_(contractive) {
    if (kappas_.empty()) throw ValidationError("KM schedule needs at least one kappa");
    for (double k : kappas_) {
        if (!(k > 0.0 && k <= 1.0)) {
            throw ValidationError("every kappa must lie in (0, 1], got " + std::to_string(k));
        }
    }
}

KmSchedule KmSchedule::constant(double kappa, bool contractive) { return KmSchedule({kappa}, contractive); }

KmSchedule KmSchedule::sequence(std::vector<double> kappas, bool contractive) {
    return KmSchedule(std::move(kappas), contractive);
}

KmSchedule KmSchedule::with_form(KmForm form) const {
    KmSchedule out = *this;
    out.form_ = form;
    return out;
}

double KmSchedule::at(std::size_t layer) const {
    if (layer == 0) throw ValidationError("layers are numbered from 1");
    return layer <= kappas_.size() ? kappas_[layer - 1] : kappas_.back();
}

bool KmSchedule::satisfies_km_condition() const noexcept { return kappas_.back() < 1.0 || contractive_; }

double KmSchedule::partial_sum(std::size_t m) const {
    double v = 0.0;
    for (std::size_t layer = 1; layer <= m; ++layer) v += at(layer);
    return v;
}

}  // namespace fredholm
