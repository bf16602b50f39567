#include "fredholm/network.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "fredholm/error.hpp"

namespace fredholm {

FredholmNet::FredholmNet(std::shared_ptr<const DiscreteOperator> op, std::size_t layers, KmSchedule schedule,
                         std::optional<Eigen::VectorXd> bias, bool seed_with_source)
    : op_(std::move(op)),
      layers_(layers),
      schedule_(std::move(schedule)),
      bias_overridden_(bias.has_value()),
      seed_with_source_(seed_with_source) {
    if (!op_) throw ValidationError("network needs an operator");
    if (layers_ < 1) throw ValidationError("network needs at least one hidden layer");
    if (!schedule_.satisfies_km_condition()) {
        throw ValidationError(
            "kappa = 1 requires a contractive operator; pass contractive = true or use kappa < 1");
    }
    if (bias) {
        if (bias->size() != static_cast<Eigen::Index>(op_->size())) {
            throw ValidationError("bias vector size does not match the grid");
        }
        if (!bias->allFinite()) throw NumericalError("bias vector contains non-finite entries");
        source_ = std::move(*bias);
    } else {
        source_ = op_->source();
    }
}

Eigen::MatrixXd FredholmNet::hidden_weight(std::size_t layer) const {
    if (layer < 2 || layer > layers_) throw ValidationError("hidden weights exist for layers 2..M");
    Eigen::MatrixXd w = op_->matrix();
    if (schedule_.form() == KmForm::relaxed) w *= kappa(layer);
    w.diagonal().array() += 1.0 - kappa(layer);
    return w;
}

Eigen::VectorXd FredholmNet::hidden_bias(std::size_t layer) const {
    if (layer < 2 || layer > layers_) throw ValidationError("hidden biases exist for layers 2..M");
    return kappa(layer) * source_;
}

Eigen::VectorXd FredholmNet::step(const Eigen::VectorXd& previous, std::size_t layer) const {
    if (layer < 2 || layer > layers_) throw ValidationError("hidden steps exist for layers 2..M");
    const double k = kappa(layer);
    return schedule_.form() == KmForm::relaxed ? apply_relaxed_km_step(*op_, source_, previous, k)
                                               : apply_km_step(*op_, source_, previous, k);
}

Eigen::VectorXd FredholmNet::first_layer_output() const {
    return seed_with_source_ ? source_ : Eigen::VectorXd(kappa(1) * source_);
}

FredholmNet build_network(std::shared_ptr<const DiscreteOperator> op, std::size_t layers, KmSchedule schedule) {
    return FredholmNet(std::move(op), layers, std::move(schedule));
}

SolutionField forward(const FredholmNet& net, bool keep_history) {
    SolutionField out{net.op().grid(), net.first_layer_output(), {}};
    if (keep_history) {
        out.history.reserve(net.layers());
        out.history.push_back(out.values);
    }
    for (std::size_t m = 2; m <= net.layers(); ++m) {
        out.values = net.step(out.values, m);
        if (!out.values.allFinite()) {
            throw NumericalError("divergent iteration: non-finite values at hidden layer " + std::to_string(m));
        }
        if (keep_history) out.history.push_back(out.values);
    }
    return out;
}

QueryLayer::QueryLayer(const DiscreteOperator& op, std::span<const double> points,
                       std::optional<Eigen::VectorXd> source_values)
    : points_(points.begin(), points.end()) {
    const auto rows = static_cast<Eigen::Index>(points_.size());
    const auto cols = static_cast<Eigen::Index>(op.size());
    const Grid1D& grid = op.grid();
    const double dz = grid.spacing();

    if (source_values && source_values->size() != rows) {
        throw ValidationError("query source values do not match the number of query points");
    }
    weights_.resize(rows, cols);
    bias_.resize(rows);
    for (Eigen::Index k = 0; k < rows; ++k) {
        const double x = points_[static_cast<std::size_t>(k)];
        if (!std::isfinite(x) || (!grid.periodic() && !grid.contains(x))) {
            throw ValidationError("query point " + std::to_string(x) + " outside domain [" +
                                  std::to_string(grid.a()) + ", " + std::to_string(grid.b()) + "]");
        }
        for (Eigen::Index j = 0; j < cols; ++j) {
            weights_(k, j) = op.kernel(x, grid[static_cast<std::size_t>(j)]) * dz;
        }
        bias_(k) = source_values ? (*source_values)(k) : op.source_at(x);
    }
    if (!weights_.allFinite() || !bias_.allFinite()) {
        throw NumericalError("query layer has non-finite weights or bias");
    }
}

QueryLayer QueryLayer::at_nodes(const DiscreteOperator& op, const Eigen::VectorXd& source) {
    QueryLayer layer;
    const auto nodes = op.grid().nodes();
    layer.points_.assign(nodes.begin(), nodes.end());
    layer.weights_ = op.matrix();
    layer.bias_ = source;
    return layer;
}

Eigen::VectorXd QueryLayer::apply(const Eigen::VectorXd& field) const {
    if (field.size() != weights_.cols()) throw ValidationError("field size does not match query layer");
    Eigen::VectorXd out = weights_ * field;
    out += bias_;
    return out;
}

std::vector<double> query(const FredholmNet& net, const SolutionField& field, std::span<const double> points) {
    if (!net.uses_operator_source()) {
        throw ValidationError("network bias was replaced; off-grid source values are unknown");
    }
    const Eigen::VectorXd out = QueryLayer(net.op(), points).apply(field.values);
    return {out.begin(), out.end()};
}

DenseSolution dense_solve(const DiscreteOperator& op) {
    const auto n = static_cast<Eigen::Index>(op.size());
    Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n) - op.matrix();
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
    const double rcond = lu.rcond();
    if (!(rcond > 1e-14)) {
        throw NumericalError("I - A is singular or ill-conditioned (reciprocal condition estimate " +
                             std::to_string(rcond) + ")");
    }
    Eigen::VectorXd f = lu.solve(op.source());
    if (!f.allFinite()) throw NumericalError("dense solve produced non-finite values");
    return {SolutionField{op.grid(), std::move(f), {}}, rcond};
}

double ErrorBudget::seed_error() const noexcept {
    const double length = b - a;
    return D * length * length / (2.0 * static_cast<double>(n)) + residual;
}

ErrorBudget make_error_budget(const DiscreteOperator& op) {
    ErrorBudget budget;
    budget.q = estimate_contraction(op);
    budget.D = estimate_derivative_bound(op);
    budget.a = op.grid().a();
    budget.b = op.grid().b();
    budget.n = op.size();
    budget.residual = residual_norm(op);
    return budget;
}

namespace {

void require_contraction(const ErrorBudget& budget) {
    if (!(budget.q < 1.0)) {
        throw ValidationError("error bound needs q < 1 (q = " + std::to_string(budget.q) +
                              "); use the KM estimate or an empirical sweep");
    }
    if (budget.q < 0.0) throw ValidationError("q must be non-negative");
}

}  // namespace

double error_bound(const ErrorBudget& budget, std::size_t layers) {
    require_contraction(budget);
    return std::pow(budget.q, static_cast<double>(layers)) / (1.0 - budget.q) * budget.seed_error();
}

LayerPlan plan_layers(const ErrorBudget& budget, double epsilon) {
    require_contraction(budget);
    if (!(epsilon > 0.0)) throw ValidationError("target error must be positive");
    const double seed = budget.seed_error();
    if (error_bound(budget, 0) <= epsilon) return {0, true};
    if (budget.q == 0.0) return {1, false};

    const double estimate = (std::log(epsilon * (1.0 - budget.q)) - std::log(seed)) / std::log(budget.q);
    auto layers = static_cast<std::size_t>(std::max(0.0, std::ceil(estimate)));
    // The closed form is exact in real arithmetic; settle rounding at the boundary.
    while (layers > 0 && error_bound(budget, layers - 1) <= epsilon) --layers;
    while (error_bound(budget, layers) > epsilon) ++layers;
    return {layers, false};
}

double km_error_estimate(const ErrorBudget& budget, const KmSchedule& schedule, std::size_t layers) {
    require_contraction(budget);
    const double gap = 1.0 - budget.q;
    const double v = schedule.partial_sum(layers);
    return std::exp(gap) / gap * budget.residual * std::exp(-gap * v);
}

std::vector<SweepRow> layer_sweep(std::shared_ptr<const DiscreteOperator> op, const KmSchedule& schedule,
                                  std::size_t max_layers, const ScalarFunction& exact,
                                  std::span<const double> points) {
    if (max_layers < 1) throw ValidationError("layer sweep needs max_layers >= 1");
    const FredholmNet net(op, max_layers, schedule);

    std::optional<QueryLayer> output;
    std::vector<double> reference;
    if (exact) {
        output = points.empty() ? QueryLayer::at_nodes(*op, op->source()) : QueryLayer(*op, points);
        for (double x : output->points()) reference.push_back(exact(x));
    }

    std::vector<SweepRow> rows;
    rows.reserve(max_layers);
    Eigen::VectorXd h = net.first_layer_output();
    Eigen::VectorXd previous = Eigen::VectorXd::Zero(h.size());
    for (std::size_t m = 1; m <= max_layers; ++m) {
        if (m > 1) {
            previous = h;
            h = net.step(h, m);
            if (!h.allFinite()) {
                throw NumericalError("divergent iteration: non-finite values at hidden layer " + std::to_string(m));
            }
        }
        double err = 0.0;
        if (output) {
            const Eigen::VectorXd values = output->apply(h);
            for (Eigen::Index k = 0; k < values.size(); ++k) {
                err = std::max(err, std::fabs(values(k) - reference[static_cast<std::size_t>(k)]));
            }
        } else {
            err = (h - previous).cwiseAbs().maxCoeff();
        }
        rows.push_back({m, err});
    }
    return rows;
}

}  // namespace fredholm
