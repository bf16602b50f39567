#pragma once

// Fredholm network: a layered linear map whose weights are written down from
// the discretized integral operator instead of being trained.
//
//   layer 1:      h_1 = kappa_1 g                     (activation kappa g on the grid)
//   layer m > 1:  h_m = W_m h_{m-1} + kappa_m g,      W_m = A + (1 - kappa_m) I
//                 (W_m = kappa_m A + (1 - kappa_m) I for KmForm::relaxed)
//   query layer:  f(x_k) = sum_j K(x_k, z_j) dz h_M(z_j) + g(x_k)
//
// M hidden layers therefore perform M-1 grid iterations followed by one
// application of the discretized operator at the query points.

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "fredholm/integral_operator.hpp"

namespace fredholm {

struct SolutionField {
    Grid1D grid;
    Eigen::VectorXd values;
    std::vector<Eigen::VectorXd> history;  // h_1..h_M when retained
};

class FredholmNet {
public:
    /// `bias` replaces the operator's source vector (re-linearized problems);
    /// `seed_with_source` starts from h_1 = g instead of kappa_1 g.
    FredholmNet(std::shared_ptr<const DiscreteOperator> op, std::size_t layers, KmSchedule schedule,
                std::optional<Eigen::VectorXd> bias = std::nullopt, bool seed_with_source = false);

    const DiscreteOperator& op() const noexcept { return *op_; }
    const std::shared_ptr<const DiscreteOperator>& op_ptr() const noexcept { return op_; }
    std::size_t layers() const noexcept { return layers_; }
    std::size_t grid_iterations() const noexcept { return layers_ - 1; }
    const KmSchedule& schedule() const noexcept { return schedule_; }
    const Eigen::VectorXd& source() const noexcept { return source_; }
    bool seeds_with_source() const noexcept { return seed_with_source_; }
    bool uses_operator_source() const noexcept { return !bias_overridden_; }

    double kappa(std::size_t layer) const { return schedule_.at(layer); }

    /// h_m from h_{m-1} (m >= 2), in the schedule's KmForm.
    Eigen::VectorXd step(const Eigen::VectorXd& previous, std::size_t layer) const;

    /// W_m materialized; the network itself never stores it.
    Eigen::MatrixXd hidden_weight(std::size_t layer) const;
    Eigen::VectorXd hidden_bias(std::size_t layer) const;
    Eigen::VectorXd first_layer_output() const;

private:
    std::shared_ptr<const DiscreteOperator> op_;
    std::size_t layers_;
    KmSchedule schedule_;
    Eigen::VectorXd source_;
    bool bias_overridden_;
    bool seed_with_source_;
};

FredholmNet build_network(std::shared_ptr<const DiscreteOperator> op, std::size_t layers, KmSchedule schedule);

/// Throws NumericalError when an intermediate layer goes non-finite.
SolutionField forward(const FredholmNet& net, bool keep_history = false);

/// Dense output layer for a fixed set of query points.
class QueryLayer {
public:
    /// Rows use K(x_k, z_j) dz; bias is g(x_k) from `source_values`, or the
    /// operator's source function when omitted.
    QueryLayer(const DiscreteOperator& op, std::span<const double> points,
               std::optional<Eigen::VectorXd> source_values = std::nullopt);

    /// Query layer at the grid nodes themselves, with weights A and bias `source`.
    static QueryLayer at_nodes(const DiscreteOperator& op, const Eigen::VectorXd& source);

    Eigen::VectorXd apply(const Eigen::VectorXd& field) const;

    const Eigen::MatrixXd& weights() const noexcept { return weights_; }
    const Eigen::VectorXd& bias() const noexcept { return bias_; }
    const std::vector<double>& points() const noexcept { return points_; }

private:
    QueryLayer() = default;

    std::vector<double> points_;
    Eigen::MatrixXd weights_;
    Eigen::VectorXd bias_;
};

std::vector<double> query(const FredholmNet& net, const SolutionField& field, std::span<const double> points);

struct DenseSolution {
    SolutionField field;
    double reciprocal_condition;  // LU estimate of 1/cond_1(I - A)
};

/// Direct solve of (I - A) f = g, the limit of the kappa = 1 iteration.
DenseSolution dense_solve(const DiscreteOperator& op);

struct ErrorBudget {
    double q = 0.0;         // contraction estimate
    double D = 0.0;         // derivative bound of K(x,z) g(z) in z
    double a = 0.0;
    double b = 1.0;
    std::size_t n = 1;      // grid size
    double residual = 0.0;  // ||T g - g||
    std::optional<double> target;
    std::optional<std::size_t> planned_layers;

    /// D (b-a)^2 / (2N) + residual.
    double seed_error() const noexcept;
};

ErrorBudget make_error_budget(const DiscreteOperator& op);

/// q^M / (1-q) * (D (b-a)^2 / (2N) + residual).  Throws if q >= 1.
double error_bound(const ErrorBudget& budget, std::size_t layers);

struct LayerPlan {
    std::size_t layers;
    bool target_met_without_layers;  // epsilon already exceeds the M = 0 bound
};

/// Smallest M with error_bound(M) <= epsilon.
LayerPlan plan_layers(const ErrorBudget& budget, double epsilon);

/// e^{1-q}/(1-q) * residual * exp(-(1-q) v_M), v_M the sum of the first M kappas.
double km_error_estimate(const ErrorBudget& budget, const KmSchedule& schedule, std::size_t layers);

struct SweepRow {
    std::size_t layers;
    double max_error;  // vs exact at the query points, or ||h_M - h_{M-1}|| without exact
};

/// Runs the network with 1..max_layers hidden layers, sharing work between depths.
std::vector<SweepRow> layer_sweep(std::shared_ptr<const DiscreteOperator> op, const KmSchedule& schedule,
                                  std::size_t max_layers, const ScalarFunction& exact = {},
                                  std::span<const double> points = {});

}  // namespace fredholm
