#pragma once

#include <span>

#include "drfr/graph.hpp"
#include "drfr/model.hpp"
#include "drfr/quartet.hpp"

namespace drfr {

// ||L (fa - fb)||^2, i.e. (fa - fb)^T M (fa - fb) with M = L^T L.
double mahalanobis(const MetricFactor& metric, const Vector& fa, const Vector& fb);

// max(0, delta - y)
double hinge(double y, double delta);

// Embedded quartet f(x_i^m), f(x_i^n), f(x_j^m), f(x_j^n).
struct QuartetEmbeddings {
    Vector i_m;
    Vector i_n;
    Vector j_m;
    Vector j_n;
};

// Terms of the quartet loss. eq_* are the raw squared differences; `total`
// applies the equality weight (1.0 unless reweighted).
struct QuartetLossBreakdown {
    double hinge_age = 0.0;
    double hinge_ind = 0.0;
    double eq_age = 0.0;
    double eq_ind = 0.0;
    double total = 0.0;
};

// hinge_age = H(Phi_a(im, jn) - Phi_a(im, jm))
// hinge_ind = H(Phi_i(im, jn) - Phi_i(im, in))
// eq_age    = (Phi_a(im, jn) - Phi_a(im, in))^2
// eq_ind    = (Phi_i(im, jn) - Phi_i(im, jm))^2
QuartetLossBreakdown quartet_loss(const QuartetEmbeddings& q, const DualMetric& metric,
                                  double delta, double equality_weight = 1.0);

struct GradientSet {
    Matrix dW;
    Matrix dL_age;
    Matrix dL_ind;
};

// Value, parts and (optionally) gradients of the training objective
//   sum_q L_q + graph_weight * sum_edges w_ab ||W x_a - W x_b||^2.
struct ObjectiveEvaluation {
    double quartet = 0.0;
    double locality = 0.0;  // unweighted edge sum
    double total = 0.0;
    GradientSet gradients;  // empty matrices unless requested
    // Gradients with respect to M_age / M_ind, used when training M directly.
    Matrix dM_age;
    Matrix dM_ind;
};

// Core evaluator over an explicit edge list; all other objective entry points
// forward here. Quartet terms are reduced sequentially in list order.
ObjectiveEvaluation evaluate_objective(const Dataset& dataset,
                                       std::span<const QuartetIndex> quartets,
                                       std::span<const WeightedPair> edges,
                                       const EmbeddingModel& embedding, const DualMetric& metric,
                                       const Hyperparams& hyper, bool with_gradients);

double total_objective(const Dataset& dataset, std::span<const QuartetIndex> quartets,
                       const EmbeddingModel& embedding, const DualMetric& metric,
                       const GraphSet& graphs, const Hyperparams& hyper);

// Analytic gradients of total_objective; the hinge subgradient at its kink is 0.
GradientSet objective_gradients(const Dataset& dataset, std::span<const QuartetIndex> quartets,
                                const EmbeddingModel& embedding, const DualMetric& metric,
                                const GraphSet& graphs, const Hyperparams& hyper);

}  // namespace drfr
