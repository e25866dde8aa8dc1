#include "drfr/loss.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "drfr/error.hpp"

namespace drfr {
namespace {

void require_dim(const Vector& v, std::size_t dim, const char* what) {
    if (static_cast<std::size_t>(v.size()) != dim) {
        throw DimensionMismatch(std::string(what) + " has dimension " + std::to_string(v.size()) +
                                ", expected " + std::to_string(dim));
    }
}

// Adds c * (e_a - e_b)(e_a - e_b)^T, so that F C F^T accumulates c * d d^T.
void add_pair(Matrix& lap, Eigen::Index a, Eigen::Index b, double c) {
    lap(a, a) += c;
    lap(b, b) += c;
    lap(a, b) -= c;
    lap(b, a) -= c;
}

}  // namespace

double mahalanobis(const MetricFactor& metric, const Vector& fa, const Vector& fb) {
    require_dim(fa, metric.in_dim(), "first vector");
    require_dim(fb, metric.in_dim(), "second vector");
    return (metric.factor() * (fa - fb)).squaredNorm();
}

double hinge(double y, double delta) { return std::max(0.0, delta - y); }

QuartetLossBreakdown quartet_loss(const QuartetEmbeddings& q, const DualMetric& metric,
                                  double delta, double equality_weight) {
    const double age_mn = mahalanobis(metric.age, q.i_m, q.j_n);
    const double age_mm = mahalanobis(metric.age, q.i_m, q.j_m);
    const double age_in = mahalanobis(metric.age, q.i_m, q.i_n);
    const double ind_mn = mahalanobis(metric.ind, q.i_m, q.j_n);
    const double ind_in = mahalanobis(metric.ind, q.i_m, q.i_n);
    const double ind_mm = mahalanobis(metric.ind, q.i_m, q.j_m);

    QuartetLossBreakdown out;
    out.hinge_age = hinge(age_mn - age_mm, delta);
    out.hinge_ind = hinge(ind_mn - ind_in, delta);
    out.eq_age = (age_mn - age_in) * (age_mn - age_in);
    out.eq_ind = (ind_mn - ind_mm) * (ind_mn - ind_mm);
    out.total = out.hinge_age + out.hinge_ind + equality_weight * (out.eq_age + out.eq_ind);
    return out;
}

ObjectiveEvaluation evaluate_objective(const Dataset& dataset,
                                       std::span<const QuartetIndex> quartets,
                                       std::span<const WeightedPair> edges,
                                       const EmbeddingModel& embedding, const DualMetric& metric,
                                       const Hyperparams& hyper, bool with_gradients) {
    check_compatible(Model{embedding, metric}, dataset.dim);

    // Compact the samples actually touched into local columns.
    const std::size_t n_total = dataset.size();
    std::vector<std::ptrdiff_t> local(n_total, -1);
    std::vector<std::size_t> involved;
    auto touch = [&](std::size_t idx) {
        if (idx >= n_total) throw DimensionMismatch("index " + std::to_string(idx) +
                                                    " outside dataset of " +
                                                    std::to_string(n_total));
        if (local[idx] < 0) {
            local[idx] = static_cast<std::ptrdiff_t>(involved.size());
            involved.push_back(idx);
        }
    };
    for (const auto& q : quartets) {
        touch(q.i_m);
        touch(q.i_n);
        touch(q.j_m);
        touch(q.j_n);
    }
    for (const auto& e : edges) {
        touch(e.a);
        touch(e.b);
    }

    const auto n = static_cast<Eigen::Index>(involved.size());
    Matrix xs(static_cast<Eigen::Index>(dataset.dim), n);
    for (Eigen::Index c = 0; c < n; ++c) {
        xs.col(c) = dataset[involved[static_cast<std::size_t>(c)]].features;
    }
    const Matrix f = embedding.weights() * xs;
    const Matrix z_age = metric.age.factor() * f;
    const Matrix z_ind = metric.ind.factor() * f;

    auto col = [&](std::size_t idx) { return static_cast<Eigen::Index>(local[idx]); };
    auto phi = [](const Matrix& z, Eigen::Index a, Eigen::Index b) {
        return (z.col(a) - z.col(b)).squaredNorm();
    };

    Matrix lap_age;
    Matrix lap_ind;
    Matrix lap_graph;
    if (with_gradients) {
        lap_age = Matrix::Zero(n, n);
        lap_ind = Matrix::Zero(n, n);
        lap_graph = Matrix::Zero(n, n);
    }

    const double delta = hyper.margin_delta;
    const double eq_w = hyper.equality_weight;
    ObjectiveEvaluation out;
    for (const auto& q : quartets) {
        const auto im = col(q.i_m);
        const auto in = col(q.i_n);
        const auto jm = col(q.j_m);
        const auto jn = col(q.j_n);

        const double age_mn = phi(z_age, im, jn);
        const double age_mm = phi(z_age, im, jm);
        const double age_in = phi(z_age, im, in);
        const double ind_mn = phi(z_ind, im, jn);
        const double ind_in = phi(z_ind, im, in);
        const double ind_mm = phi(z_ind, im, jm);

        const double y_age = age_mn - age_mm;
        const double y_ind = ind_mn - ind_in;
        const double gap_age = age_mn - age_in;
        const double gap_ind = ind_mn - ind_mm;
        out.quartet += hinge(y_age, delta) + hinge(y_ind, delta) +
                       eq_w * (gap_age * gap_age + gap_ind * gap_ind);

        if (!with_gradients) continue;
        if (y_age < delta) {
            add_pair(lap_age, im, jn, -1.0);
            add_pair(lap_age, im, jm, 1.0);
        }
        if (y_ind < delta) {
            add_pair(lap_ind, im, jn, -1.0);
            add_pair(lap_ind, im, in, 1.0);
        }
        add_pair(lap_age, im, jn, 2.0 * eq_w * gap_age);
        add_pair(lap_age, im, in, -2.0 * eq_w * gap_age);
        add_pair(lap_ind, im, jn, 2.0 * eq_w * gap_ind);
        add_pair(lap_ind, im, jm, -2.0 * eq_w * gap_ind);
    }

    for (const auto& e : edges) {
        const auto a = col(e.a);
        const auto b = col(e.b);
        out.locality += e.weight * (f.col(a) - f.col(b)).squaredNorm();
        if (with_gradients) add_pair(lap_graph, a, b, hyper.graph_weight * e.weight);
    }
    out.total = out.quartet + hyper.graph_weight * out.locality;

    if (with_gradients) {
        const Matrix& l_age = metric.age.factor();
        const Matrix& l_ind = metric.ind.factor();
        const Matrix f_age = f * lap_age;
        const Matrix f_ind = f * lap_ind;
        out.dM_age = f_age * f.transpose();
        out.dM_ind = f_ind * f.transpose();
        out.gradients.dL_age = 2.0 * l_age * out.dM_age;
        out.gradients.dL_ind = 2.0 * l_ind * out.dM_ind;
        const Matrix df = l_age.transpose() * (l_age * f_age) +
                          l_ind.transpose() * (l_ind * f_ind) + f * lap_graph;
        out.gradients.dW = 2.0 * df * xs.transpose();
    }
    return out;
}

double total_objective(const Dataset& dataset, std::span<const QuartetIndex> quartets,
                       const EmbeddingModel& embedding, const DualMetric& metric,
                       const GraphSet& graphs, const Hyperparams& hyper) {
    const auto edges = graphs.all_edges();
    return evaluate_objective(dataset, quartets, edges, embedding, metric, hyper, false).total;
}

GradientSet objective_gradients(const Dataset& dataset, std::span<const QuartetIndex> quartets,
                                const EmbeddingModel& embedding, const DualMetric& metric,
                                const GraphSet& graphs, const Hyperparams& hyper) {
    const auto edges = graphs.all_edges();
    return evaluate_objective(dataset, quartets, edges, embedding, metric, hyper, true).gradients;
}

}  // namespace drfr
