#include "drfr/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include "drfr/error.hpp"
#include "drfr/graph.hpp"
#include "drfr/loss.hpp"
#include "drfr/psd.hpp"
#include "drfr/rng.hpp"

namespace drfr {
namespace {

constexpr std::uint64_t kInitStream = 0;
constexpr std::uint64_t kShuffleStream = 1;

struct Projected {
    std::vector<std::ptrdiff_t> column;  // dataset index -> column, -1 if absent
    Matrix age;
    Matrix ind;
};

Projected project(const Dataset& dataset, std::span<const std::size_t> indices,
                  const EmbeddingModel& embedding, const DualMetric& metric) {
    Projected p;
    p.column.assign(dataset.size(), -1);
    Matrix xs(static_cast<Eigen::Index>(dataset.dim), static_cast<Eigen::Index>(indices.size()));
    for (std::size_t c = 0; c < indices.size(); ++c) {
        p.column[indices[c]] = static_cast<std::ptrdiff_t>(c);
        xs.col(static_cast<Eigen::Index>(c)) = dataset[indices[c]].features;
    }
    const Matrix f = embedding.embed_all(xs);
    p.age = metric.age.factor() * f;
    p.ind = metric.ind.factor() * f;
    return p;
}

double margin_of(const Projected& p, const QuartetIndex& q) {
    const auto im = p.column[q.i_m];
    const auto in = p.column[q.i_n];
    const auto jm = p.column[q.j_m];
    const auto jn = p.column[q.j_n];
    auto phi = [](const Matrix& z, std::ptrdiff_t a, std::ptrdiff_t b) {
        return (z.col(a) - z.col(b)).squaredNorm();
    };
    return (phi(p.age, im, jn) - phi(p.age, im, jm)) + (phi(p.ind, im, jn) - phi(p.ind, im, in));
}

// Heavy-ball momentum: v <- mu v - lr g; theta <- theta + v.
void momentum_step(Matrix& param, Matrix& velocity, const Matrix& grad, double lr, double mu) {
    velocity = mu * velocity - lr * grad;
    param += velocity;
}

}  // namespace

double quartet_margin(const Dataset& dataset, const QuartetIndex& q,
                      const EmbeddingModel& embedding, const DualMetric& metric) {
    if (!is_valid_quartet(dataset, q)) throw InvalidArgument("not a valid quartet");
    const std::size_t idx[] = {q.i_m, q.i_n, q.j_m, q.j_n};
    return margin_of(project(dataset, idx, embedding, metric), q);
}

std::vector<QuartetIndex> mine_quartets(std::span<const std::size_t> batch,
                                        const Dataset& dataset, const EmbeddingModel& embedding,
                                        const DualMetric& metric) {
    auto quartets = enumerate_quartets(dataset, batch);
    if (quartets.empty()) return quartets;

    std::vector<std::size_t> unique(batch.begin(), batch.end());
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    const auto proj = project(dataset, unique, embedding, metric);

    std::vector<double> margins(quartets.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < quartets.size(); ++k) {
        margins[k] = margin_of(proj, quartets[k]);
        sum += margins[k];
    }
    const double mean = sum / static_cast<double>(quartets.size());

    std::vector<QuartetIndex> out;
    for (std::size_t k = 0; k < quartets.size(); ++k) {
        if (margins[k] < mean) out.push_back(quartets[k]);
    }
    return out;
}

void TrainConfig::validate() const {
    hyper.validate();
    if (hyper.batch_size < 4) throw InvalidArgument("batch_size must be at least 4");
    if (log_every <= 0) throw InvalidArgument("log_every must be positive");
}

Model initial_model(const Dataset& dataset, const Hyperparams& hyper, double scale) {
    if (!(scale > 0.0) || !std::isfinite(scale)) throw InvalidArgument("scale must be positive");
    const std::size_t d = resolve_embed_dim(hyper, dataset.dim);
    const double bound = 1.0 / std::sqrt(static_cast<double>(dataset.dim));
    Rng rng(mix_seed(hyper.seed, kInitStream));
    Matrix w(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(dataset.dim));
    // Row-major fill order so the draw sequence does not depend on storage order.
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
        for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = rng.uniform(-bound, bound) / scale;
    }
    return Model{EmbeddingModel(EmbeddingKind::Linear, std::move(w)),
                 DualMetric(MetricFactor::identity(d), MetricFactor::identity(d))};
}

double feature_scale(const Dataset& dataset) {
    const Matrix xs = dataset.feature_matrix();
    const Vector mean = xs.rowwise().mean();
    // Mean squared pairwise distance equals twice the mean squared distance to the centroid.
    const double spread = 2.0 * (xs.colwise() - mean).squaredNorm() / static_cast<double>(xs.cols());
    if (!(spread > 0.0) || !std::isfinite(spread)) return 1.0;
    return std::exp2(std::round(0.5 * std::log2(spread)));
}

TrainReport fit(const Dataset& dataset, const TrainConfig& config) {
    const auto started = std::chrono::steady_clock::now();
    config.validate();
    require_valid(dataset);
    const Hyperparams& hyper = config.hyper;

    const auto all_quartets = enumerate_quartets(dataset);
    if (all_quartets.empty()) {
        throw DataError("dataset contains no quartet (needs two identities seen at two ages)");
    }
    // Graph weights come from the raw features; the edge list is reused as-is below.
    const auto all_edges = build_graphs(dataset, hyper).all_edges();

    // Optimise in features divided by a power of two s, with W' = W s. Both
    // rescalings are exact, so objectives and margins match the raw problem bit
    // for bit and only the step geometry changes.
    const double scale = config.precondition ? feature_scale(dataset) : 1.0;
    Model start_model = config.resume ? *config.resume : initial_model(dataset, hyper, scale);
    check_compatible(start_model, dataset.dim);

    Dataset work = dataset;
    for (auto& sample : work.samples) sample.features /= scale;

    Matrix w = start_model.embedding.weights() * scale;
    Matrix l_age = start_model.metric.age.factor();
    Matrix l_ind = start_model.metric.ind.factor();
    const EmbeddingKind kind = start_model.embedding.kind();
    Matrix m_age;
    Matrix m_ind;
    if (config.direct_metric) {
        m_age = l_age.transpose() * l_age;
        m_ind = l_ind.transpose() * l_ind;
    }
    Matrix v_w = Matrix::Zero(w.rows(), w.cols());
    Matrix v_age = config.direct_metric ? Matrix::Zero(m_age.rows(), m_age.cols())
                                        : Matrix::Zero(l_age.rows(), l_age.cols());
    Matrix v_ind = config.direct_metric ? Matrix::Zero(m_ind.rows(), m_ind.cols())
                                        : Matrix::Zero(l_ind.rows(), l_ind.cols());

    auto current = [&]() {
        return Model{EmbeddingModel(kind, w),
                     DualMetric(MetricFactor(l_age), MetricFactor(l_ind))};
    };
    auto full_objective = [&](const Model& m) {
        const double value =
            evaluate_objective(work, all_quartets, all_edges, m.embedding, m.metric, hyper, false)
                .total;
        if (!std::isfinite(value)) {
            throw DivergenceError("objective became non-finite; lower the learning rate");
        }
        return value;
    };

    Model model = current();
    TrainReport report;
    report.objective.push_back(full_objective(model));

    Rng rng(mix_seed(hyper.seed, kShuffleStream));
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<char> in_batch(dataset.size(), 0);
    const auto batch_size = static_cast<std::size_t>(hyper.batch_size);
    const double lr = hyper.learning_rate;
    const double mu = hyper.momentum;

    for (int epoch = 1; epoch <= hyper.epochs; ++epoch) {
        rng.shuffle(std::span<std::size_t>(order));
        std::vector<std::size_t> mined_counts;
        for (std::size_t start = 0, b = 0; start < order.size(); start += batch_size, ++b) {
            const std::size_t stop = std::min(order.size(), start + batch_size);
            const std::span<const std::size_t> batch(order.data() + start, stop - start);

            const auto mined = mine_quartets(batch, work, model.embedding, model.metric);
            mined_counts.push_back(mined.size());

            for (const auto idx : batch) in_batch[idx] = 1;
            std::vector<WeightedPair> batch_edges;
            for (const auto& e : all_edges) {
                if (in_batch[e.a] && in_batch[e.b]) batch_edges.push_back(e);
            }
            for (const auto idx : batch) in_batch[idx] = 0;

            auto eval = evaluate_objective(work, mined, batch_edges, model.embedding, model.metric,
                                           hyper, true);
            if (config.average_batch && !mined.empty()) {
                const double inv = 1.0 / static_cast<double>(mined.size());
                eval.gradients.dW *= inv;
                eval.gradients.dL_age *= inv;
                eval.gradients.dL_ind *= inv;
                eval.dM_age *= inv;
                eval.dM_ind *= inv;
            }

            if (config.train_embedding) momentum_step(w, v_w, eval.gradients.dW, lr, mu);
            if (config.direct_metric) {
                momentum_step(m_age, v_age, eval.dM_age, lr, mu);
                momentum_step(m_ind, v_ind, eval.dM_ind, lr, mu);
                if (!m_age.allFinite() || !m_ind.allFinite()) {
                    throw DivergenceError("metric became non-finite; lower the learning rate");
                }
                m_age = psd_project(0.5 * (m_age + m_age.transpose()));
                m_ind = psd_project(0.5 * (m_ind + m_ind.transpose()));
                l_age = psd_factor(m_age);
                l_ind = psd_factor(m_ind);
            } else {
                momentum_step(l_age, v_age, eval.gradients.dL_age, lr, mu);
                momentum_step(l_ind, v_ind, eval.gradients.dL_ind, lr, mu);
            }
            if (!w.allFinite() || !l_age.allFinite() || !l_ind.allFinite()) {
                throw DivergenceError("parameters became non-finite; lower the learning rate");
            }
            model = current();

            if (config.on_step) {
                const Model visible{EmbeddingModel(kind, w / scale), model.metric};
                config.on_step(StepInfo{epoch, b, mined.size(), &visible});
            }
        }

        report.objective.push_back(full_objective(model));
        const std::size_t mined_total =
            std::accumulate(mined_counts.begin(), mined_counts.end(), std::size_t{0});
        report.mined.push_back(std::move(mined_counts));
        if (config.log != nullptr && (epoch % config.log_every == 0 || epoch == hyper.epochs)) {
            *config.log << "epoch=" << epoch << " objective=" << report.objective.back()
                        << " mined=" << mined_total << '\n';
        }
    }

    report.model = Model{EmbeddingModel(kind, w / scale), model.metric};
    report.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

}  // namespace drfr
