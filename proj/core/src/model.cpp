#include "drfr/model.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "drfr/error.hpp"

namespace drfr {

bool same_values(const Matrix& a, const Matrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

bool same_values(const Vector& a, const Vector& b) {
    return a.size() == b.size() && (a.array() == b.array()).all();
}

bool Sample::operator==(const Sample& other) const {
    return id == other.id && identity == other.identity && age == other.age &&
           same_values(features, other.features);
}

Matrix Dataset::feature_matrix() const {
    Matrix xs(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(samples.size()));
    for (std::size_t i = 0; i < samples.size(); ++i) {
        xs.col(static_cast<Eigen::Index>(i)) = samples[i].features;
    }
    return xs;
}

std::optional<std::size_t> Dataset::find(const std::string& id) const {
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].id == id) return i;
    }
    return std::nullopt;
}

std::vector<Violation> validate_dataset(const Dataset& dataset) {
    std::vector<Violation> out;
    if (dataset.dim == 0) out.push_back({"", "dimension must be positive"});

    std::unordered_set<std::string> seen;
    for (const auto& s : dataset.samples) {
        if (static_cast<std::size_t>(s.features.size()) != dataset.dim) {
            out.push_back({s.id, "feature length " + std::to_string(s.features.size()) +
                                     " differs from dataset dimension " +
                                     std::to_string(dataset.dim)});
        } else if (!s.features.allFinite()) {
            out.push_back({s.id, "non-finite feature entry"});
        }
        if (!seen.insert(s.id).second) out.push_back({s.id, "duplicate sample id"});
    }
    return out;
}

void require_valid(const Dataset& dataset) {
    const auto violations = validate_dataset(dataset);
    if (violations.empty()) return;
    const auto& v = violations.front();
    throw DataError(v.sample_id.empty() ? v.rule : "sample '" + v.sample_id + "': " + v.rule);
}

const char* to_string(EmbeddingKind kind) {
    switch (kind) {
        case EmbeddingKind::Linear: return "linear";
        case EmbeddingKind::PCA: return "pca";
    }
    return "unknown";
}

EmbeddingModel::EmbeddingModel(EmbeddingKind kind, Matrix weights)
    : kind_(kind), weights_(std::move(weights)) {
    if (weights_.rows() == 0 || weights_.cols() == 0) {
        throw InvalidArgument("embedding weights must be non-empty");
    }
    if (!weights_.allFinite()) throw InvalidArgument("embedding weights must be finite");
}

Vector EmbeddingModel::embed(const Vector& x) const {
    if (x.size() != weights_.cols()) {
        throw DimensionMismatch("embedding expects dimension " + std::to_string(weights_.cols()) +
                                ", got " + std::to_string(x.size()));
    }
    return weights_ * x;
}

Matrix EmbeddingModel::embed_all(const Matrix& xs) const {
    if (xs.rows() != weights_.cols()) {
        throw DimensionMismatch("embedding expects dimension " + std::to_string(weights_.cols()) +
                                ", got " + std::to_string(xs.rows()));
    }
    return weights_ * xs;
}

bool EmbeddingModel::operator==(const EmbeddingModel& other) const {
    return kind_ == other.kind_ && same_values(weights_, other.weights_);
}

MetricFactor::MetricFactor(Matrix factor) : factor_(std::move(factor)) {
    if (factor_.rows() == 0 || factor_.cols() == 0) {
        throw InvalidArgument("metric factor must be non-empty");
    }
    if (!factor_.allFinite()) throw InvalidArgument("metric factor must be finite");
}

MetricFactor MetricFactor::identity(std::size_t dim) {
    const auto n = static_cast<Eigen::Index>(dim);
    return MetricFactor(Matrix::Identity(n, n));
}

bool MetricFactor::operator==(const MetricFactor& other) const {
    return same_values(factor_, other.factor_);
}

DualMetric::DualMetric(MetricFactor age_metric, MetricFactor ind_metric)
    : age(std::move(age_metric)), ind(std::move(ind_metric)) {
    if (age.in_dim() != ind.in_dim()) {
        throw DimensionMismatch("age and individual metrics disagree on input dimension");
    }
}

void check_compatible(const Model& model, std::size_t feature_dim) {
    if (model.embedding.in_dim() != feature_dim) {
        throw DimensionMismatch("model expects feature dimension " +
                                std::to_string(model.embedding.in_dim()) + ", data has " +
                                std::to_string(feature_dim));
    }
    const auto d = model.embedding.out_dim();
    if (model.metric.age.in_dim() != d || model.metric.ind.in_dim() != d) {
        throw DimensionMismatch("metric input dimension differs from embedding output " +
                                std::to_string(d));
    }
}

void Hyperparams::validate() const {
    auto fail = [](const std::string& msg) { throw InvalidArgument(msg); };
    if (k_neighbors <= 0) fail("k_neighbors must be positive");
    if (bandwidth_t && !(*bandwidth_t > 0.0 && std::isfinite(*bandwidth_t))) {
        fail("bandwidth_t must be positive");
    }
    if (age_epsilon <= 0) fail("age_epsilon must be positive");
    if (!(margin_delta > 0.0) || !std::isfinite(margin_delta)) fail("margin_delta must be positive");
    if (!(graph_weight >= 0.0) || !std::isfinite(graph_weight)) {
        fail("graph_weight must be non-negative");
    }
    if (!(equality_weight >= 0.0) || !std::isfinite(equality_weight)) {
        fail("equality_weight must be non-negative");
    }
    if (!(retrieve_lambda >= 0.0) || !std::isfinite(retrieve_lambda)) {
        fail("retrieve_lambda must be non-negative");
    }
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        fail("learning_rate must be non-negative");
    }
    if (!(momentum >= 0.0 && momentum < 1.0)) fail("momentum must lie in [0, 1)");
    if (batch_size <= 0) fail("batch_size must be positive");
    if (epochs <= 0) fail("epochs must be positive");
    if (embed_dim < 0) fail("embed_dim must be non-negative");
}

std::size_t resolve_embed_dim(const Hyperparams& hyper, std::size_t feature_dim) {
    if (hyper.embed_dim > 0) return static_cast<std::size_t>(hyper.embed_dim);
    return std::min<std::size_t>(128, feature_dim);
}

}  // namespace drfr
