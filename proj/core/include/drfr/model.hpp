#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace drfr {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// One item: precomputed feature vector plus identity and age labels.
struct Sample {
    std::string id;
    std::uint32_t identity = 0;
    std::uint32_t age = 0;  // whole years
    Vector features;

    bool operator==(const Sample& other) const;
};

// Shape-checked exact equality (Eigen's operator== asserts on shape mismatch).
bool same_values(const Matrix& a, const Matrix& b);
bool same_values(const Vector& a, const Vector& b);

struct Dataset {
    std::size_t dim = 0;
    std::vector<Sample> samples;

    std::size_t size() const noexcept { return samples.size(); }
    bool empty() const noexcept { return samples.empty(); }
    const Sample& operator[](std::size_t i) const { return samples[i]; }

    // D x N matrix, one column per sample.
    Matrix feature_matrix() const;

    // Position of the sample with the given id, if any.
    std::optional<std::size_t> find(const std::string& id) const;

    bool operator==(const Dataset&) const = default;
};

struct Violation {
    std::string sample_id;  // empty for dataset-level problems
    std::string rule;
};

// Checks every Sample/Dataset invariant; an empty result means valid.
std::vector<Violation> validate_dataset(const Dataset& dataset);

// Throws DataError carrying the first violation when the dataset is invalid.
void require_valid(const Dataset& dataset);

enum class EmbeddingKind : std::uint8_t { Linear = 0, PCA = 1 };

const char* to_string(EmbeddingKind kind);

// Linear map f(x) = W x from feature space (D) into the joint space (d).
class EmbeddingModel {
public:
    EmbeddingModel() = default;
    EmbeddingModel(EmbeddingKind kind, Matrix weights);

    EmbeddingKind kind() const noexcept { return kind_; }
    const Matrix& weights() const noexcept { return weights_; }
    std::size_t out_dim() const noexcept { return static_cast<std::size_t>(weights_.rows()); }
    std::size_t in_dim() const noexcept { return static_cast<std::size_t>(weights_.cols()); }

    Vector embed(const Vector& x) const;
    // Embeds every column of a D x N matrix.
    Matrix embed_all(const Matrix& xs) const;

    bool operator==(const EmbeddingModel& other) const;

private:
    EmbeddingKind kind_ = EmbeddingKind::Linear;
    Matrix weights_;
};

// Factor L (p x d) of a Mahalanobis matrix M = L^T L. PSD by construction.
class MetricFactor {
public:
    MetricFactor() = default;
    explicit MetricFactor(Matrix factor);

    static MetricFactor identity(std::size_t dim);

    const Matrix& factor() const noexcept { return factor_; }
    std::size_t in_dim() const noexcept { return static_cast<std::size_t>(factor_.cols()); }
    std::size_t out_dim() const noexcept { return static_cast<std::size_t>(factor_.rows()); }
    Matrix mahalanobis_matrix() const { return factor_.transpose() * factor_; }

    bool operator==(const MetricFactor& other) const;

private:
    Matrix factor_;
};

// Age metric and individual (identity) metric over the same joint space.
struct DualMetric {
    MetricFactor age;
    MetricFactor ind;

    DualMetric() = default;
    DualMetric(MetricFactor age_metric, MetricFactor ind_metric);

    std::size_t dim() const noexcept { return age.in_dim(); }
    bool operator==(const DualMetric&) const = default;
};

// Embedding plus metrics: everything needed to score a gallery.
struct Model {
    EmbeddingModel embedding;
    DualMetric metric;

    bool operator==(const Model&) const = default;
};

// Throws DimensionMismatch unless the metrics consume the embedding output
// and the embedding consumes vectors of dimension `feature_dim`.
void check_compatible(const Model& model, std::size_t feature_dim);

struct Hyperparams {
    int k_neighbors = 5;
    std::optional<double> bandwidth_t;  // nullopt selects the auto bandwidth
    int age_epsilon = 5;
    double margin_delta = 1.0;
    double graph_weight = 1.0;
    double equality_weight = 1.0;
    double retrieve_lambda = 1.0;
    double learning_rate = 1e-2;
    double momentum = 0.9;
    int batch_size = 64;
    int epochs = 50;
    int embed_dim = 0;  // 0 selects min(128, D)
    std::uint64_t seed = 0;

    // Throws InvalidArgument naming the first offending field.
    void validate() const;

    bool operator==(const Hyperparams&) const = default;
};

// Resolved joint-space dimension for a given feature dimension.
std::size_t resolve_embed_dim(const Hyperparams& hyper, std::size_t feature_dim);

}  // namespace drfr
