#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/SparseCore>

#include "drfr/model.hpp"

namespace drfr {

enum class GraphKind : std::uint8_t { PerAge, PerIdentity };

// Undirected weighted edge between two dataset positions, a < b.
struct WeightedPair {
    std::size_t a = 0;
    std::size_t b = 0;
    double weight = 0.0;

    bool operator==(const WeightedPair&) const = default;
};

// Heat-kernel similarity graph over one age slice (S^n) or one identity (S_i).
// Weights are stored over local node numbers; nodes()[k] maps back to the dataset.
class SimilarityGraph {
public:
    SimilarityGraph(GraphKind kind, std::uint32_t label, std::vector<std::size_t> nodes,
                    Eigen::SparseMatrix<double> weights, double bandwidth);

    GraphKind kind() const noexcept { return kind_; }
    // The age n for PerAge graphs, the identity i for PerIdentity graphs.
    std::uint32_t label() const noexcept { return label_; }
    const std::vector<std::size_t>& nodes() const noexcept { return nodes_; }
    const Eigen::SparseMatrix<double>& weights() const noexcept { return weights_; }
    double bandwidth() const noexcept { return bandwidth_; }

    // Each unordered edge once, in dataset positions, sorted by (a, b).
    const std::vector<WeightedPair>& edges() const noexcept { return edges_; }

private:
    GraphKind kind_;
    std::uint32_t label_;
    std::vector<std::size_t> nodes_;
    Eigen::SparseMatrix<double> weights_;
    double bandwidth_;
    std::vector<WeightedPair> edges_;
};

// Kernel bandwidth; std::nullopt selects auto_bandwidth over the realised edges.
using Bandwidth = std::optional<double>;

// S^n: samples at `age`, linked when either is among the other's k nearest
// neighbours (squared Euclidean distance, ties by dataset position).
SimilarityGraph build_per_age_graph(const Dataset& dataset, std::uint32_t age, int k,
                                    Bandwidth t);

// S_i: samples of `identity`, linked when their ages differ by strictly less than epsilon.
SimilarityGraph build_per_identity_graph(const Dataset& dataset, std::uint32_t identity,
                                         int epsilon, Bandwidth t);

// Median squared distance over the pairs; 1.0 when that median is zero.
double auto_bandwidth(const Dataset& dataset,
                      std::span<const std::pair<std::size_t, std::size_t>> pairs);

// Sum over edges of weight * ||W x_a - W x_b||^2.
double locality_penalty(const SimilarityGraph& graph, const EmbeddingModel& embedding,
                        const Dataset& dataset);

// Every S^n and S_i of a training set.
struct GraphSet {
    std::vector<SimilarityGraph> per_age;
    std::vector<SimilarityGraph> per_identity;

    // All edges of all graphs concatenated (per-age graphs first, each in label order).
    std::vector<WeightedPair> all_edges() const;
};

GraphSet build_graphs(const Dataset& dataset, const Hyperparams& hyper);

// Writes "src_id dst_id weight" lines, weights with 9 significant digits.
void write_edge_list(std::ostream& out, const SimilarityGraph& graph, const Dataset& dataset);

}  // namespace drfr
