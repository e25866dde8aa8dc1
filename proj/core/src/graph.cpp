#include "drfr/graph.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <set>
#include <string>
#include <tuple>

#include "drfr/error.hpp"

namespace drfr {
namespace {

double squared_distance(const Dataset& dataset, std::size_t a, std::size_t b) {
    return (dataset[a].features - dataset[b].features).squaredNorm();
}

void check_bandwidth(Bandwidth t) {
    if (t && !(*t > 0.0 && std::isfinite(*t))) {
        throw InvalidArgument("bandwidth t must be positive");
    }
}

// Builds the symmetric weight matrix from local (u < v) pairs.
SimilarityGraph assemble(const Dataset& dataset, GraphKind kind, std::uint32_t label,
                         std::vector<std::size_t> nodes,
                         const std::vector<std::pair<std::size_t, std::size_t>>& local_pairs,
                         Bandwidth t) {
    std::vector<std::pair<std::size_t, std::size_t>> global_pairs;
    global_pairs.reserve(local_pairs.size());
    for (const auto& [u, v] : local_pairs) global_pairs.emplace_back(nodes[u], nodes[v]);

    double bandwidth = 1.0;
    if (t) {
        bandwidth = *t;
    } else if (!global_pairs.empty()) {
        bandwidth = auto_bandwidth(dataset, global_pairs);
    }

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(2 * local_pairs.size());
    for (std::size_t e = 0; e < local_pairs.size(); ++e) {
        const auto [u, v] = local_pairs[e];
        const double w =
            std::exp(-squared_distance(dataset, global_pairs[e].first, global_pairs[e].second) /
                     bandwidth);
        triplets.emplace_back(static_cast<int>(u), static_cast<int>(v), w);
        triplets.emplace_back(static_cast<int>(v), static_cast<int>(u), w);
    }
    const auto n = static_cast<Eigen::Index>(nodes.size());
    Eigen::SparseMatrix<double> weights(n, n);
    weights.setFromTriplets(triplets.begin(), triplets.end());
    weights.makeCompressed();
    return SimilarityGraph(kind, label, std::move(nodes), std::move(weights), bandwidth);
}

}  // namespace

SimilarityGraph::SimilarityGraph(GraphKind kind, std::uint32_t label,
                                 std::vector<std::size_t> nodes,
                                 Eigen::SparseMatrix<double> weights, double bandwidth)
    : kind_(kind),
      label_(label),
      nodes_(std::move(nodes)),
      weights_(std::move(weights)),
      bandwidth_(bandwidth) {
    for (int col = 0; col < weights_.outerSize(); ++col) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(weights_, col); it; ++it) {
            if (it.row() < it.col()) {
                auto a = nodes_[static_cast<std::size_t>(it.row())];
                auto b = nodes_[static_cast<std::size_t>(it.col())];
                if (a > b) std::swap(a, b);
                edges_.push_back({a, b, it.value()});
            }
        }
    }
    std::sort(edges_.begin(), edges_.end(), [](const WeightedPair& x, const WeightedPair& y) {
        return std::tie(x.a, x.b) < std::tie(y.a, y.b);
    });
}

SimilarityGraph build_per_age_graph(const Dataset& dataset, std::uint32_t age, int k,
                                    Bandwidth t) {
    if (k <= 0) throw InvalidArgument("neighbour count k must be positive");
    check_bandwidth(t);

    std::vector<std::size_t> nodes;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        if (dataset[i].age == age) nodes.push_back(i);
    }
    if (nodes.empty()) throw DataError("no sample has age " + std::to_string(age));

    const std::size_t n = nodes.size();
    Matrix dist(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t u = 0; u < n; ++u) {
        dist(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(u)) = 0.0;
        for (std::size_t v = u + 1; v < n; ++v) {
            const double d = squared_distance(dataset, nodes[u], nodes[v]);
            dist(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)) = d;
            dist(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(u)) = d;
        }
    }

    // Union of the directed kNN relations, as ordered local pairs.
    std::set<std::pair<std::size_t, std::size_t>> linked;
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), n - 1);
    std::vector<std::size_t> order;
    for (std::size_t u = 0; u < n; ++u) {
        order.clear();
        for (std::size_t v = 0; v < n; ++v) {
            if (v != u) order.push_back(v);
        }
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take),
                          order.end(), [&](std::size_t x, std::size_t y) {
                              const double dx = dist(static_cast<Eigen::Index>(u),
                                                     static_cast<Eigen::Index>(x));
                              const double dy = dist(static_cast<Eigen::Index>(u),
                                                     static_cast<Eigen::Index>(y));
                              return dx < dy || (dx == dy && x < y);
                          });
        for (std::size_t r = 0; r < take; ++r) {
            linked.emplace(std::min(u, order[r]), std::max(u, order[r]));
        }
    }
    return assemble(dataset, GraphKind::PerAge, age, std::move(nodes),
                    {linked.begin(), linked.end()}, t);
}

SimilarityGraph build_per_identity_graph(const Dataset& dataset, std::uint32_t identity,
                                         int epsilon, Bandwidth t) {
    if (epsilon <= 0) throw InvalidArgument("age threshold epsilon must be positive");
    check_bandwidth(t);

    std::vector<std::size_t> nodes;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        if (dataset[i].identity == identity) nodes.push_back(i);
    }
    if (nodes.empty()) throw DataError("no sample has identity " + std::to_string(identity));

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t u = 0; u < nodes.size(); ++u) {
        for (std::size_t v = u + 1; v < nodes.size(); ++v) {
            const auto m = static_cast<std::int64_t>(dataset[nodes[u]].age);
            const auto n = static_cast<std::int64_t>(dataset[nodes[v]].age);
            if (std::abs(m - n) < epsilon) pairs.emplace_back(u, v);
        }
    }
    return assemble(dataset, GraphKind::PerIdentity, identity, std::move(nodes), pairs, t);
}

double auto_bandwidth(const Dataset& dataset,
                      std::span<const std::pair<std::size_t, std::size_t>> pairs) {
    if (pairs.empty()) throw InvalidArgument("auto_bandwidth needs at least one pair");
    std::vector<double> d;
    d.reserve(pairs.size());
    for (const auto& [a, b] : pairs) d.push_back(squared_distance(dataset, a, b));
    std::sort(d.begin(), d.end());
    const std::size_t mid = d.size() / 2;
    const double median = d.size() % 2 == 1 ? d[mid] : 0.5 * (d[mid - 1] + d[mid]);
    return median > 0.0 ? median : 1.0;
}

double locality_penalty(const SimilarityGraph& graph, const EmbeddingModel& embedding,
                        const Dataset& dataset) {
    if (embedding.in_dim() != dataset.dim) {
        throw DimensionMismatch("embedding input dimension " + std::to_string(embedding.in_dim()) +
                                " differs from dataset dimension " + std::to_string(dataset.dim));
    }
    double total = 0.0;
    for (const auto& e : graph.edges()) {
        if (e.a >= dataset.size() || e.b >= dataset.size()) {
            throw DimensionMismatch("graph refers to samples outside the dataset");
        }
        const Vector diff = embedding.weights() * (dataset[e.a].features - dataset[e.b].features);
        total += e.weight * diff.squaredNorm();
    }
    return total;
}

std::vector<WeightedPair> GraphSet::all_edges() const {
    std::vector<WeightedPair> out;
    for (const auto* group : {&per_age, &per_identity}) {
        for (const auto& g : *group) out.insert(out.end(), g.edges().begin(), g.edges().end());
    }
    return out;
}

GraphSet build_graphs(const Dataset& dataset, const Hyperparams& hyper) {
    std::set<std::uint32_t> ages;
    std::set<std::uint32_t> identities;
    for (const auto& s : dataset.samples) {
        ages.insert(s.age);
        identities.insert(s.identity);
    }
    GraphSet graphs;
    for (const auto age : ages) {
        graphs.per_age.push_back(
            build_per_age_graph(dataset, age, hyper.k_neighbors, hyper.bandwidth_t));
    }
    for (const auto identity : identities) {
        graphs.per_identity.push_back(
            build_per_identity_graph(dataset, identity, hyper.age_epsilon, hyper.bandwidth_t));
    }
    return graphs;
}

void write_edge_list(std::ostream& out, const SimilarityGraph& graph, const Dataset& dataset) {
    const auto flags = out.flags();
    const auto precision = out.precision();
    out << std::setprecision(9);
    for (const auto& e : graph.edges()) {
        out << dataset[e.a].id << ' ' << dataset[e.b].id << ' ' << e.weight << '\n';
    }
    out.flags(flags);
    out.precision(precision);
}

}  // namespace drfr
