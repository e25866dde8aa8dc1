#include "drfr/retrieval.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <string>

#include "drfr/error.hpp"
#include "drfr/loss.hpp"

namespace drfr {
namespace {

void check_query(const Dataset& gallery, const Query& query, const Model& model) {
    check_compatible(model, gallery.dim);
    if (static_cast<std::size_t>(query.identity_ref.features.size()) != gallery.dim ||
        static_cast<std::size_t>(query.age_ref.features.size()) != gallery.dim) {
        throw DimensionMismatch("reference dimension differs from gallery dimension " +
                                std::to_string(gallery.dim));
    }
}

// Per-item identity and age distances, computed exactly as dual_score does.
struct Distances {
    std::vector<double> ind;
    std::vector<double> age;
};

Distances distances(const Dataset& gallery, const Query& query, const Model& model) {
    const Vector f_id = model.embedding.embed(query.identity_ref.features);
    const Vector f_age = model.embedding.embed(query.age_ref.features);
    Distances out;
    out.ind.reserve(gallery.size());
    out.age.reserve(gallery.size());
    for (const auto& item : gallery.samples) {
        const Vector f = model.embedding.embed(item.features);
        out.ind.push_back(mahalanobis(model.metric.ind, f, f_id));
        out.age.push_back(mahalanobis(model.metric.age, f, f_age));
    }
    return out;
}

void sort_ranked(RankedList& list) {
    std::sort(list.begin(), list.end(), [](const RankedEntry& a, const RankedEntry& b) {
        return a.score < b.score || (a.score == b.score && a.index < b.index);
    });
}

RankedList full_dual_ranking(const Dataset& gallery, const Query& query, const Model& model,
                             double lambda_age) {
    const auto dist = distances(gallery, query, model);
    RankedList list(gallery.size());
    for (std::size_t g = 0; g < gallery.size(); ++g) {
        list[g] = {g, dist.ind[g] + lambda_age * dist.age[g]};
    }
    sort_ranked(list);
    return list;
}

RankedList two_stage(const Dataset& gallery, const Query& query, const Model& model,
                     std::size_t candidates) {
    const auto dist = distances(gallery, query, model);
    RankedList stage1(gallery.size());
    for (std::size_t g = 0; g < gallery.size(); ++g) stage1[g] = {g, dist.ind[g]};
    sort_ranked(stage1);
    stage1.resize(candidates);
    for (auto& entry : stage1) entry.score = dist.age[entry.index];
    sort_ranked(stage1);
    return stage1;
}

}  // namespace

double dual_score(const Sample& item, const Query& query, const Model& model, double lambda_age) {
    const Vector f = model.embedding.embed(item.features);
    const Vector f_id = model.embedding.embed(query.identity_ref.features);
    const Vector f_age = model.embedding.embed(query.age_ref.features);
    return mahalanobis(model.metric.ind, f, f_id) +
           lambda_age * mahalanobis(model.metric.age, f, f_age);
}

RankedList retrieve(const Dataset& gallery, const Query& query, const Model& model,
                    double lambda_age, std::size_t k) {
    if (gallery.empty()) throw InvalidArgument("gallery is empty");
    if (k == 0 || k > gallery.size()) {
        throw InvalidArgument("K=" + std::to_string(k) + " outside [1, " +
                              std::to_string(gallery.size()) + "]");
    }
    if (!(lambda_age >= 0.0)) throw InvalidArgument("lambda_age must be non-negative");
    check_query(gallery, query, model);
    auto list = full_dual_ranking(gallery, query, model, lambda_age);
    list.resize(k);
    return list;
}

RankedList hierarchical_retrieve(const Dataset& gallery, const Query& query, const Model& model,
                                 std::size_t candidates, std::size_t k) {
    if (gallery.empty()) throw InvalidArgument("gallery is empty");
    if (candidates == 0 || candidates > gallery.size()) {
        throw InvalidArgument("candidate count C=" + std::to_string(candidates) +
                              " outside [1, " + std::to_string(gallery.size()) + "]");
    }
    if (k == 0 || k > candidates) {
        throw InvalidArgument("K=" + std::to_string(k) + " outside [1, C=" +
                              std::to_string(candidates) + "]");
    }
    check_query(gallery, query, model);
    auto list = two_stage(gallery, query, model, candidates);
    list.resize(k);
    return list;
}

EvalResult evaluate(const Dataset& gallery, std::span<const EvalQuery> queries,
                    const Model& model, std::span<const std::size_t> ks,
                    const EvalOptions& options) {
    if (queries.empty()) throw InvalidArgument("evaluation needs at least one query");
    if (gallery.empty()) throw InvalidArgument("gallery is empty");
    const bool hierarchical = options.method == RetrievalMethod::Hierarchical;
    if (hierarchical && (options.candidates == 0 || options.candidates > gallery.size())) {
        throw InvalidArgument("candidate count outside [1, gallery size]");
    }
    const std::size_t depth_limit = hierarchical ? options.candidates : gallery.size();
    for (const auto k : ks) {
        if (k == 0 || k > depth_limit) {
            throw InvalidArgument("K=" + std::to_string(k) + " outside [1, " +
                                  std::to_string(depth_limit) + "]");
        }
    }

    EvalResult result;
    result.ranks.reserve(queries.size());
    for (const auto& eq : queries) {
        if (eq.target >= gallery.size()) {
            throw InvalidArgument("target index " + std::to_string(eq.target) +
                                  " outside gallery of " + std::to_string(gallery.size()));
        }
        check_query(gallery, eq.query, model);
        const auto list = hierarchical
                              ? two_stage(gallery, eq.query, model, options.candidates)
                              : full_dual_ranking(gallery, eq.query, model, options.lambda_age);
        const auto want_identity = eq.query.identity_ref.identity;
        const auto want_age = static_cast<std::int64_t>(eq.query.age_ref.age);
        std::optional<std::size_t> rank;
        for (std::size_t r = 0; r < list.size(); ++r) {
            const auto idx = list[r].index;
            const auto& item = gallery[idx];
            const bool labels_match =
                item.identity == want_identity &&
                std::abs(static_cast<std::int64_t>(item.age) - want_age) <=
                    static_cast<std::int64_t>(options.age_tolerance);
            if (idx == eq.target || labels_match) {
                rank = r + 1;
                break;
            }
        }
        result.ranks.push_back(rank);
    }

    const auto total = static_cast<double>(queries.size());
    auto fraction_within = [&](std::size_t k) {
        std::size_t hits = 0;
        for (const auto& r : result.ranks) {
            if (r && *r <= k) ++hits;
        }
        return static_cast<double>(hits) / total;
    };
    for (const auto k : ks) result.top_k_accuracy[k] = fraction_within(k);
    const std::size_t depth = std::min(gallery.size(), options.cmc_depth);
    result.cmc.reserve(depth);
    for (std::size_t r = 0; r < depth; ++r) result.cmc.push_back(fraction_within(r + 1));
    return result;
}

bool is_monotone(const EvalResult& result) {
    double prev = 0.0;
    for (const auto& [k, acc] : result.top_k_accuracy) {
        if (acc < prev || acc > 1.0) return false;
        prev = acc;
    }
    prev = 0.0;
    for (const double c : result.cmc) {
        if (c < prev || c > 1.0) return false;
        prev = c;
    }
    return true;
}

void write_topk_csv(std::ostream& out, const EvalResult& result) {
    char buf[64];
    out << "k,accuracy\n";
    for (const auto& [k, acc] : result.top_k_accuracy) {
        std::snprintf(buf, sizeof buf, "%zu,%.6f\n", k, acc);
        out << buf;
    }
}

void write_cmc_csv(std::ostream& out, const EvalResult& result) {
    char buf[64];
    out << "rank,cmc\n";
    for (std::size_t r = 0; r < result.cmc.size(); ++r) {
        std::snprintf(buf, sizeof buf, "%zu,%.6f\n", r + 1, result.cmc[r]);
        out << buf;
    }
}

}  // namespace drfr
