#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "drfr/model.hpp"

namespace drfr {

// Dual reference: the wanted identity comes from identity_ref, the wanted age from age_ref.
struct Query {
    Sample identity_ref;
    Sample age_ref;
};

struct RankedEntry {
    std::size_t index = 0;  // gallery position
    double score = 0.0;

    bool operator==(const RankedEntry&) const = default;
};

// Ascending score, ties by ascending gallery index.
using RankedList = std::vector<RankedEntry>;

// Phi_ind(f(g), f(identity_ref)) + lambda_age * Phi_age(f(g), f(age_ref)).
double dual_score(const Sample& item, const Query& query, const Model& model, double lambda_age);

// Top-k of the gallery by dual_score. Throws InvalidArgument unless 1 <= k <= gallery size.
RankedList retrieve(const Dataset& gallery, const Query& query, const Model& model,
                    double lambda_age, std::size_t k);

// Two-stage baseline: keep the `candidates` best items by Phi_ind against
// identity_ref, re-rank them by Phi_age against age_ref, return the top k.
// Scores in the result are the stage-two age distances.
RankedList hierarchical_retrieve(const Dataset& gallery, const Query& query, const Model& model,
                                 std::size_t candidates, std::size_t k);

struct EvalQuery {
    Query query;
    std::size_t target = 0;  // a gallery position known to answer the query
};

enum class RetrievalMethod : std::uint8_t { Dual, Hierarchical };

struct EvalOptions {
    RetrievalMethod method = RetrievalMethod::Dual;
    double lambda_age = 1.0;
    std::size_t candidates = 100;  // hierarchical only
    std::uint32_t age_tolerance = 0;
    std::size_t cmc_depth = 50;  // CMC length is min(gallery size, cmc_depth)
};

struct EvalResult {
    std::map<std::size_t, double> top_k_accuracy;
    std::vector<double> cmc;  // cmc[r]: fraction of queries answered within rank r + 1
    // Best 1-based rank of a correct item per query; nullopt when none was ranked.
    std::vector<std::optional<std::size_t>> ranks;
};

// A gallery item answers a query when it is the explicit target or carries the
// identity of identity_ref and the age of age_ref (within age_tolerance); the
// best-ranked such item counts.
EvalResult evaluate(const Dataset& gallery, std::span<const EvalQuery> queries,
                    const Model& model, std::span<const std::size_t> ks,
                    const EvalOptions& options = {});

// Non-decreasing top-k in k and CMC in rank, values in [0, 1].
bool is_monotone(const EvalResult& result);

// "k,accuracy" and "rank,cmc" tables with six decimals.
void write_topk_csv(std::ostream& out, const EvalResult& result);
void write_cmc_csv(std::ostream& out, const EvalResult& result);

}  // namespace drfr
