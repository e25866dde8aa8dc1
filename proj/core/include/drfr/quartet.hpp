#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "drfr/model.hpp"

namespace drfr {

// Dataset positions of {x_i^m, x_i^n, x_j^m, x_j^n}: identities i != j, ages m != n.
struct QuartetIndex {
    std::size_t i_m = 0;
    std::size_t i_n = 0;
    std::size_t j_m = 0;
    std::size_t j_n = 0;

    bool operator==(const QuartetIndex&) const = default;
};

// True when the four positions are in range and realise the identity/age pattern.
bool is_valid_quartet(const Dataset& dataset, const QuartetIndex& q);

// Every quartet of the dataset with identity_i < identity_j and age_m < age_n,
// ordered lexicographically by (identity_i, identity_j, age_m, age_n) and then by
// dataset position. Each combination of samples in repeated cells is its own quartet.
std::vector<QuartetIndex> enumerate_quartets(const Dataset& dataset);

// Same enumeration restricted to the given dataset positions (any order,
// duplicates ignored). Returned indices still refer to the full dataset.
std::vector<QuartetIndex> enumerate_quartets(const Dataset& dataset,
                                             std::span<const std::size_t> subset);

}  // namespace drfr
