#pragma once

#include <cstddef>

#include "drfr/error.hpp"
#include "drfr/model.hpp"

namespace drfr {

// Requested more components than the centred data supports.
class RankDeficient : public InvalidArgument {
public:
    RankDeficient(std::size_t requested, std::size_t rank)
        : InvalidArgument("requested " + std::to_string(requested) +
                          " principal components but centred data has rank " +
                          std::to_string(rank) + "; reduce out_dim"),
          rank_(rank) {}

    std::size_t rank() const noexcept { return rank_; }

private:
    std::size_t rank_;
};

// Numerical rank of the mean-centred feature matrix.
std::size_t centred_rank(const Dataset& dataset);

// Top `out_dim` principal directions of the mean-centred features as the rows
// of W. Rows are orthonormal; the first non-zero entry of each row is >= 0.
// Throws RankDeficient when out_dim exceeds the centred rank.
EmbeddingModel pca_fit(const Dataset& dataset, std::size_t out_dim);

}  // namespace drfr
