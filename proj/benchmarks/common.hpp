#pragma once

#include "drfr/synthetic.hpp"

namespace bench {

inline drfr::Dataset synthetic(std::uint32_t identities, std::size_t dim, std::uint32_t draw = 0) {
    drfr::SyntheticSpec spec;
    spec.n_identities = identities;
    spec.ages = drfr::parse_age_range("20:4:36");
    spec.per_cell = 3;
    spec.dim = dim;
    spec.draw = draw;
    return drfr::generate_synthetic(spec);
}

}  // namespace bench
