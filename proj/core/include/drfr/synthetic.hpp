#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "drfr/model.hpp"

namespace drfr {

// Parameters of the synthetic identity/age generator.
struct SyntheticSpec {
    std::uint32_t n_identities = 10;
    std::vector<std::uint32_t> ages;
    std::uint32_t per_cell = 3;
    std::size_t dim = 32;
    double separation = 4.0;
    double age_step = 1.0;
    double sigma = 0.3;
    std::uint64_t seed = 7;
    // Independent noise draw over the same latent geometry; 0 is the training draw,
    // other values give held-out sets. Ids of non-zero draws carry a "_d<draw>" suffix.
    std::uint32_t draw = 0;

    void validate() const;
};

// Latent structure shared by all draws of a seed.
struct SyntheticGeometry {
    Matrix identity_directions;  // D x n_identities, unit columns
    Vector age_direction;        // unit
    Matrix rotation;             // D x D orthogonal
};

SyntheticGeometry synthetic_geometry(const SyntheticSpec& spec);

// Noise-free feature vector R (u_c * separation + v * age * age_step).
Vector synthetic_prototype(const SyntheticSpec& spec, const SyntheticGeometry& geometry,
                           std::uint32_t identity, std::uint32_t age);

// Samples ordered by identity, then age (as listed), then replica; ids "i<c>_a<age>_r<r>".
Dataset generate_synthetic(const SyntheticSpec& spec);

// "start:step:end", inclusive; a bare integer is a single age.
std::vector<std::uint32_t> parse_age_range(std::string_view text);

}  // namespace drfr
