#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>

#include "drfr/model.hpp"
#include "drfr/rng.hpp"

namespace testing_support {

inline drfr::Sample sample(std::string id, std::uint32_t identity, std::uint32_t age,
                           std::initializer_list<double> features) {
    drfr::Sample s;
    s.id = std::move(id);
    s.identity = identity;
    s.age = age;
    s.features.resize(static_cast<Eigen::Index>(features.size()));
    Eigen::Index i = 0;
    for (const double f : features) s.features(i++) = f;
    return s;
}

inline drfr::Vector random_vector(drfr::Rng& rng, Eigen::Index n, double scale = 1.0) {
    drfr::Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = scale * rng.normal();
    return v;
}

inline drfr::Matrix random_matrix(drfr::Rng& rng, Eigen::Index r, Eigen::Index c,
                                  double scale = 1.0) {
    drfr::Matrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = scale * rng.normal();
    return m;
}

// identities x ages grid with `per_cell` samples each and Gaussian features.
inline drfr::Dataset random_grid(drfr::Rng& rng, std::uint32_t identities, std::uint32_t ages,
                                 std::uint32_t per_cell, std::size_t dim) {
    drfr::Dataset ds;
    ds.dim = dim;
    for (std::uint32_t i = 0; i < identities; ++i)
        for (std::uint32_t a = 0; a < ages; ++a)
            for (std::uint32_t r = 0; r < per_cell; ++r) {
                drfr::Sample s;
                s.id = "s" + std::to_string(ds.size());
                s.identity = i;
                s.age = 20 + a;
                s.features = random_vector(rng, static_cast<Eigen::Index>(dim));
                ds.samples.push_back(std::move(s));
            }
    return ds;
}

}  // namespace testing_support
