#include "drfr/synthetic.hpp"

#include <charconv>
#include <cmath>
#include <set>
#include <string>

#include "drfr/error.hpp"
#include "drfr/rng.hpp"

namespace drfr {
namespace {

constexpr std::uint64_t kGeometryStream = 100;
constexpr std::uint64_t kNoiseStreamBase = 1000;

Vector unit_gaussian(Rng& rng, std::size_t dim) {
    Vector v(static_cast<Eigen::Index>(dim));
    do {
        for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.normal();
    } while (v.norm() == 0.0);
    return v / v.norm();
}

std::uint32_t parse_u32(std::string_view s, std::string_view whole) {
    std::uint32_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
        throw InvalidArgument("malformed age range '" + std::string(whole) + "'");
    }
    return v;
}

}  // namespace

void SyntheticSpec::validate() const {
    if (n_identities == 0) throw InvalidArgument("n_identities must be positive");
    if (ages.empty()) throw InvalidArgument("ages must not be empty");
    if (std::set<std::uint32_t>(ages.begin(), ages.end()).size() != ages.size()) {
        throw InvalidArgument("ages must be distinct");
    }
    if (per_cell == 0) throw InvalidArgument("per_cell must be positive");
    if (dim == 0) throw InvalidArgument("dim must be positive");
    if (!(separation > 0.0) || !std::isfinite(separation)) {
        throw InvalidArgument("separation must be positive");
    }
    if (!(age_step > 0.0) || !std::isfinite(age_step)) {
        throw InvalidArgument("age_step must be positive");
    }
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidArgument("sigma must be non-negative");
}

SyntheticGeometry synthetic_geometry(const SyntheticSpec& spec) {
    spec.validate();
    Rng rng(mix_seed(spec.seed, kGeometryStream));
    const auto d = static_cast<Eigen::Index>(spec.dim);
    SyntheticGeometry g;
    g.identity_directions.resize(d, spec.n_identities);
    for (std::uint32_t c = 0; c < spec.n_identities; ++c) {
        g.identity_directions.col(c) = unit_gaussian(rng, spec.dim);
    }
    g.age_direction = unit_gaussian(rng, spec.dim);

    Matrix gauss(d, d);
    for (Eigen::Index r = 0; r < d; ++r) {
        for (Eigen::Index c = 0; c < d; ++c) gauss(r, c) = rng.normal();
    }
    Eigen::HouseholderQR<Matrix> qr(gauss);
    Matrix q = qr.householderQ() * Matrix::Identity(d, d);
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index c = 0; c < d; ++c) {
        if (r(c, c) < 0.0) q.col(c) *= -1.0;
    }
    g.rotation = std::move(q);
    return g;
}

Vector synthetic_prototype(const SyntheticSpec& spec, const SyntheticGeometry& geometry,
                           std::uint32_t identity, std::uint32_t age) {
    if (identity >= spec.n_identities) throw InvalidArgument("identity outside the spec");
    const Vector latent = geometry.identity_directions.col(identity) * spec.separation +
                          geometry.age_direction * (static_cast<double>(age) * spec.age_step);
    return geometry.rotation * latent;
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
    const auto geometry = synthetic_geometry(spec);
    Rng noise(mix_seed(spec.seed, kNoiseStreamBase + spec.draw));
    const std::string suffix = spec.draw == 0 ? "" : "_d" + std::to_string(spec.draw);

    Dataset dataset;
    dataset.dim = spec.dim;
    for (std::uint32_t c = 0; c < spec.n_identities; ++c) {
        for (const auto age : spec.ages) {
            const Vector proto = synthetic_prototype(spec, geometry, c, age);
            for (std::uint32_t r = 0; r < spec.per_cell; ++r) {
                Sample s;
                s.id = "i" + std::to_string(c) + "_a" + std::to_string(age) + "_r" +
                       std::to_string(r) + suffix;
                s.identity = c;
                s.age = age;
                s.features = proto;
                for (Eigen::Index k = 0; k < s.features.size(); ++k) {
                    s.features(k) += spec.sigma * noise.normal();
                }
                dataset.samples.push_back(std::move(s));
            }
        }
    }
    return dataset;
}

std::vector<std::uint32_t> parse_age_range(std::string_view text) {
    const auto first = text.find(':');
    if (first == std::string_view::npos) return {parse_u32(text, text)};
    const auto second = text.find(':', first + 1);
    if (second == std::string_view::npos || text.find(':', second + 1) != std::string_view::npos) {
        throw InvalidArgument("age range must be start:step:end, got '" + std::string(text) + "'");
    }
    const auto start = parse_u32(text.substr(0, first), text);
    const auto step = parse_u32(text.substr(first + 1, second - first - 1), text);
    const auto end = parse_u32(text.substr(second + 1), text);
    if (step == 0) throw InvalidArgument("age step must be positive");
    if (end < start) throw InvalidArgument("age range end precedes start");
    std::vector<std::uint32_t> ages;
    for (std::uint64_t a = start; a <= end; a += step) ages.push_back(static_cast<std::uint32_t>(a));
    return ages;
}

}  // namespace drfr
