#include "drfr/quartet.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <utility>

namespace drfr {

bool is_valid_quartet(const Dataset& dataset, const QuartetIndex& q) {
    const std::size_t n = dataset.size();
    if (q.i_m >= n || q.i_n >= n || q.j_m >= n || q.j_n >= n) return false;
    const auto& im = dataset[q.i_m];
    const auto& in = dataset[q.i_n];
    const auto& jm = dataset[q.j_m];
    const auto& jn = dataset[q.j_n];
    return im.identity == in.identity && jm.identity == jn.identity &&
           im.identity != jm.identity && im.age == jm.age && in.age == jn.age &&
           im.age != in.age;
}

std::vector<QuartetIndex> enumerate_quartets(const Dataset& dataset) {
    std::vector<std::size_t> all(dataset.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return enumerate_quartets(dataset, all);
}

std::vector<QuartetIndex> enumerate_quartets(const Dataset& dataset,
                                             std::span<const std::size_t> subset) {
    using Cell = std::pair<std::uint32_t, std::uint32_t>;  // (identity, age)
    std::map<Cell, std::vector<std::size_t>> cells;
    std::set<std::uint32_t> identities;
    std::set<std::uint32_t> ages;

    std::vector<std::size_t> positions(subset.begin(), subset.end());
    std::sort(positions.begin(), positions.end());
    positions.erase(std::unique(positions.begin(), positions.end()), positions.end());
    for (const auto pos : positions) {
        const auto& s = dataset[pos];
        cells[{s.identity, s.age}].push_back(pos);
        identities.insert(s.identity);
        ages.insert(s.age);
    }

    auto cell = [&](std::uint32_t identity, std::uint32_t age) -> const std::vector<std::size_t>* {
        const auto it = cells.find({identity, age});
        return it == cells.end() ? nullptr : &it->second;
    };

    std::vector<QuartetIndex> out;
    for (auto i = identities.begin(); i != identities.end(); ++i) {
        for (auto j = std::next(i); j != identities.end(); ++j) {
            for (auto m = ages.begin(); m != ages.end(); ++m) {
                const auto* im = cell(*i, *m);
                const auto* jm = cell(*j, *m);
                if (im == nullptr || jm == nullptr) continue;
                for (auto n = std::next(m); n != ages.end(); ++n) {
                    const auto* in = cell(*i, *n);
                    const auto* jn = cell(*j, *n);
                    if (in == nullptr || jn == nullptr) continue;
                    for (const auto a : *im)
                        for (const auto b : *in)
                            for (const auto c : *jm)
                                for (const auto d : *jn) out.push_back({a, b, c, d});
                }
            }
        }
    }
    return out;
}

}  // namespace drfr
