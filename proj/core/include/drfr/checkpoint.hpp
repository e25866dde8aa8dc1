#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "drfr/model.hpp"

namespace drfr {

// Trained model plus the hyperparameters that produced it.
//
// Layout (little-endian): "DRFM", u16 version, u8 embedding kind, then W,
// L_age and L_ind each as u32 rows, u32 cols, rows*cols f64 in row-major
// order, then a u32-length-prefixed JSON object holding the hyperparameters.
// Doubles are stored bit-for-bit, so save/load round-trips exactly.
struct ModelCheckpoint {
    static constexpr char kMagic[4] = {'D', 'R', 'F', 'M'};
    static constexpr std::uint16_t kVersion = 1;

    std::uint16_t version = kVersion;
    Model model;
    Hyperparams hyper;

    bool operator==(const ModelCheckpoint&) const = default;
};

void write_checkpoint(std::ostream& out, const ModelCheckpoint& checkpoint);
ModelCheckpoint read_checkpoint(std::istream& in);

void save_checkpoint(const ModelCheckpoint& checkpoint, const std::filesystem::path& path);
ModelCheckpoint load_checkpoint(const std::filesystem::path& path);

// Human-readable multi-line summary.
std::string describe(const ModelCheckpoint& checkpoint);

}  // namespace drfr
