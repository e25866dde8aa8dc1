#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "drfr/model.hpp"

namespace drfr {

// Binary dataset header: "DRFR", u16 version, u32 dim, u64 count, little-endian.
struct DatasetFileHeader {
    static constexpr char kMagic[4] = {'D', 'R', 'F', 'R'};
    static constexpr std::uint16_t kVersion = 1;

    std::uint16_t version = kVersion;
    std::uint32_t dim = 0;
    std::uint64_t count = 0;
};

// CSV with header "id,identity,age,f0,...,f{D-1}". LF and CRLF are both accepted.
// Throws ParseError with the offending line number.
Dataset read_csv(std::istream& in);
Dataset load_csv(const std::filesystem::path& path);

// Features are written with 9 significant digits, enough to round-trip 32-bit floats.
void write_csv(std::ostream& out, const Dataset& dataset);
void save_csv(const Dataset& dataset, const std::filesystem::path& path);

// Per sample: u32 id length, UTF-8 id bytes, u32 identity, u16 age, D x f32 features.
void write_binary(std::ostream& out, const Dataset& dataset);
Dataset read_binary(std::istream& in);
void save_binary(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_binary(const std::filesystem::path& path);

// Sniffs the magic bytes: binary when the file starts with "DRFR", CSV otherwise.
Dataset load_dataset(const std::filesystem::path& path);
// CSV when the extension is ".csv", binary otherwise.
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

// Rounds every feature to the nearest 32-bit float, as storage would.
Dataset quantize_to_float(Dataset dataset);

}  // namespace drfr
