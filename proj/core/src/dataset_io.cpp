#include "drfr/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "drfr/error.hpp"
#include "wire.hpp"

namespace drfr {
namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

template <typename T>
T parse_number(std::string_view field, std::size_t line, const char* what) {
    field = trim(field);
    T value{};
    const auto* first = field.data();
    const auto* last = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (field.empty() || ec != std::errc{} || ptr != last) {
        throw ParseError(line, std::string("malformed ") + what + " '" + std::string(field) + "'");
    }
    if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(value)) {
            throw ParseError(line, std::string("non-finite ") + what + " '" + std::string(field) +
                                       "'");
        }
    }
    return value;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
    return out;
}

}  // namespace

Dataset read_csv(std::istream& in) {
    std::string raw;
    std::size_t line_no = 0;
    auto next_line = [&](std::string_view& line) {
        while (std::getline(in, raw)) {
            ++line_no;
            if (!raw.empty() && raw.back() == '\r') raw.pop_back();
            line = raw;
            if (!trim(line).empty()) return true;
        }
        return false;
    };

    std::string_view line;
    if (!next_line(line)) throw ParseError(0, "empty file");
    const auto header = split_commas(line);
    if (header.size() < 4 || trim(header[0]) != "id" || trim(header[1]) != "identity" ||
        trim(header[2]) != "age") {
        throw ParseError(line_no, "header must be id,identity,age,f0,...,f{D-1}");
    }
    for (std::size_t c = 3; c < header.size(); ++c) {
        if (trim(header[c]) != "f" + std::to_string(c - 3)) {
            throw ParseError(line_no, "expected column 'f" + std::to_string(c - 3) + "', found '" +
                                          std::string(trim(header[c])) + "'");
        }
    }

    Dataset dataset;
    dataset.dim = header.size() - 3;
    std::unordered_set<std::string> ids;
    while (next_line(line)) {
        const auto fields = split_commas(line);
        if (fields.size() != header.size()) {
            throw ParseError(line_no, "expected " + std::to_string(header.size()) +
                                          " fields, found " + std::to_string(fields.size()));
        }
        Sample s;
        s.id = std::string(trim(fields[0]));
        if (s.id.empty()) throw ParseError(line_no, "empty sample id");
        if (!ids.insert(s.id).second) throw ParseError(line_no, "duplicate id '" + s.id + "'");
        s.identity = parse_number<std::uint32_t>(fields[1], line_no, "identity");
        s.age = parse_number<std::uint32_t>(fields[2], line_no, "age");
        s.features.resize(static_cast<Eigen::Index>(dataset.dim));
        for (std::size_t c = 0; c < dataset.dim; ++c) {
            s.features(static_cast<Eigen::Index>(c)) =
                parse_number<double>(fields[c + 3], line_no, "feature");
        }
        dataset.samples.push_back(std::move(s));
    }
    if (dataset.samples.empty()) throw ParseError(0, "no sample rows after the header");
    return dataset;
}

Dataset load_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    try {
        return read_csv(in);
    } catch (const ParseError& e) {
        throw ParseError(e.line(), e.detail(), path.string());
    }
}

void write_csv(std::ostream& out, const Dataset& dataset) {
    out << "id,identity,age";
    for (std::size_t c = 0; c < dataset.dim; ++c) out << ",f" << c;
    out << '\n';
    char buf[64];
    for (const auto& s : dataset.samples) {
        out << s.id << ',' << s.identity << ',' << s.age;
        for (Eigen::Index c = 0; c < s.features.size(); ++c) {
            std::snprintf(buf, sizeof buf, ",%.9g", s.features(c));
            out << buf;
        }
        out << '\n';
    }
}

void save_csv(const Dataset& dataset, const std::filesystem::path& path) {
    auto out = open_out(path);
    write_csv(out, dataset);
    if (!out) throw DataError("failed writing '" + path.string() + "'");
}

void write_binary(std::ostream& out, const Dataset& dataset) {
    require_valid(dataset);
    if (dataset.dim == 0 || dataset.dim > std::numeric_limits<std::uint32_t>::max()) {
        throw DataError("dataset dimension must be in [1, 2^32)");
    }
    if (dataset.empty()) throw DataError("cannot write an empty dataset");

    wire::Writer w(out);
    w.bytes(DatasetFileHeader::kMagic, 4);
    w.u16(DatasetFileHeader::kVersion);
    w.u32(static_cast<std::uint32_t>(dataset.dim));
    w.u64(dataset.size());
    for (const auto& s : dataset.samples) {
        if (s.age > std::numeric_limits<std::uint16_t>::max()) {
            throw DataError("sample '" + s.id + "': age does not fit in 16 bits");
        }
        w.string(s.id);
        w.u32(s.identity);
        w.u16(static_cast<std::uint16_t>(s.age));
        for (Eigen::Index c = 0; c < s.features.size(); ++c) {
            w.f32(static_cast<float>(s.features(c)));
        }
    }
    if (!out) throw DataError("write failed");
}

Dataset read_binary(std::istream& in) {
    wire::Reader r(in);
    char magic[4];
    r.bytes(magic, 4, "header");
    if (std::memcmp(magic, DatasetFileHeader::kMagic, 4) != 0) {
        throw DataError("bad magic: not a DRFR dataset file");
    }
    DatasetFileHeader header;
    header.version = r.u16("header");
    if (header.version != DatasetFileHeader::kVersion) {
        throw DataError("unsupported dataset version " + std::to_string(header.version));
    }
    header.dim = r.u32("header");
    header.count = r.u64("header");
    if (header.dim == 0) throw DataError("header dimension must be positive");
    if (header.count == 0) throw DataError("header sample count must be positive");

    Dataset dataset;
    dataset.dim = header.dim;
    for (std::uint64_t i = 0; i < header.count; ++i) {
        const std::string where = "sample " + std::to_string(i);
        Sample s;
        s.id = r.string(where.c_str());
        s.identity = r.u32(where.c_str());
        s.age = r.u16(where.c_str());
        s.features.resize(header.dim);
        for (std::uint32_t c = 0; c < header.dim; ++c) s.features(c) = r.f32(where.c_str());
        dataset.samples.push_back(std::move(s));
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        throw DataError("trailing bytes after " + std::to_string(header.count) + " samples");
    }
    const auto violations = validate_dataset(dataset);
    if (!violations.empty()) {
        throw DataError("sample '" + violations.front().sample_id + "': " + violations.front().rule);
    }
    return dataset;
}

void save_binary(const Dataset& dataset, const std::filesystem::path& path) {
    auto out = open_out(path);
    write_binary(out, dataset);
}

Dataset load_binary(const std::filesystem::path& path) {
    auto in = open_in(path);
    try {
        return read_binary(in);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::array<char, 4> magic{};
    {
        auto in = open_in(path);
        in.read(magic.data(), 4);
        if (in.gcount() == 4 && std::memcmp(magic.data(), DatasetFileHeader::kMagic, 4) == 0) {
            return load_binary(path);
        }
    }
    return load_csv(path);
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
    if (path.extension() == ".csv") {
        save_csv(dataset, path);
    } else {
        save_binary(dataset, path);
    }
}

Dataset quantize_to_float(Dataset dataset) {
    for (auto& s : dataset.samples) {
        s.features = s.features.cast<float>().cast<double>();
    }
    return dataset;
}

}  // namespace drfr
