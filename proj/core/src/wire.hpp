#pragma once

// Little-endian primitives shared by the dataset and checkpoint formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "drfr/error.hpp"

namespace drfr::wire {

class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}

    void bytes(const char* data, std::size_t n) { out_.write(data, static_cast<std::streamsize>(n)); }
    void u8(std::uint8_t v) { put(v, 1); }
    void u16(std::uint16_t v) { put(v, 2); }
    void u32(std::uint32_t v) { put(v, 4); }
    void u64(std::uint64_t v) { put(v, 8); }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

    void string(const std::string& s) {
        if (s.size() > std::numeric_limits<std::uint32_t>::max()) {
            throw DataError("string too long to serialise");
        }
        u32(static_cast<std::uint32_t>(s.size()));
        bytes(s.data(), s.size());
    }

private:
    void put(std::uint64_t v, int width) {
        char buf[8];
        for (int i = 0; i < width; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
        out_.write(buf, width);
    }

    std::ostream& out_;
};

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    void bytes(char* data, std::size_t n, const char* where) {
        in_.read(data, static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n) {
            throw DataError(std::string("truncated file while reading ") + where);
        }
    }
    std::uint8_t u8(const char* where) { return static_cast<std::uint8_t>(get(1, where)); }
    std::uint16_t u16(const char* where) { return static_cast<std::uint16_t>(get(2, where)); }
    std::uint32_t u32(const char* where) { return static_cast<std::uint32_t>(get(4, where)); }
    std::uint64_t u64(const char* where) { return get(8, where); }
    float f32(const char* where) { return std::bit_cast<float>(u32(where)); }
    double f64(const char* where) { return std::bit_cast<double>(u64(where)); }

    std::string string(const char* where, std::uint32_t max_len = 1u << 20) {
        const auto n = u32(where);
        if (n > max_len) throw DataError(std::string("implausible string length in ") + where);
        std::string s(n, '\0');
        if (n > 0) bytes(s.data(), n, where);
        return s;
    }

private:
    std::uint64_t get(int width, const char* where) {
        unsigned char buf[8];
        bytes(reinterpret_cast<char*>(buf), static_cast<std::size_t>(width), where);
        std::uint64_t v = 0;
        for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
        return v;
    }

    std::istream& in_;
};

}  // namespace drfr::wire
