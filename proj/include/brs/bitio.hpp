#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "brs/errors.hpp"

namespace brs {

// MSB-first bit sink. Trailing pad bits of the final byte are zero.
class BitWriter {
public:
    void put_bit(int bit) {
        if (bit_pos_ == 0) bytes_.push_back(0);
        if (bit) bytes_.back() |= static_cast<std::uint8_t>(1u << (7 - bit_pos_));
        bit_pos_ = (bit_pos_ + 1) & 7;
    }
    void put_bits(std::uint64_t value, int count) {
        for (int i = count - 1; i >= 0; --i) put_bit(static_cast<int>((value >> i) & 1u));
    }
    std::int64_t bit_count() const {
        return static_cast<std::int64_t>(bytes_.size()) * 8 - (bit_pos_ ? 8 - bit_pos_ : 0);
    }
    const std::vector<std::uint8_t>& bytes() const { return bytes_; }
    std::vector<std::uint8_t> take() { bit_pos_ = 0; return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
    int bit_pos_ = 0;
};

// MSB-first bit source over a fixed buffer.
class BitReader {
public:
    BitReader(const std::uint8_t* data, std::int64_t bit_count)
        : data_(data), bit_count_(bit_count) {}
    explicit BitReader(std::span<const std::uint8_t> bytes)
        : data_(bytes.data()), bit_count_(static_cast<std::int64_t>(bytes.size()) * 8) {}

    int get_bit() {
        if (pos_ >= bit_count_) throw IntegrityError("bitstream truncated");
        const std::int64_t byte = pos_ >> 3;
        const int off = static_cast<int>(pos_ & 7);
        ++pos_;
        return (data_[byte] >> (7 - off)) & 1;
    }
    std::uint64_t get_bits(int count) {
        std::uint64_t v = 0;
        for (int i = 0; i < count; ++i) v = (v << 1) | static_cast<std::uint64_t>(get_bit());
        return v;
    }
    std::int64_t remaining() const { return bit_count_ - pos_; }
    std::int64_t position() const { return pos_; }

private:
    const std::uint8_t* data_;
    std::int64_t bit_count_;
    std::int64_t pos_ = 0;
};

// Little-endian scalar append/read helpers used by all file formats.
inline void put_u8(std::vector<std::uint8_t>& out, std::uint8_t v) { out.push_back(v); }
inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
inline void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
inline void put_f64(std::vector<std::uint8_t>& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(out, bits);
}
inline void put_string(std::vector<std::uint8_t>& out, const std::string& s) {
    if (s.size() > 255) throw Error("string field too long");
    put_u8(out, static_cast<std::uint8_t>(s.size()));
    out.insert(out.end(), s.begin(), s.end());
}

// Bounds-checked cursor over a byte buffer; throws IntegrityError on
// truncation.
class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::uint8_t u8() { return take(1)[0]; }
    std::uint32_t u32() {
        auto b = take(4);
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
        return v;
    }
    std::uint64_t u64() {
        auto b = take(8);
        std::uint64_t v = 0;
        for (int i = 7; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
        return v;
    }
    double f64() {
        std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    std::string string() {
        const std::size_t n = u8();
        auto b = take(n);
        return std::string(b.begin(), b.end());
    }
    std::span<const std::uint8_t> take(std::size_t n) {
        if (pos_ + n > bytes_.size()) throw IntegrityError("buffer truncated");
        auto s = bytes_.subspan(pos_, n);
        pos_ += n;
        return s;
    }
    std::size_t remaining() const { return bytes_.size() - pos_; }
    bool done() const { return pos_ == bytes_.size(); }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

// FNV-1a, used for checkpoint fingerprints and cache keys.
inline std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes,
                             std::uint64_t seed = 1469598103934665603ull) {
    std::uint64_t h = seed;
    for (std::uint8_t b : bytes) {
        h ^= b;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace brs
