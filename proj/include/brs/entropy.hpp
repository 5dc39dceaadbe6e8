#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "brs/tensor.hpp"

namespace brs {

// Packed form of a {-1,+1} latent: -1 -> 0, +1 -> 1, row-major
// channel-major order, MSB-first within each byte. Maps that wrap an
// arbitrary byte buffer (codec coefficients) carry zero dims.
struct BinaryMap {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::int64_t bit_count = 0;
    std::vector<std::uint8_t> bits;

    int get_bit(std::int64_t i) const { return (bits[i >> 3] >> (7 - (i & 7))) & 1; }
};

BinaryMap pack_bits(const Tensor& plus_minus_one);
Tensor unpack_bits(const BinaryMap& map);
BinaryMap binary_map_from_bytes(std::vector<std::uint8_t> bytes, std::int64_t bit_count);

// Splits the bit buffer into ceil(bit_count / k) symbols of k bits each,
// MSB-first; the final partial group is zero-padded.
std::vector<std::uint64_t> group_symbols(const BinaryMap& map, int k);

bool valid_group_bits(int k);

// Canonical prefix code over k-bit symbols. Only observed symbols appear;
// entries are kept sorted by symbol value.
struct HuffmanTable {
    int group_bits = 0;
    std::vector<std::pair<std::uint64_t, std::uint8_t>> lengths;  // (symbol, code length)

    // Derived canonical codes.
    std::unordered_map<std::uint64_t, std::pair<std::uint64_t, int>> codes;

    void build_codes();  // canonical assignment by (length, symbol)
    double kraft_sum() const;
    std::int64_t serialized_bits() const;
};

// Optimal prefix code on the empirical frequencies of the stream. Ties in
// tree construction break by ascending smallest-symbol so two builds from
// identical frequencies are byte-identical. A single distinct symbol gets
// code length 1. Lengths are capped at 64 by construction (deeper trees
// cannot arise at any stream length this artifact handles; the encoder
// falls back to raw fixed-width coding if they ever would).
HuffmanTable build_huffman(const std::vector<std::uint64_t>& stream, int k);

// Self-delimiting encoded block. Layout (all little-endian):
//   magic 0xB1, version u8, k u8, symbol_count u64, original bit_count u64,
//   table entry count u32, entries (symbol u64, length u8) sorted by symbol,
//   then the MSB-first packed code bitstream.
// A zero table entry count flags raw fixed k-bit coding.
struct EncodedPayload {
    int group_bits = 0;
    std::uint64_t symbol_count = 0;
    std::uint64_t bit_count = 0;  // bits of the original map
    bool raw = false;
    HuffmanTable table;
    std::vector<std::uint8_t> code_bytes;
    std::int64_t code_bits = 0;  // bits used inside code_bytes

    std::int64_t serialized_size_bytes() const;
};

inline constexpr std::uint8_t kPayloadMagic = 0xB1;
inline constexpr std::uint8_t kPayloadVersion = 1;

// Encodes a symbol stream with an existing table. Throws on symbols outside
// the table support.
EncodedPayload huffman_encode(const std::vector<std::uint64_t>& stream,
                              const HuffmanTable& table, std::uint64_t original_bit_count);
std::vector<std::uint64_t> huffman_decode(const EncodedPayload& payload);

// Convenience: group, build table, encode. force_raw selects the fixed-width
// fallback path.
EncodedPayload encode_binary_map(const BinaryMap& map, int k, bool force_raw = false);
// Picks whichever of the Huffman and raw forms serializes smaller; on short
// maps the table can outweigh the coded bits.
EncodedPayload encode_binary_map_best(const BinaryMap& map, int k);
// Inverse of encode_binary_map; dims are not stored in the payload and must
// be assigned by the caller if needed.
BinaryMap decode_binary_map(const EncodedPayload& payload);

std::vector<std::uint8_t> serialize_payload(const EncodedPayload& payload);
EncodedPayload parse_payload(std::span<const std::uint8_t> bytes);

// raw bits / serialized payload bits (header + table + codes).
double compression_ratio(const BinaryMap& map, const EncodedPayload& payload);

}  // namespace brs
