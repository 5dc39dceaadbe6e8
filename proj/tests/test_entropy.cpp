#include <doctest.h>

#include <map>
#include <numeric>

#include "brs/entropy.hpp"
#include "brs/rng.hpp"

using namespace brs;

namespace {

BinaryMap random_map(Rng& rng, std::int64_t bit_count) {
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>((bit_count + 7) / 8));
    for (auto& b : bytes) b = static_cast<std::uint8_t>(rng.below(256));
    if (bit_count & 7) bytes.back() &= static_cast<std::uint8_t>(0xFFu << (8 - (bit_count & 7)));
    return binary_map_from_bytes(std::move(bytes), bit_count);
}

// Exhaustive minimum over prefix codes for tiny alphabets: every length
// assignment with lengths <= n-1 satisfying the Kraft inequality is
// realizable as a prefix code.
std::uint64_t min_prefix_cost(const std::vector<std::uint64_t>& freqs) {
    const int n = static_cast<int>(freqs.size());
    const int max_len = std::max(1, n - 1);
    std::vector<int> lens(static_cast<std::size_t>(n), 1);
    std::uint64_t best = ~0ull;
    for (;;) {
        double kraft = 0.0;
        for (int l : lens) kraft += std::ldexp(1.0, -l);
        if (kraft <= 1.0 + 1e-12) {
            std::uint64_t cost = 0;
            for (int i = 0; i < n; ++i) {
                cost += freqs[static_cast<std::size_t>(i)] *
                        static_cast<std::uint64_t>(lens[static_cast<std::size_t>(i)]);
            }
            best = std::min(best, cost);
        }
        int i = 0;
        while (i < n && lens[static_cast<std::size_t>(i)] == max_len) {
            lens[static_cast<std::size_t>(i)] = 1;
            ++i;
        }
        if (i == n) break;
        ++lens[static_cast<std::size_t>(i)];
    }
    return best;
}

std::uint64_t table_cost(const HuffmanTable& table,
                         const std::map<std::uint64_t, std::uint64_t>& counts) {
    std::uint64_t cost = 0;
    for (const auto& [sym, len] : table.lengths) cost += counts.at(sym) * len;
    return cost;
}

}  // namespace

TEST_CASE("pack_bits maps +-1 to MSB-first bytes") {
    Tensor t({1, 1, 8}, {1, -1, -1, 1, 1, -1, -1, 1});
    const BinaryMap map = pack_bits(t);
    CHECK(map.bit_count == 8);
    CHECK(map.bits.size() == 1);
    CHECK(map.bits[0] == 0b10011001);

    Tensor all_minus = Tensor::full({2, 2, 3}, -1.0);
    const BinaryMap zeros = pack_bits(all_minus);
    for (auto b : zeros.bits) CHECK(b == 0);

    Tensor bad({1, 1, 2}, {1.0, 0.5});
    CHECK_THROWS_AS(pack_bits(bad), ShapeError);
}

TEST_CASE("pack/unpack round trips a random 512-bit map") {
    Rng rng(1);
    Tensor t({8, 8, 8});
    for (std::int64_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform() < 0.5 ? -1.0 : 1.0;
    const BinaryMap map = pack_bits(t);
    CHECK(map.bit_count == 512);
    const Tensor back = unpack_bits(map);
    for (std::int64_t i = 0; i < t.numel(); ++i) CHECK(back[i] == t[i]);
}

TEST_CASE("group_symbols is MSB-first with zero-padded tail") {
    BinaryMap map = binary_map_from_bytes({0b10110011, 0b01011100}, 16);
    const auto k8 = group_symbols(map, 8);
    REQUIRE(k8.size() == 2);
    CHECK(k8[0] == 0b10110011);
    CHECK(k8[1] == 0b01011100);

    // 20 bits at k = 16: two symbols, 12 pad bits in the second
    BinaryMap m20 = binary_map_from_bytes({0xAB, 0xCD, 0xE0}, 20);
    const auto k16 = group_symbols(m20, 16);
    REQUIRE(k16.size() == 2);
    CHECK(k16[0] == 0xABCD);
    CHECK(k16[1] == 0xE000);

    CHECK(group_symbols(m20, 16) == k16);  // deterministic regrouping
    CHECK_THROWS_AS(group_symbols(m20, 12), ConfigError);
}

TEST_CASE("huffman lengths for frequencies {2,1,1} match the exhaustive optimum") {
    // symbols A=0 (x2), B=1, C=2
    std::vector<std::uint64_t> stream{0, 0, 1, 2};
    const HuffmanTable table = build_huffman(stream, 8);
    REQUIRE(table.lengths.size() == 3);
    std::map<std::uint64_t, std::uint64_t> counts{{0, 2}, {1, 1}, {2, 1}};
    std::map<std::uint64_t, int> got;
    for (const auto& [sym, len] : table.lengths) got[sym] = len;
    CHECK(got[0] == 1);
    CHECK(got[1] == 2);
    CHECK(got[2] == 2);
    CHECK(table_cost(table, counts) == min_prefix_cost({2, 1, 1}));
}

TEST_CASE("huffman is optimal on random small alphabets") {
    Rng rng(77);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(3));  // 2..4 symbols
        std::vector<std::uint64_t> stream;
        std::map<std::uint64_t, std::uint64_t> counts;
        std::vector<std::uint64_t> freqs;
        for (int s = 0; s < n; ++s) {
            const std::uint64_t f = 1 + rng.below(20);
            counts[static_cast<std::uint64_t>(s)] = f;
            freqs.push_back(f);
            for (std::uint64_t i = 0; i < f; ++i) stream.push_back(static_cast<std::uint64_t>(s));
        }
        const HuffmanTable table = build_huffman(stream, 8);
        CHECK(table_cost(table, counts) == min_prefix_cost(freqs));
    }
}

TEST_CASE("single distinct symbol gets code length 1") {
    std::vector<std::uint64_t> stream(4096, 0x00AB);
    const HuffmanTable table = build_huffman(stream, 16);
    REQUIRE(table.lengths.size() == 1);
    CHECK(table.lengths[0].second == 1);
    const EncodedPayload payload = huffman_encode(stream, table, 4096 * 16);
    CHECK(payload.code_bits == 4096);  // one bit per symbol
    // ratio excluding the header: 16x
    CHECK(static_cast<double>(payload.bit_count) / static_cast<double>(payload.code_bits) == 16.0);
    const auto decoded = huffman_decode(payload);
    CHECK(decoded == stream);
}

TEST_CASE("uniform 256-symbol alphabet gets flat 8-bit codes") {
    std::vector<std::uint64_t> stream;
    for (int rep = 0; rep < 3; ++rep)
        for (int s = 0; s < 256; ++s) stream.push_back(static_cast<std::uint64_t>(s));
    const HuffmanTable table = build_huffman(stream, 8);
    REQUIRE(table.lengths.size() == 256);
    for (const auto& [sym, len] : table.lengths) CHECK(len == 8);
}

TEST_CASE("kraft sum never exceeds one") {
    Rng rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        BinaryMap map = random_map(rng, 1024 + static_cast<std::int64_t>(rng.below(1024)));
        const HuffmanTable table = build_huffman(group_symbols(map, 8), 8);
        CHECK(table.kraft_sum() <= 1.0 + 1e-12);
    }
}

TEST_CASE("payload bits stay under symbol_count * (k + 1)") {
    Rng rng(33);
    for (int k : {8, 16}) {
        for (int trial = 0; trial < 10; ++trial) {
            // skewed stream: mostly zero bits with random bursts
            std::vector<std::uint8_t> bytes(512);
            for (auto& b : bytes) {
                b = rng.uniform() < 0.8 ? 0 : static_cast<std::uint8_t>(rng.below(256));
            }
            BinaryMap map = binary_map_from_bytes(std::move(bytes), 4096);
            const EncodedPayload payload = encode_binary_map(map, k);
            CHECK(payload.code_bits <=
                  static_cast<std::int64_t>(payload.symbol_count) * (k + 1));
        }
    }
}

TEST_CASE("encode/decode round trips are bit-exact") {
    Rng rng(1234);
    for (int k : {8, 16}) {
        for (int trial = 0; trial < 1000; ++trial) {
            const std::int64_t bits = 1 + static_cast<std::int64_t>(rng.below(700));
            BinaryMap map = random_map(rng, bits);
            const std::vector<std::uint8_t> wire = serialize_payload(encode_binary_map(map, k));
            const BinaryMap back = decode_binary_map(parse_payload(wire));
            CHECK(back.bit_count == map.bit_count);
            CHECK(back.bits == map.bits);
        }
    }
}

TEST_CASE("raw fallback round trips and is flagged by a zero-entry table") {
    Rng rng(55);
    BinaryMap map = random_map(rng, 333);
    const EncodedPayload payload = encode_binary_map(map, 16, /*force_raw=*/true);
    CHECK(payload.raw);
    const std::vector<std::uint8_t> wire = serialize_payload(payload);
    const EncodedPayload parsed = parse_payload(wire);
    CHECK(parsed.raw);
    CHECK(parsed.table.lengths.empty());
    const BinaryMap back = decode_binary_map(parsed);
    CHECK(back.bits == map.bits);
}

TEST_CASE("best-of encoding never exceeds either pure form") {
    Rng rng(61);
    for (int trial = 0; trial < 50; ++trial) {
        BinaryMap map = random_map(rng, 64 + static_cast<std::int64_t>(rng.below(1024)));
        const EncodedPayload best = encode_binary_map_best(map, 16);
        const EncodedPayload huff = encode_binary_map(map, 16);
        const EncodedPayload raw = encode_binary_map(map, 16, /*force_raw=*/true);
        CHECK(best.serialized_size_bytes() <=
              std::min(huff.serialized_size_bytes(), raw.serialized_size_bytes()));
        const BinaryMap back = decode_binary_map(parse_payload(serialize_payload(best)));
        CHECK(back.bits == map.bits);
    }
}

TEST_CASE("canonical table serialization is deterministic") {
    Rng rng(91);
    BinaryMap map = random_map(rng, 2048);
    const auto a = serialize_payload(encode_binary_map(map, 16));
    const auto b = serialize_payload(encode_binary_map(map, 16));
    CHECK(a == b);
}

TEST_CASE("encode rejects symbols outside the table support") {
    const HuffmanTable table = build_huffman({1, 1, 2, 2, 3}, 8);
    CHECK_THROWS_AS(huffman_encode({1, 2, 3, 4}, table, 32), Error);
}

TEST_CASE("decode detects corruption") {
    Rng rng(13);
    BinaryMap map = random_map(rng, 512);
    std::vector<std::uint8_t> wire = serialize_payload(encode_binary_map(map, 8));

    SUBCASE("truncated bitstream") {
        std::vector<std::uint8_t> cut(wire.begin(), wire.end() - 3);
        CHECK_THROWS_AS(decode_binary_map(parse_payload(cut)), IntegrityError);
    }
    SUBCASE("bad magic") {
        wire[0] ^= 0xFF;
        CHECK_THROWS_AS(parse_payload(wire), IntegrityError);
    }
    SUBCASE("headerless garbage") {
        CHECK_THROWS_AS(parse_payload(std::vector<std::uint8_t>{0xB1, 0x01}), IntegrityError);
    }
}

TEST_CASE("constant maps compress better with larger groups") {
    BinaryMap map = binary_map_from_bytes(std::vector<std::uint8_t>(4096, 0), 32768);
    double prev = 0.0;
    for (int k : {8, 16, 32, 64}) {
        const EncodedPayload payload = encode_binary_map(map, k);
        const double ratio = compression_ratio(map, payload);
        CHECK(ratio > prev);
        prev = ratio;
    }
}

TEST_CASE("all-zero megabit map at k = 64 compresses at least 32x") {
    const std::int64_t bits = 1 << 20;
    BinaryMap map = binary_map_from_bytes(std::vector<std::uint8_t>(bits / 8, 0), bits);
    const EncodedPayload payload = encode_binary_map(map, 64);
    CHECK(compression_ratio(map, payload) >= 32.0);
}

TEST_CASE("incompressible bits land near ratio 1 at k = 8") {
    Rng rng(2718);
    BinaryMap map = random_map(rng, 1 << 20);
    const EncodedPayload payload = encode_binary_map(map, 8);
    const double ratio = compression_ratio(map, payload);
    CHECK(ratio >= 0.9);
    CHECK(ratio <= 1.02);
}
