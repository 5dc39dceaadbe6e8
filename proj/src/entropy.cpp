#include "brs/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <tuple>

#include "brs/bitio.hpp"

namespace brs {

BinaryMap pack_bits(const Tensor& plus_minus_one) {
    const auto& shape = plus_minus_one.shape();
    BinaryMap map;
    if (shape.size() == 3) {
        map.channels = shape[0];
        map.height = shape[1];
        map.width = shape[2];
    } else {
        throw ShapeError("pack_bits: expected (C, h, w) tensor, got " +
                         plus_minus_one.shape_str());
    }
    map.bit_count = plus_minus_one.numel();
    map.bits.assign(static_cast<std::size_t>((map.bit_count + 7) / 8), 0);
    for (std::int64_t i = 0; i < map.bit_count; ++i) {
        const double v = plus_minus_one[i];
        if (v != 1.0 && v != -1.0) {
            throw ShapeError("pack_bits: value " + std::to_string(v) + " is not exactly +-1");
        }
        if (v == 1.0) map.bits[i >> 3] |= static_cast<std::uint8_t>(1u << (7 - (i & 7)));
    }
    return map;
}

Tensor unpack_bits(const BinaryMap& map) {
    if (map.channels <= 0) throw ShapeError("unpack_bits: map carries no dims");
    if (static_cast<std::int64_t>(map.channels) * map.height * map.width != map.bit_count) {
        throw IntegrityError("unpack_bits: dims disagree with bit count");
    }
    Tensor t({map.channels, map.height, map.width});
    for (std::int64_t i = 0; i < map.bit_count; ++i) t[i] = map.get_bit(i) ? 1.0 : -1.0;
    return t;
}

BinaryMap binary_map_from_bytes(std::vector<std::uint8_t> bytes, std::int64_t bit_count) {
    if (bit_count < 0 || (bit_count + 7) / 8 != static_cast<std::int64_t>(bytes.size())) {
        throw ShapeError("binary_map_from_bytes: bit count does not match buffer size");
    }
    BinaryMap map;
    map.bit_count = bit_count;
    map.bits = std::move(bytes);
    if (bit_count & 7) {
        // trailing pad bits must be zero
        map.bits.back() &= static_cast<std::uint8_t>(0xFFu << (8 - (bit_count & 7)));
    }
    return map;
}

bool valid_group_bits(int k) { return k == 8 || k == 16 || k == 32 || k == 64; }

std::vector<std::uint64_t> group_symbols(const BinaryMap& map, int k) {
    if (!valid_group_bits(k)) {
        throw ConfigError("group size " + std::to_string(k) + " unsupported (use 8|16|32|64)");
    }
    const std::int64_t n_symbols = (map.bit_count + k - 1) / k;
    std::vector<std::uint64_t> stream;
    stream.reserve(static_cast<std::size_t>(n_symbols));
    BitReader reader(map.bits.data(), map.bit_count);
    std::int64_t remaining = map.bit_count;
    for (std::int64_t s = 0; s < n_symbols; ++s) {
        const int take = static_cast<int>(std::min<std::int64_t>(k, remaining));
        std::uint64_t sym = reader.get_bits(take);
        if (take < k) sym <<= (k - take);  // zero-pad the final group
        if (k < 64) sym &= (1ull << k) - 1;
        stream.push_back(sym);
        remaining -= take;
    }
    return stream;
}

void HuffmanTable::build_codes() {
    codes.clear();
    auto order = lengths;
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
        return std::tie(a.second, a.first) < std::tie(b.second, b.first);
    });
    unsigned __int128 code = 0;
    int prev_len = 0;
    for (const auto& [sym, len] : order) {
        if (len == 0 || len > 64) throw IntegrityError("huffman table: invalid code length");
        if (prev_len != 0) code += 1;
        code <<= (len - prev_len);
        if (code >> len) throw IntegrityError("huffman table: canonical code overflow");
        codes[sym] = {static_cast<std::uint64_t>(code), len};
        prev_len = len;
    }
}

double HuffmanTable::kraft_sum() const {
    double s = 0.0;
    for (const auto& [sym, len] : lengths) s += std::ldexp(1.0, -static_cast<int>(len));
    return s;
}

std::int64_t HuffmanTable::serialized_bits() const {
    return static_cast<std::int64_t>(lengths.size()) * 9 * 8;
}

HuffmanTable build_huffman(const std::vector<std::uint64_t>& stream, int k) {
    if (!valid_group_bits(k)) {
        throw ConfigError("group size " + std::to_string(k) + " unsupported (use 8|16|32|64)");
    }
    if (stream.empty()) throw ShapeError("build_huffman: empty symbol stream");

    std::map<std::uint64_t, std::uint64_t> counts;
    for (std::uint64_t s : stream) ++counts[s];

    HuffmanTable table;
    table.group_bits = k;
    if (counts.size() == 1) {
        table.lengths.emplace_back(counts.begin()->first, 1);
        table.build_codes();
        return table;
    }

    struct Node {
        std::uint64_t weight;
        std::uint64_t min_symbol;  // smallest symbol in the subtree; breaks ties
        int left = -1, right = -1;
        std::int64_t leaf = -1;    // index into leaf symbol list
    };
    std::vector<Node> nodes;
    std::vector<std::uint64_t> leaf_symbols;
    using Key = std::tuple<std::uint64_t, std::uint64_t, int>;  // weight, min_symbol, node
    std::priority_queue<Key, std::vector<Key>, std::greater<>> heap;
    for (const auto& [sym, cnt] : counts) {
        Node n;
        n.weight = cnt;
        n.min_symbol = sym;
        n.leaf = static_cast<std::int64_t>(leaf_symbols.size());
        leaf_symbols.push_back(sym);
        heap.emplace(cnt, sym, static_cast<int>(nodes.size()));
        nodes.push_back(n);
    }
    while (heap.size() > 1) {
        auto [wa, ma, ia] = heap.top();
        heap.pop();
        auto [wb, mb, ib] = heap.top();
        heap.pop();
        Node parent;
        parent.weight = wa + wb;
        parent.min_symbol = std::min(ma, mb);
        parent.left = ia;
        parent.right = ib;
        heap.emplace(parent.weight, parent.min_symbol, static_cast<int>(nodes.size()));
        nodes.push_back(parent);
    }

    // Depth-first walk for code lengths.
    std::vector<std::pair<int, int>> stack{{static_cast<int>(nodes.size()) - 1, 0}};
    std::map<std::uint64_t, std::uint8_t> length_of;
    while (!stack.empty()) {
        auto [idx, depth] = stack.back();
        stack.pop_back();
        const Node& n = nodes[static_cast<std::size_t>(idx)];
        if (n.leaf >= 0) {
            if (depth > 64) throw Error("huffman code length exceeds 64");
            length_of[leaf_symbols[static_cast<std::size_t>(n.leaf)]] =
                static_cast<std::uint8_t>(depth);
        } else {
            stack.emplace_back(n.left, depth + 1);
            stack.emplace_back(n.right, depth + 1);
        }
    }
    table.lengths.assign(length_of.begin(), length_of.end());
    table.build_codes();
    return table;
}

std::int64_t EncodedPayload::serialized_size_bytes() const {
    // magic + version + k + symbol_count + bit_count + table count
    std::int64_t bytes = 1 + 1 + 1 + 8 + 8 + 4;
    if (!raw) bytes += static_cast<std::int64_t>(table.lengths.size()) * 9;
    bytes += static_cast<std::int64_t>(code_bytes.size());
    return bytes;
}

EncodedPayload huffman_encode(const std::vector<std::uint64_t>& stream,
                              const HuffmanTable& table, std::uint64_t original_bit_count) {
    EncodedPayload payload;
    payload.group_bits = table.group_bits;
    payload.symbol_count = stream.size();
    payload.bit_count = original_bit_count;
    payload.table = table;
    if (payload.table.codes.empty()) payload.table.build_codes();
    BitWriter writer;
    for (std::uint64_t sym : stream) {
        auto it = payload.table.codes.find(sym);
        if (it == payload.table.codes.end()) {
            throw Error("huffman_encode: symbol " + std::to_string(sym) +
                        " not in table support");
        }
        writer.put_bits(it->second.first, it->second.second);
    }
    payload.code_bits = writer.bit_count();
    payload.code_bytes = writer.take();
    return payload;
}

std::vector<std::uint64_t> huffman_decode(const EncodedPayload& payload) {
    std::vector<std::uint64_t> out;
    out.reserve(static_cast<std::size_t>(payload.symbol_count));
    BitReader reader(payload.code_bytes.data(),
                     static_cast<std::int64_t>(payload.code_bytes.size()) * 8);

    if (payload.raw) {
        for (std::uint64_t s = 0; s < payload.symbol_count; ++s) {
            out.push_back(reader.get_bits(payload.group_bits));
        }
    } else {
        // Canonical decode tables: per length, the first code and the span of
        // symbols ordered by (length, symbol).
        auto order = payload.table.lengths;
        std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
            return std::tie(a.second, a.first) < std::tie(b.second, b.first);
        });
        std::vector<std::uint64_t> first_code(65, 0), first_index(65, 0), count(65, 0);
        {
            unsigned __int128 code = 0;
            int prev_len = 0;
            for (std::size_t i = 0; i < order.size(); ++i) {
                const int len = order[i].second;
                if (prev_len != 0) code += 1;
                code <<= (len - prev_len);
                if (count[static_cast<std::size_t>(len)] == 0) {
                    first_code[static_cast<std::size_t>(len)] = static_cast<std::uint64_t>(code);
                    first_index[static_cast<std::size_t>(len)] = i;
                }
                ++count[static_cast<std::size_t>(len)];
                prev_len = len;
            }
        }
        int max_len = order.empty() ? 0 : order.back().second;
        for (std::uint64_t s = 0; s < payload.symbol_count; ++s) {
            std::uint64_t acc = 0;
            int len = 0;
            for (;;) {
                acc = (acc << 1) | static_cast<std::uint64_t>(reader.get_bit());
                ++len;
                if (len > max_len) throw IntegrityError("huffman_decode: invalid code");
                const std::size_t l = static_cast<std::size_t>(len);
                if (count[l] != 0 && acc >= first_code[l] && acc - first_code[l] < count[l]) {
                    out.push_back(order[first_index[l] + (acc - first_code[l])].first);
                    break;
                }
            }
        }
    }
    // Anything left past the final symbol must be byte padding.
    if (reader.remaining() >= 8) {
        throw IntegrityError("huffman_decode: trailing bytes after final symbol");
    }
    while (reader.remaining() > 0) {
        if (reader.get_bit() != 0) throw IntegrityError("huffman_decode: nonzero pad bits");
    }
    return out;
}

EncodedPayload encode_binary_map(const BinaryMap& map, int k, bool force_raw) {
    std::vector<std::uint64_t> stream = group_symbols(map, k);
    bool raw = force_raw;
    HuffmanTable table;
    if (!raw) {
        table = build_huffman(stream, k);
        int max_len = 0;
        for (const auto& [sym, len] : table.lengths) max_len = std::max(max_len, static_cast<int>(len));
        if (max_len > 64) raw = true;
    }
    if (raw) {
        EncodedPayload payload;
        payload.group_bits = k;
        payload.symbol_count = stream.size();
        payload.bit_count = static_cast<std::uint64_t>(map.bit_count);
        payload.raw = true;
        BitWriter writer;
        for (std::uint64_t sym : stream) writer.put_bits(sym, k);
        payload.code_bits = writer.bit_count();
        payload.code_bytes = writer.take();
        return payload;
    }
    return huffman_encode(stream, table, static_cast<std::uint64_t>(map.bit_count));
}

EncodedPayload encode_binary_map_best(const BinaryMap& map, int k) {
    EncodedPayload huffman = encode_binary_map(map, k);
    if (huffman.raw) return huffman;
    EncodedPayload raw = encode_binary_map(map, k, /*force_raw=*/true);
    return raw.serialized_size_bytes() < huffman.serialized_size_bytes() ? raw : huffman;
}

BinaryMap decode_binary_map(const EncodedPayload& payload) {
    const int k = payload.group_bits;
    const std::uint64_t expect_symbols = (payload.bit_count + k - 1) / static_cast<std::uint64_t>(k);
    if (payload.symbol_count != expect_symbols) {
        throw IntegrityError("payload symbol count disagrees with bit count");
    }
    std::vector<std::uint64_t> stream = huffman_decode(payload);
    BitWriter writer;
    std::int64_t remaining = static_cast<std::int64_t>(payload.bit_count);
    for (std::uint64_t sym : stream) {
        const int take = static_cast<int>(std::min<std::int64_t>(k, remaining));
        if ((k - take) > 0 && (sym & ((1ull << (k - take)) - 1)) != 0) {
            throw IntegrityError("payload: nonzero pad bits in final symbol");
        }
        writer.put_bits(sym >> (k - take), take);
        remaining -= take;
    }
    return binary_map_from_bytes(writer.take(), static_cast<std::int64_t>(payload.bit_count));
}

std::vector<std::uint8_t> serialize_payload(const EncodedPayload& payload) {
    std::vector<std::uint8_t> out;
    put_u8(out, kPayloadMagic);
    put_u8(out, kPayloadVersion);
    put_u8(out, static_cast<std::uint8_t>(payload.group_bits));
    put_u64(out, payload.symbol_count);
    put_u64(out, payload.bit_count);
    if (payload.raw) {
        put_u32(out, 0);
    } else {
        put_u32(out, static_cast<std::uint32_t>(payload.table.lengths.size()));
        for (const auto& [sym, len] : payload.table.lengths) {
            put_u64(out, sym);
            put_u8(out, len);
        }
    }
    out.insert(out.end(), payload.code_bytes.begin(), payload.code_bytes.end());
    return out;
}

EncodedPayload parse_payload(std::span<const std::uint8_t> bytes) {
    ByteReader reader(bytes);
    if (reader.u8() != kPayloadMagic) throw IntegrityError("payload: bad magic byte");
    if (reader.u8() != kPayloadVersion) throw IntegrityError("payload: unsupported version");
    EncodedPayload payload;
    payload.group_bits = reader.u8();
    if (!valid_group_bits(payload.group_bits)) throw IntegrityError("payload: invalid group size");
    payload.symbol_count = reader.u64();
    payload.bit_count = reader.u64();
    const std::uint32_t table_count = reader.u32();
    payload.raw = table_count == 0;
    if (!payload.raw) {
        payload.table.group_bits = payload.group_bits;
        payload.table.lengths.reserve(table_count);
        unsigned __int128 kraft = 0;  // sum of 2^(64 - len)
        std::uint64_t prev_sym = 0;
        for (std::uint32_t i = 0; i < table_count; ++i) {
            const std::uint64_t sym = reader.u64();
            const std::uint8_t len = reader.u8();
            if (len == 0 || len > 64) throw IntegrityError("payload: invalid code length");
            if (i > 0 && sym <= prev_sym) throw IntegrityError("payload: table not sorted");
            if (payload.group_bits < 64 && (sym >> payload.group_bits) != 0) {
                throw IntegrityError("payload: symbol wider than group size");
            }
            kraft += static_cast<unsigned __int128>(1) << (64 - len);
            prev_sym = sym;
            payload.table.lengths.emplace_back(sym, len);
        }
        if (kraft > (static_cast<unsigned __int128>(1) << 64)) {
            throw IntegrityError("payload: table violates the Kraft inequality");
        }
        payload.table.build_codes();
    } else if (payload.bit_count > 0 && payload.symbol_count == 0) {
        throw IntegrityError("payload: empty table with nonzero bit count");
    }
    auto rest = reader.take(reader.remaining());
    payload.code_bytes.assign(rest.begin(), rest.end());
    payload.code_bits = static_cast<std::int64_t>(payload.code_bytes.size()) * 8;
    return payload;
}

double compression_ratio(const BinaryMap& map, const EncodedPayload& payload) {
    const std::int64_t compressed_bits = payload.serialized_size_bytes() * 8;
    return static_cast<double>(map.bit_count) / static_cast<double>(compressed_bits);
}

}  // namespace brs
