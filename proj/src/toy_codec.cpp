#include <array>
#include <cmath>
#include <cstring>

#include "brs/base_codec.hpp"
#include "brs/bitio.hpp"
#include "brs/entropy.hpp"

namespace brs {

namespace {

constexpr char kMagic[4] = {'B', 'T', 'D', 'C'};
constexpr std::uint8_t kVersion = 1;
constexpr int kBlock = 8;
constexpr int kCoefGroupBits = 8;  // Huffman group size for coefficient planes
constexpr std::int64_t kBasisScale = 1 << 15;
constexpr std::int64_t kBasisScaleSq = kBasisScale * kBasisScale;

// Standard luminance quantization matrix, applied to every channel.
constexpr int kQuantBase[kBlock][kBlock] = {
    {16, 11, 10, 16, 24, 40, 51, 61},   {12, 12, 14, 19, 26, 58, 60, 55},
    {14, 13, 16, 24, 40, 57, 69, 56},   {14, 17, 22, 29, 51, 87, 80, 62},
    {18, 22, 37, 56, 68, 109, 103, 77}, {24, 35, 55, 64, 81, 104, 113, 92},
    {49, 64, 78, 87, 103, 121, 120, 101}, {72, 92, 95, 98, 112, 100, 103, 99}};

// Fixed-point orthonormal DCT-II basis. Integer everywhere so results are
// identical on every platform.
const std::array<std::array<std::int64_t, kBlock>, kBlock>& basis() {
    static const auto b = [] {
        std::array<std::array<std::int64_t, kBlock>, kBlock> out{};
        for (int u = 0; u < kBlock; ++u) {
            const double cu = u == 0 ? std::sqrt(1.0 / kBlock) : std::sqrt(2.0 / kBlock);
            for (int x = 0; x < kBlock; ++x) {
                out[u][x] = std::llround(
                    cu * std::cos((2 * x + 1) * u * M_PI / (2.0 * kBlock)) * kBasisScale);
            }
        }
        return out;
    }();
    return b;
}

// Round-half-away-from-zero integer division, divisor positive.
std::int64_t div_round(std::int64_t x, std::int64_t d) {
    if (x >= 0) return (2 * x + d) / (2 * d);
    return -((-2 * x + d) / (2 * d));
}

std::array<std::array<std::int64_t, kBlock>, kBlock> quant_steps(double quality) {
    if (!(quality > 0.0)) throw ConfigError("toy codec quality must be positive");
    std::array<std::array<std::int64_t, kBlock>, kBlock> q{};
    for (int u = 0; u < kBlock; ++u)
        for (int v = 0; v < kBlock; ++v)
            q[u][v] = std::max<std::int64_t>(1, std::llround(kQuantBase[u][v] / quality));
    q[0][0] = 1;  // DC kept exact: constant blocks must reconstruct losslessly
    return q;
}

struct PaddedPlane {
    int height = 0, width = 0;
    std::vector<int> pixels;  // value - 128, edge-replicated to block multiples
};

PaddedPlane pad_plane(const std::vector<std::uint8_t>& bytes, int plane, int h, int w) {
    PaddedPlane p;
    p.height = (h + kBlock - 1) / kBlock * kBlock;
    p.width = (w + kBlock - 1) / kBlock * kBlock;
    p.pixels.resize(static_cast<std::size_t>(p.height) * p.width);
    const std::size_t base = static_cast<std::size_t>(plane) * h * w;
    for (int y = 0; y < p.height; ++y) {
        const int sy = std::min(y, h - 1);
        for (int x = 0; x < p.width; ++x) {
            const int sx = std::min(x, w - 1);
            p.pixels[static_cast<std::size_t>(y) * p.width + x] =
                static_cast<int>(bytes[base + static_cast<std::size_t>(sy) * w + sx]) - 128;
        }
    }
    return p;
}

// Forward transform + quantization of one frame; coefficients appended as
// int16 in (channel, block-raster, u, v) order.
void encode_frame(const Frame& frame, const std::array<std::array<std::int64_t, kBlock>, kBlock>& q,
                  std::vector<std::int16_t>& coefs) {
    const std::vector<std::uint8_t> bytes = frame.to_bytes();
    const auto& b = basis();
    for (int c = 0; c < frame.channels; ++c) {
        PaddedPlane plane = pad_plane(bytes, c, frame.height, frame.width);
        for (int by = 0; by < plane.height; by += kBlock) {
            for (int bx = 0; bx < plane.width; bx += kBlock) {
                std::int64_t tmp[kBlock][kBlock];  // [u][y]
                for (int u = 0; u < kBlock; ++u) {
                    for (int y = 0; y < kBlock; ++y) {
                        std::int64_t acc = 0;
                        for (int x = 0; x < kBlock; ++x) {
                            acc += plane.pixels[static_cast<std::size_t>(by + y) * plane.width +
                                                bx + x] *
                                   b[u][x];
                        }
                        tmp[u][y] = acc;
                    }
                }
                for (int u = 0; u < kBlock; ++u) {
                    for (int v = 0; v < kBlock; ++v) {
                        std::int64_t acc = 0;
                        for (int y = 0; y < kBlock; ++y) acc += tmp[u][y] * b[v][y];
                        const std::int64_t coef = div_round(acc, kBasisScaleSq);
                        coefs.push_back(static_cast<std::int16_t>(div_round(coef, q[u][v])));
                    }
                }
            }
        }
    }
}

Frame decode_frame(const std::int16_t* coefs, int channels, int h, int w,
                   const std::array<std::array<std::int64_t, kBlock>, kBlock>& q) {
    const int ph = (h + kBlock - 1) / kBlock * kBlock;
    const int pw = (w + kBlock - 1) / kBlock * kBlock;
    const auto& b = basis();
    Frame out = Frame::zeros(channels, h, w);
    std::size_t pos = 0;
    for (int c = 0; c < channels; ++c) {
        std::vector<int> plane(static_cast<std::size_t>(ph) * pw);
        for (int by = 0; by < ph; by += kBlock) {
            for (int bx = 0; bx < pw; bx += kBlock) {
                std::int64_t deq[kBlock][kBlock];
                for (int u = 0; u < kBlock; ++u)
                    for (int v = 0; v < kBlock; ++v)
                        deq[u][v] = static_cast<std::int64_t>(coefs[pos++]) * q[u][v];
                std::int64_t tmp[kBlock][kBlock];  // [x][v]
                for (int x = 0; x < kBlock; ++x) {
                    for (int v = 0; v < kBlock; ++v) {
                        std::int64_t acc = 0;
                        for (int u = 0; u < kBlock; ++u) acc += deq[u][v] * b[u][x];
                        tmp[x][v] = acc;
                    }
                }
                for (int x = 0; x < kBlock; ++x) {
                    for (int y = 0; y < kBlock; ++y) {
                        std::int64_t acc = 0;
                        for (int v = 0; v < kBlock; ++v) acc += tmp[x][v] * b[v][y];
                        const std::int64_t px =
                            std::clamp<std::int64_t>(div_round(acc, kBasisScaleSq) + 128, 0, 255);
                        plane[static_cast<std::size_t>(by + y) * pw + bx + x] =
                            static_cast<int>(px);
                    }
                }
            }
        }
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                out.at(c, y, x) = plane[static_cast<std::size_t>(y) * pw + x] / 255.0;
    }
    return out;
}

// int16 coefficients -> high-byte plane then low-byte plane, Huffman coded.
std::vector<std::uint8_t> pack_coefficients(const std::vector<std::int16_t>& coefs) {
    std::vector<std::uint8_t> planes;
    planes.reserve(coefs.size() * 2);
    for (std::int16_t v : coefs) {
        planes.push_back(static_cast<std::uint8_t>((static_cast<std::uint16_t>(v) >> 8) & 0xFF));
    }
    for (std::int16_t v : coefs) {
        planes.push_back(static_cast<std::uint8_t>(static_cast<std::uint16_t>(v) & 0xFF));
    }
    const std::int64_t bit_count = static_cast<std::int64_t>(planes.size()) * 8;
    return serialize_payload(encode_binary_map_best(
        binary_map_from_bytes(std::move(planes), bit_count), kCoefGroupBits));
}

std::vector<std::int16_t> unpack_coefficients(std::span<const std::uint8_t> payload,
                                              std::size_t expected) {
    BinaryMap map = decode_binary_map(parse_payload(payload));
    if (map.bits.size() != expected * 2) {
        throw IntegrityError("toy codec: coefficient plane size mismatch");
    }
    std::vector<std::int16_t> coefs(expected);
    for (std::size_t i = 0; i < expected; ++i) {
        const std::uint16_t hi = map.bits[i];
        const std::uint16_t lo = map.bits[expected + i];
        coefs[i] = static_cast<std::int16_t>(static_cast<std::uint16_t>((hi << 8) | lo));
    }
    return coefs;
}

}  // namespace

BaseCodecResult toy_encode_decode(const std::vector<Frame>& frames, double quality) {
    if (frames.empty()) throw ShapeError("toy codec: empty frame sequence");
    const int c = frames[0].channels, h = frames[0].height, w = frames[0].width;
    for (const auto& f : frames) {
        if (f.channels != c || f.height != h || f.width != w) {
            throw ShapeError("toy codec: frames must share dims");
        }
        f.require_unit_range("toy codec input");
    }
    const auto q = quant_steps(quality);

    BaseCodecResult result;
    std::vector<std::uint8_t>& payload = result.payload;
    payload.insert(payload.end(), kMagic, kMagic + 4);
    put_u8(payload, kVersion);
    put_u32(payload, static_cast<std::uint32_t>(frames.size()));
    put_u32(payload, static_cast<std::uint32_t>(c));
    put_u32(payload, static_cast<std::uint32_t>(h));
    put_u32(payload, static_cast<std::uint32_t>(w));
    put_f64(payload, quality);

    const int ph = (h + kBlock - 1) / kBlock * kBlock;
    const int pw = (w + kBlock - 1) / kBlock * kBlock;
    const std::size_t coefs_per_frame =
        static_cast<std::size_t>(c) * (ph / kBlock) * (pw / kBlock) * kBlock * kBlock;

    for (const Frame& frame : frames) {
        std::vector<std::int16_t> coefs;
        coefs.reserve(coefs_per_frame);
        encode_frame(frame, q, coefs);
        std::vector<std::uint8_t> frame_payload = pack_coefficients(coefs);
        put_u32(payload, static_cast<std::uint32_t>(frame_payload.size()));
        payload.insert(payload.end(), frame_payload.begin(), frame_payload.end());
        const std::int64_t bits = static_cast<std::int64_t>(frame_payload.size()) * 8;
        result.per_frame_bits.push_back(bits);
        result.payload_bits += bits;
        result.decoded_frames.push_back(decode_frame(coefs.data(), c, h, w, q));
    }
    return result;
}

std::vector<Frame> toy_decode(std::span<const std::uint8_t> payload) {
    ByteReader reader(payload);
    auto magic = reader.take(4);
    if (!std::equal(magic.begin(), magic.end(), kMagic)) {
        throw IntegrityError("toy codec payload: bad magic");
    }
    if (reader.u8() != kVersion) throw IntegrityError("toy codec payload: unsupported version");
    const std::uint32_t frame_count = reader.u32();
    const int c = static_cast<int>(reader.u32());
    const int h = static_cast<int>(reader.u32());
    const int w = static_cast<int>(reader.u32());
    const double quality = reader.f64();
    if (c <= 0 || h <= 0 || w <= 0) throw IntegrityError("toy codec payload: bad dims");
    const auto q = quant_steps(quality);

    const int ph = (h + kBlock - 1) / kBlock * kBlock;
    const int pw = (w + kBlock - 1) / kBlock * kBlock;
    const std::size_t coefs_per_frame =
        static_cast<std::size_t>(c) * (ph / kBlock) * (pw / kBlock) * kBlock * kBlock;

    std::vector<Frame> frames;
    frames.reserve(frame_count);
    for (std::uint32_t i = 0; i < frame_count; ++i) {
        const std::uint32_t len = reader.u32();
        auto bytes = reader.take(len);
        std::vector<std::int16_t> coefs = unpack_coefficients(bytes, coefs_per_frame);
        frames.push_back(decode_frame(coefs.data(), c, h, w, q));
    }
    if (!reader.done()) throw IntegrityError("toy codec payload: trailing bytes");
    return frames;
}

double toy_quality_for_target_bits(const std::vector<Frame>& frames,
                                   std::int64_t target_payload_bits, double lo, double hi,
                                   int iterations) {
    // payload_bits is monotone non-decreasing in quality; bisect in log space
    // and return the candidate whose realized size lands closest.
    double best_q = lo;
    std::int64_t best_err = std::numeric_limits<std::int64_t>::max();
    double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < iterations; ++i) {
        const double mid = std::exp(0.5 * (llo + lhi));
        const std::int64_t bits = toy_encode_decode(frames, mid).payload_bits;
        const std::int64_t err = std::llabs(bits - target_payload_bits);
        if (err < best_err) {
            best_err = err;
            best_q = mid;
        }
        if (bits < target_payload_bits) {
            llo = std::log(mid);
        } else {
            lhi = std::log(mid);
        }
    }
    return best_q;
}

}  // namespace brs
