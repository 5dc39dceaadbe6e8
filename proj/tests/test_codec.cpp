#include <doctest.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "brs/base_codec.hpp"
#include "brs/metrics.hpp"
#include "brs/rng.hpp"
#include "brs/synthetic.hpp"

using namespace brs;

namespace {

// Direct O(N^4) floating DCT-II pair, the reference for the integer path.
void dct_oracle(const double in[8][8], double out[8][8]) {
    for (int u = 0; u < 8; ++u)
        for (int v = 0; v < 8; ++v) {
            const double cu = u == 0 ? std::sqrt(1.0 / 8) : std::sqrt(2.0 / 8);
            const double cv = v == 0 ? std::sqrt(1.0 / 8) : std::sqrt(2.0 / 8);
            double acc = 0.0;
            for (int x = 0; x < 8; ++x)
                for (int y = 0; y < 8; ++y)
                    acc += in[x][y] * std::cos((2 * x + 1) * u * M_PI / 16.0) *
                           std::cos((2 * y + 1) * v * M_PI / 16.0);
            out[u][v] = cu * cv * acc;
        }
}

void idct_oracle(const double in[8][8], double out[8][8]) {
    for (int x = 0; x < 8; ++x)
        for (int y = 0; y < 8; ++y) {
            double acc = 0.0;
            for (int u = 0; u < 8; ++u)
                for (int v = 0; v < 8; ++v) {
                    const double cu = u == 0 ? std::sqrt(1.0 / 8) : std::sqrt(2.0 / 8);
                    const double cv = v == 0 ? std::sqrt(1.0 / 8) : std::sqrt(2.0 / 8);
                    acc += cu * cv * in[u][v] * std::cos((2 * x + 1) * u * M_PI / 16.0) *
                           std::cos((2 * y + 1) * v * M_PI / 16.0);
                }
            out[x][y] = acc;
        }
}

Frame constant_frame(double value, int h = 32, int w = 32) {
    Frame f = Frame::zeros(3, h, w);
    for (auto& v : f.values) v = value;
    return f;
}

double mean_abs_diff(const Frame& a, const Frame& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) acc += std::fabs(a.values[i] - b.values[i]);
    return acc / static_cast<double>(a.values.size());
}

bool byte_equal(const Frame& a, const Frame& b) { return a.to_bytes() == b.to_bytes(); }

std::filesystem::path make_temp_dir(const char* tag) {
    auto p = std::filesystem::temp_directory_path() /
             (std::string("brs-codec-test-") + tag + "-" + std::to_string(::getpid()));
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("float DCT oracle inverts itself to 1e-10") {
    Rng rng(6);
    for (int trial = 0; trial < 10; ++trial) {
        double block[8][8], coef[8][8], back[8][8];
        for (auto& row : block)
            for (auto& v : row) v = rng.uniform(-128.0, 127.0);
        dct_oracle(block, coef);
        idct_oracle(coef, back);
        for (int x = 0; x < 8; ++x)
            for (int y = 0; y < 8; ++y) CHECK(std::fabs(back[x][y] - block[x][y]) < 1e-10);
    }
}

TEST_CASE("integer transform tracks the float oracle at step 1") {
    // With unit quantization the only differences are fixed-point rounding.
    Rng rng(8);
    Frame f = Frame::zeros(1, 8, 8);
    for (auto& v : f.values) v = rng.below(256) / 255.0;
    const BaseCodecResult res = toy_encode_decode({f}, 1e9);  // step 1 everywhere

    double block[8][8], coef[8][8], back[8][8];
    const auto bytes = f.to_bytes();
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x)
            block[x][y] = static_cast<double>(bytes[static_cast<std::size_t>(y) * 8 + x]) - 128.0;
    dct_oracle(block, coef);
    idct_oracle(coef, back);

    const auto decoded = res.decoded_frames[0].to_bytes();
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) {
            const double oracle_px = std::clamp(back[x][y] + 128.0, 0.0, 255.0);
            CHECK(std::fabs(decoded[static_cast<std::size_t>(y) * 8 + x] - oracle_px) <= 2.0);
        }
}

TEST_CASE("constant frames carry only the DC coefficient") {
    for (double quality : {0.25, 1.0, 4.0}) {
        const Frame f = constant_frame(100.0 / 255.0);
        const BaseCodecResult res = toy_encode_decode({f}, quality);
        CHECK(mean_abs_diff(res.decoded_frames[0], f) < 1e-3);
    }
}

TEST_CASE("fine quantization reconstructs smooth frames above 50 dB") {
    std::vector<Frame> frames;
    for (int t = 0; t < 3; ++t) {
        Frame f = Frame::zeros(3, 32, 32);
        for (int c = 0; c < 3; ++c)
            for (int y = 0; y < 32; ++y)
                for (int x = 0; x < 32; ++x)
                    f.at(c, y, x) =
                        std::round((0.5 + 0.3 * std::sin(0.1 * x + 0.08 * y + t)) * 255.0) / 255.0;
        frames.push_back(std::move(f));
    }
    const BaseCodecResult res = toy_encode_decode(frames, 1000.0);
    for (std::size_t i = 0; i < frames.size(); ++i) {
        CHECK(psnr(frames[i], res.decoded_frames[i]) > 50.0);
    }
}

TEST_CASE("toy codec is deterministic and self-decodable") {
    const auto frames = make_moving_texture_corpus(4, 32, 40, 77);
    const BaseCodecResult a = toy_encode_decode(frames, 1.0);
    const BaseCodecResult b = toy_encode_decode(frames, 1.0);
    CHECK(a.payload == b.payload);
    CHECK(a.payload_bits == b.payload_bits);

    std::int64_t sum = 0;
    for (auto bits : a.per_frame_bits) sum += bits;
    CHECK(sum == a.payload_bits);

    // client-side decode of the payload equals the server-side reconstruction
    const std::vector<Frame> decoded = toy_decode(a.payload);
    REQUIRE(decoded.size() == frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) {
        CHECK(byte_equal(decoded[i], a.decoded_frames[i]));
    }
}

TEST_CASE("toy codec validates inputs") {
    CHECK_THROWS_AS(toy_encode_decode({}, 1.0), ShapeError);
    Frame f = constant_frame(0.5);
    f.values[0] = 1.5;
    CHECK_THROWS_AS(toy_encode_decode({f}, 1.0), ShapeError);
    CHECK_THROWS_AS(toy_encode_decode({constant_frame(0.5)}, 0.0), ConfigError);
}

TEST_CASE("rate and distortion are monotone in quality") {
    const auto frames = make_moving_texture_corpus(6, 32, 32, 3);
    std::int64_t prev_bits = -1;
    double prev_psnr = -1.0, prev_residual = 1e9;
    for (double quality : {0.5, 1.0, 2.0}) {
        const BaseCodecResult res = toy_encode_decode(frames, quality);
        double mean_psnr = 0.0, mean_residual = 0.0;
        for (std::size_t i = 0; i < frames.size(); ++i) {
            mean_psnr += psnr(frames[i], res.decoded_frames[i]);
            mean_residual += mean_abs_diff(frames[i], res.decoded_frames[i]);
        }
        mean_psnr /= static_cast<double>(frames.size());
        mean_residual /= static_cast<double>(frames.size());
        CHECK(res.payload_bits > prev_bits);
        CHECK(mean_psnr >= prev_psnr);
        CHECK(mean_residual <= prev_residual);
        prev_bits = res.payload_bits;
        prev_psnr = mean_psnr;
        prev_residual = mean_residual;
    }
}

TEST_CASE("quality search lands near the requested rate") {
    const auto frames = make_moving_texture_corpus(5, 32, 32, 11);
    const std::int64_t lo = toy_encode_decode(frames, 1.0 / 64.0).payload_bits;
    const std::int64_t hi = toy_encode_decode(frames, 64.0).payload_bits;
    const std::int64_t target = (lo + hi) / 3;
    const double q = toy_quality_for_target_bits(frames, target);
    const std::int64_t got = toy_encode_decode(frames, q).payload_bits;
    CHECK(std::llabs(got - target) <
          std::max<std::int64_t>(target / 10, 512));  // within 10% of the span
}

TEST_CASE("odd frame sizes are padded and cropped transparently") {
    const auto frames = make_moving_texture_corpus(2, 30, 29, 5);
    const BaseCodecResult res = toy_encode_decode(frames, 1.0);
    CHECK(res.decoded_frames[0].height == 30);
    CHECK(res.decoded_frames[0].width == 29);
    const std::vector<Frame> decoded = toy_decode(res.payload);
    CHECK(byte_equal(decoded[0], res.decoded_frames[0]));
}

TEST_CASE("external adapter round trips through an identity codec") {
    const auto dir = make_temp_dir("ident");
    BaseCodecKind kind;
    kind.variant = CodecVariant::external;
    kind.encode_command = "cp {input} {output}";
    kind.decode_command = "cp {input} {output}";
    kind.raw_format = "rgb_planar";

    const auto frames = make_moving_texture_corpus(30, 16, 16, 21);
    const BaseCodecResult res = external_transcode(frames, kind, 10.0);
    REQUIRE(res.decoded_frames.size() == 30);  // frame count preserved
    for (std::size_t i = 0; i < frames.size(); ++i) {
        CHECK(byte_equal(res.decoded_frames[i], frames[i]));  // bit-exact
    }
    const std::int64_t raw_bits = static_cast<std::int64_t>(frames.size()) * 3 * 16 * 16 * 8;
    CHECK(res.payload_bits == raw_bits);

    const std::vector<Frame> again = external_decode_payload(res.payload, kind);
    REQUIRE(again.size() == frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) CHECK(byte_equal(again[i], frames[i]));
    std::filesystem::remove_all(dir);
}

TEST_CASE("external adapter yuv420p conversion is close on smooth frames") {
    BaseCodecKind kind;
    kind.variant = CodecVariant::external;
    kind.encode_command = "cp {input} {output}";
    kind.decode_command = "cp {input} {output}";
    kind.raw_format = "yuv420p";
    std::vector<Frame> frames;
    Frame f = Frame::zeros(3, 16, 16);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < 16; ++y)
            for (int x = 0; x < 16; ++x) f.at(c, y, x) = 0.3 + 0.02 * c + 0.01 * y;
    frames.push_back(f);
    const BaseCodecResult res = external_transcode(frames, kind, 10.0);
    CHECK(psnr(frames[0], res.decoded_frames[0]) > 30.0);
}

TEST_CASE("external adapter reports rate ordering through a scripted codec") {
    // quantize-by-step stand-in: coarser step at lower bitrate
    const auto dir = make_temp_dir("fake");
    const auto enc = dir / "enc.py";
    {
        std::ofstream out(enc);
        out << "import sys\n"
               "inp, outp, rate = sys.argv[1], sys.argv[2], int(sys.argv[3])\n"
               "step = 16 if rate < 2000000 else 2\n"
               "data = open(inp, 'rb').read()\n"
               "q = bytes([min(255, (b // step) * step) for b in data])\n"
               "import zlib\n"
               "open(outp, 'wb').write(bytes([step]) + zlib.compress(q, 6))\n";
    }
    const auto dec = dir / "dec.py";
    {
        std::ofstream out(dec);
        out << "import sys, zlib\n"
               "inp, outp = sys.argv[1], sys.argv[2]\n"
               "data = open(inp, 'rb').read()\n"
               "open(outp, 'wb').write(zlib.decompress(data[1:]))\n";
    }
    BaseCodecKind kind;
    kind.variant = CodecVariant::external;
    kind.encode_command = "python3 " + enc.string() + " {input} {output} {bitrate}";
    kind.decode_command = "python3 " + dec.string() + " {input} {output}";

    const auto frames = make_moving_texture_corpus(8, 16, 16, 31);
    kind.target_bitrate = 1e6;
    const BaseCodecResult low = external_transcode(frames, kind, 10.0);
    kind.target_bitrate = 5e6;
    const BaseCodecResult high = external_transcode(frames, kind, 10.0);

    CHECK(low.payload_bits < high.payload_bits);
    double psnr_low = 0.0, psnr_high = 0.0;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        psnr_low += psnr(frames[i], low.decoded_frames[i]);
        psnr_high += psnr(frames[i], high.decoded_frames[i]);
    }
    CHECK(psnr_low <= psnr_high);
    std::filesystem::remove_all(dir);
}

TEST_CASE("external adapter surfaces failures") {
    const auto frames = make_moving_texture_corpus(2, 16, 16, 41);
    BaseCodecKind kind;
    kind.variant = CodecVariant::external;
    kind.decode_command = "cp {input} {output}";

    SUBCASE("missing command templates") {
        kind.encode_command.clear();
        CHECK_THROWS_AS(external_transcode(frames, kind, 10.0), ConfigError);
    }
    SUBCASE("unresolvable binary") {
        kind.encode_command = "definitely-not-a-real-encoder {input} {output}";
        CHECK_THROWS_AS(external_transcode(frames, kind, 10.0), ConfigError);
    }
    SUBCASE("nonzero exit with diagnostics") {
        kind.encode_command = "sh -c 'echo boom >&2; exit 3'";
        try {
            external_transcode(frames, kind, 10.0);
            FAIL("expected Error");
        } catch (const ConfigError&) {
            FAIL("should not be a config error");
        } catch (const Error& e) {
            CHECK(std::string(e.what()).find("boom") != std::string::npos);
        }
    }
}
