#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "brs/frame.hpp"

namespace brs {

enum class CodecVariant : std::uint8_t { toy_dct = 0, external = 1 };

// Pluggable lossy base codec. The toy transform codec is hermetic and
// bit-deterministic; the external variant shells out to real encoders via
// command templates with {input}, {output} and {bitrate} placeholders.
struct BaseCodecKind {
    CodecVariant variant = CodecVariant::toy_dct;
    double quality = 1.0;          // toy: quantizer scale, larger = finer
    double target_bitrate = 0.0;   // external: bits per second
    std::string encode_command;
    std::string decode_command;
    std::string raw_format = "rgb_planar";  // or "yuv420p"
};

struct BaseCodecResult {
    std::vector<Frame> decoded_frames;
    std::int64_t payload_bits = 0;            // == sum of per_frame_bits
    std::vector<std::int64_t> per_frame_bits;
    std::vector<std::uint8_t> payload;        // self-contained, decodable
};

// Dispatches on kind.variant. fps is needed by external rate-controlled
// encoders; the toy codec ignores it.
BaseCodecResult run_base_codec(const std::vector<Frame>& frames, const BaseCodecKind& kind,
                               double fps);

// Rebuilds Y from a stored payload. External payloads need the adapter's
// decode command, so the kind must be supplied again on the client side.
std::vector<Frame> decode_base_payload(const std::vector<std::uint8_t>& payload,
                                       CodecVariant variant,
                                       const BaseCodecKind* adapter = nullptr);

// ---- toy transform codec ----

BaseCodecResult toy_encode_decode(const std::vector<Frame>& frames, double quality);
std::vector<Frame> toy_decode(std::span<const std::uint8_t> payload);

// Smallest quality on a fixed search grid whose payload meets or overshoots
// target_payload_bits the least; rate is monotone in quality so this is a
// bisection. Returns the chosen quality.
double toy_quality_for_target_bits(const std::vector<Frame>& frames,
                                   std::int64_t target_payload_bits, double lo = 1.0 / 64.0,
                                   double hi = 64.0, int iterations = 40);

// ---- external-process adapter ----

BaseCodecResult external_transcode(const std::vector<Frame>& frames, const BaseCodecKind& kind,
                                   double fps);
std::vector<Frame> external_decode_payload(const std::vector<std::uint8_t>& payload,
                                           const BaseCodecKind& kind);

}  // namespace brs
