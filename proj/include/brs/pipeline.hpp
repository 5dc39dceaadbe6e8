#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "brs/autoencoder.hpp"
#include "brs/base_codec.hpp"
#include "brs/entropy.hpp"
#include "brs/frame.hpp"

namespace brs {

// Container file: magic "BRSC", version, header fields (little-endian),
// length-prefixed base payload, then length-prefixed per-frame residual
// payloads.
struct ContainerHeader {
    std::uint8_t version = 1;
    int frame_count = 0;
    int channels = 0;
    int height = 0;
    int width = 0;
    double fps = 0.0;
    int layers = 0;       // autoencoder summary; zero when no residual stream
    int latent_channels = 0;
    std::string binarizer;
    std::uint64_t checkpoint_fingerprint = 0;
    CodecVariant codec_variant = CodecVariant::toy_dct;
    double codec_quality = 0.0;
    int group_bits = 16;
};

struct StreamContainer {
    ContainerHeader header;
    std::vector<std::uint8_t> base_payload;
    std::vector<std::vector<std::uint8_t>> residual_payloads;  // one per frame, may be empty
};

std::vector<std::uint8_t> serialize_container(const StreamContainer& container);
StreamContainer parse_container(std::span<const std::uint8_t> bytes);
void write_container(const std::string& path, const StreamContainer& container);
StreamContainer read_container(const std::string& path);

struct BitrateReport {
    std::int64_t base_bits = 0;
    std::int64_t residual_bits = 0;
    std::int64_t header_bits = 0;
    double duration_seconds = 0.0;
    double total_mbps = 0.0;
    double bits_per_pixel = 0.0;

    std::int64_t total_bits() const { return base_bits + residual_bits + header_bits; }
};

// base + residual + header equals the serialized container size exactly.
BitrateReport bitrate_account(const StreamContainer& container, double fps);

struct EncodeResult {
    StreamContainer container;
    BitrateReport report;
    std::vector<std::string> warnings;
};

// Runs the base codec at split * budget_total, encodes every frame's
// residual through the eval-mode autoencoder and Huffman coder, and
// assembles the container. split == 1.0 degenerates to base-codec
// passthrough (empty residual payloads, params may be null). For the toy
// codec a negative kind.quality requests a rate search against the split
// budget; otherwise kind.quality is used as given and the split budget is
// only audited. Realized totals more than 10% over budget are reported as a
// warning, not an error.
EncodeResult server_encode(const std::vector<Frame>& video, double fps, double budget_total,
                           double split, const BaseCodecKind& codec, ModelParams* params,
                           int group_bits = 16);

// Rebuilds the output video: base decode, per-frame Huffman decode, unpack,
// run the decoder half, clamp(y + rhat, 0, 1). The params fingerprint must
// match the container header whenever residual payloads are present.
std::vector<Frame> client_decode(const StreamContainer& container, ModelParams* params,
                                 const BaseCodecKind* adapter = nullptr);

}  // namespace brs
