#include "brs/pipeline.hpp"

#include <cmath>
#include <fstream>

#include "brs/bitio.hpp"

namespace brs {

namespace {

constexpr char kMagic[4] = {'B', 'R', 'S', 'C'};

// Everything before the payload bytes themselves (length prefixes included)
// counts as header.
void serialize_header(std::vector<std::uint8_t>& out, const ContainerHeader& h) {
    out.insert(out.end(), kMagic, kMagic + 4);
    put_u8(out, h.version);
    put_u32(out, static_cast<std::uint32_t>(h.frame_count));
    put_u32(out, static_cast<std::uint32_t>(h.channels));
    put_u32(out, static_cast<std::uint32_t>(h.height));
    put_u32(out, static_cast<std::uint32_t>(h.width));
    put_f64(out, h.fps);
    put_u32(out, static_cast<std::uint32_t>(h.layers));
    put_u32(out, static_cast<std::uint32_t>(h.latent_channels));
    put_string(out, h.binarizer);
    put_u64(out, h.checkpoint_fingerprint);
    put_u8(out, static_cast<std::uint8_t>(h.codec_variant));
    put_f64(out, h.codec_quality);
    put_u8(out, static_cast<std::uint8_t>(h.group_bits));
}

ContainerHeader parse_header(ByteReader& reader) {
    auto magic = reader.take(4);
    if (!std::equal(magic.begin(), magic.end(), kMagic)) {
        throw IntegrityError("container: bad magic (expected BRSC)");
    }
    ContainerHeader h;
    h.version = reader.u8();
    if (h.version != 1) throw IntegrityError("container: unsupported version");
    h.frame_count = static_cast<int>(reader.u32());
    h.channels = static_cast<int>(reader.u32());
    h.height = static_cast<int>(reader.u32());
    h.width = static_cast<int>(reader.u32());
    h.fps = reader.f64();
    h.layers = static_cast<int>(reader.u32());
    h.latent_channels = static_cast<int>(reader.u32());
    h.binarizer = reader.string();
    h.checkpoint_fingerprint = reader.u64();
    const std::uint8_t variant = reader.u8();
    if (variant > 1) throw IntegrityError("container: unknown codec variant");
    h.codec_variant = static_cast<CodecVariant>(variant);
    h.codec_quality = reader.f64();
    h.group_bits = reader.u8();
    return h;
}

}  // namespace

std::vector<std::uint8_t> serialize_container(const StreamContainer& container) {
    if (static_cast<int>(container.residual_payloads.size()) != container.header.frame_count) {
        throw IntegrityError("container: residual payload count must equal frame count");
    }
    std::vector<std::uint8_t> out;
    serialize_header(out, container.header);
    put_u64(out, container.base_payload.size());
    out.insert(out.end(), container.base_payload.begin(), container.base_payload.end());
    for (const auto& p : container.residual_payloads) {
        put_u32(out, static_cast<std::uint32_t>(p.size()));
        out.insert(out.end(), p.begin(), p.end());
    }
    return out;
}

StreamContainer parse_container(std::span<const std::uint8_t> bytes) {
    ByteReader reader(bytes);
    StreamContainer container;
    container.header = parse_header(reader);
    const std::uint64_t base_len = reader.u64();
    auto base = reader.take(base_len);
    container.base_payload.assign(base.begin(), base.end());
    for (int i = 0; i < container.header.frame_count; ++i) {
        const std::uint32_t len = reader.u32();
        auto p = reader.take(len);
        container.residual_payloads.emplace_back(p.begin(), p.end());
    }
    if (!reader.done()) throw IntegrityError("container: trailing bytes");
    return container;
}

void write_container(const std::string& path, const StreamContainer& container) {
    const auto bytes = serialize_container(container);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open container for writing: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("short write to container: " + path);
}

StreamContainer read_container(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open container: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return parse_container(bytes);
}

BitrateReport bitrate_account(const StreamContainer& container, double fps) {
    if (fps <= 0.0) throw ConfigError("fps must be positive");
    BitrateReport report;
    report.base_bits = static_cast<std::int64_t>(container.base_payload.size()) * 8;
    for (const auto& p : container.residual_payloads) {
        report.residual_bits += static_cast<std::int64_t>(p.size()) * 8;
    }
    const std::int64_t total = static_cast<std::int64_t>(serialize_container(container).size()) * 8;
    report.header_bits = total - report.base_bits - report.residual_bits;
    report.duration_seconds = container.header.frame_count / fps;
    report.total_mbps = static_cast<double>(total) / report.duration_seconds / 1e6;
    report.bits_per_pixel =
        static_cast<double>(total) /
        (static_cast<double>(container.header.frame_count) * container.header.height *
         container.header.width);
    return report;
}

EncodeResult server_encode(const std::vector<Frame>& video, double fps, double budget_total,
                           double split, const BaseCodecKind& codec, ModelParams* params,
                           int group_bits) {
    if (video.empty()) throw ShapeError("server_encode: empty video");
    if (!(split > 0.0 && split <= 1.0)) throw ConfigError("split must lie in (0, 1]");
    if (fps <= 0.0) throw ConfigError("fps must be positive");
    if (!valid_group_bits(group_bits)) throw ConfigError("unsupported group size");
    const bool with_residuals = split < 1.0;
    if (with_residuals && params == nullptr) {
        throw ConfigError("server_encode: residual coding requires trained model params");
    }

    const double duration = video.size() / fps;
    BaseCodecKind kind = codec;
    if (kind.variant == CodecVariant::external) {
        kind.target_bitrate = split * budget_total;
    } else if (kind.quality <= 0.0) {
        const std::int64_t target_bits =
            static_cast<std::int64_t>(std::llround(split * budget_total * duration));
        kind.quality = toy_quality_for_target_bits(video, target_bits);
    }
    BaseCodecResult base = run_base_codec(video, kind, fps);

    StreamContainer container;
    container.header.frame_count = static_cast<int>(video.size());
    container.header.channels = video[0].channels;
    container.header.height = video[0].height;
    container.header.width = video[0].width;
    container.header.fps = fps;
    container.header.codec_variant = kind.variant;
    container.header.codec_quality = kind.variant == CodecVariant::toy_dct ? kind.quality
                                                                           : kind.target_bitrate;
    container.header.group_bits = group_bits;
    container.base_payload = std::move(base.payload);

    if (with_residuals) {
        container.header.layers = params->config.layers;
        container.header.latent_channels = params->config.channels;
        container.header.binarizer = std::string(binarizer_name(params->config.binarizer));
        container.header.checkpoint_fingerprint = model_fingerprint(*params);
        const int multiple = params->config.downsample_factor();
        for (std::size_t i = 0; i < video.size(); ++i) {
            ResidualFrame r = compute_residual(video[i], base.decoded_frames[i]);
            ResidualFrame padded;
            padded.orig_height = r.orig_height;
            padded.orig_width = r.orig_width;
            padded.data = reflect_pad_to_multiple(r.data, multiple);
            Tensor e = encode(padded, *params, Mode::eval);
            Tensor z = activate(e, params->config.binarizer, params->config.gumbel, Mode::eval);
            Tensor codes = binarize_forward(z, params->config.binarizer, Mode::eval);
            BinaryMap map = pack_bits(codes);
            EncodedPayload payload = encode_binary_map_best(map, group_bits);
            container.residual_payloads.push_back(serialize_payload(payload));
        }
    } else {
        container.residual_payloads.assign(video.size(), {});
    }

    EncodeResult result;
    result.report = bitrate_account(container, fps);
    const double budget_bits = budget_total * duration;
    if (budget_bits > 0 &&
        static_cast<double>(result.report.total_bits()) > 1.10 * budget_bits) {
        result.warnings.push_back(
            "realized total " + std::to_string(result.report.total_bits()) +
            " bits exceeds budget " + std::to_string(static_cast<std::int64_t>(budget_bits)) +
            " bits by more than 10%");
    }
    result.container = std::move(container);
    return result;
}

std::vector<Frame> client_decode(const StreamContainer& container, ModelParams* params,
                                 const BaseCodecKind* adapter) {
    const ContainerHeader& h = container.header;
    if (static_cast<int>(container.residual_payloads.size()) != h.frame_count) {
        throw IntegrityError("container: residual payload count mismatch");
    }
    bool any_residual = false;
    for (const auto& p : container.residual_payloads) any_residual |= !p.empty();
    if (any_residual) {
        if (params == nullptr) {
            throw IntegrityError("container carries residual payloads but no checkpoint given");
        }
        const std::uint64_t fp = model_fingerprint(*params);
        if (fp != h.checkpoint_fingerprint) {
            throw IntegrityError("checkpoint fingerprint mismatch: container expects " +
                                 std::to_string(h.checkpoint_fingerprint) + ", loaded model is " +
                                 std::to_string(fp));
        }
    }

    std::vector<Frame> base = decode_base_payload(container.base_payload, h.codec_variant, adapter);
    if (static_cast<int>(base.size()) != h.frame_count) {
        throw IntegrityError("base payload decoded to wrong frame count");
    }

    std::vector<Frame> output;
    output.reserve(base.size());
    for (int i = 0; i < h.frame_count; ++i) {
        const auto& payload_bytes = container.residual_payloads[static_cast<std::size_t>(i)];
        if (payload_bytes.empty()) {
            output.push_back(base[static_cast<std::size_t>(i)]);
            continue;
        }
        EncodedPayload payload = parse_payload(payload_bytes);
        BinaryMap map = decode_binary_map(payload);
        // latent dims follow from the padded frame dims
        const int f = params->config.downsample_factor();
        const int padded_h = (h.height + f - 1) / f * f;
        const int padded_w = (h.width + f - 1) / f * f;
        map.channels = params->config.channels;
        map.height = padded_h / f;
        map.width = padded_w / f;
        if (static_cast<std::int64_t>(map.channels) * map.height * map.width != map.bit_count) {
            throw IntegrityError("residual payload bit count disagrees with latent dims");
        }
        Tensor codes = unpack_bits(map);
        ResidualFrame rhat = decode(codes, *params, h.height, h.width, Mode::eval);
        output.push_back(add_residual(base[static_cast<std::size_t>(i)], rhat));
    }
    return output;
}

}  // namespace brs
