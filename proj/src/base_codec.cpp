#include "brs/base_codec.hpp"

namespace brs {

BaseCodecResult run_base_codec(const std::vector<Frame>& frames, const BaseCodecKind& kind,
                               double fps) {
    switch (kind.variant) {
        case CodecVariant::toy_dct: return toy_encode_decode(frames, kind.quality);
        case CodecVariant::external: return external_transcode(frames, kind, fps);
    }
    throw ConfigError("unknown base codec variant");
}

std::vector<Frame> decode_base_payload(const std::vector<std::uint8_t>& payload,
                                       CodecVariant variant, const BaseCodecKind* adapter) {
    switch (variant) {
        case CodecVariant::toy_dct: return toy_decode(payload);
        case CodecVariant::external:
            if (!adapter) {
                throw ConfigError("external base payload needs adapter command templates");
            }
            return external_decode_payload(payload, *adapter);
    }
    throw ConfigError("unknown base codec variant");
}

}  // namespace brs
