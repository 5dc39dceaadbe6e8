#pragma once

#include <string>
#include <vector>

#include "brs/autoencoder.hpp"
#include "brs/base_codec.hpp"
#include "brs/frame.hpp"

namespace brs {

// Plain-text frame listing:
//   fps 10
//   dims 3 32 32
//   frame frames/frame_00000.rgb
// Frame paths are relative to the manifest's directory.
struct Manifest {
    std::string directory;
    double fps = 0.0;
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<std::string> frame_paths;
};

Manifest load_manifest(const std::string& path);
void write_manifest(const std::string& path, double fps, int channels, int height, int width,
                    const std::vector<std::string>& frame_paths);
std::vector<Frame> load_frames(const Manifest& manifest);

// Frames, base-codec output and X - Y residuals for one manifest. The base
// codec run is cached under cache_dir keyed by (codec settings, manifest
// bytes, frame file bytes) so repeated runs skip the transcode; rewrites go
// through a temp file + atomic rename.
struct ResidualData {
    std::vector<Frame> originals;
    std::vector<Frame> decoded;
    std::vector<ResidualFrame> residuals;
    std::vector<std::int64_t> per_frame_bits;
    std::int64_t base_payload_bits = 0;
};

std::string default_cache_dir();

ResidualData materialize_residuals(const Manifest& manifest, const std::vector<Frame>& frames,
                                   const BaseCodecKind& codec, const std::string& cache_dir);

// In-memory variant for callers without a manifest on disk (tests, synthetic
// corpora). No caching.
ResidualData make_residual_data(const std::vector<Frame>& frames, const BaseCodecKind& codec,
                                double fps = 30.0);

}  // namespace brs
