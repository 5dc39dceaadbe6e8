#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "brs/autoencoder.hpp"
#include "brs/base_codec.hpp"

namespace brs {

// One benchmark rate point: "rate_point <mbps> <split> <checkpoint>".
struct RatePoint {
    double mbps = 0.0;
    double split = 0.8;
    std::string checkpoint;
};

// Flat key-value run configuration. Unknown keys are rejected. Every command
// writes the fully resolved set back out next to its outputs so a run can be
// reproduced from the snapshot alone.
struct RunConfig {
    std::uint64_t seed = 0;

    // autoencoder
    int layers = 2;
    int channels = 8;
    int input_channels = 3;
    std::string binarizer = "hardtanh";
    double gumbel_tau_initial = 1.0;
    double gumbel_anneal_factor = 0.97;
    double gumbel_tau_floor = 0.3;

    // training
    double lr = 1e-3;
    int lr_halving_period_epochs = 5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    int batch_size = 10;
    int epochs = 50;

    // base codec
    std::string codec = "toy";  // toy | external
    double quality = 0.0;       // toy; <= 0 means pick from split * budget
    std::string external_encode_cmd;
    std::string external_decode_cmd;
    std::string raw_format = "rgb_planar";

    // pipeline
    double budget_mbps = 1.0;
    double split = 0.8;
    int group_bits = 16;

    // io
    std::string manifest;
    std::string out_dir = "out";
    std::string checkpoint;
    std::string container;
    std::string cache_dir;  // empty -> $BRS_CACHE_DIR or system temp

    // benchmark / comparison
    std::vector<RatePoint> rate_points;
    int holdout = 0;  // eval frames taken from the end of the manifest

    static RunConfig from_file(const std::string& path);
    std::string resolved_text() const;

    AutoencoderConfig autoencoder_config() const;
    TrainConfig train_config() const;
    BaseCodecKind codec_kind() const;
    std::string effective_cache_dir() const;
};

}  // namespace brs
