#pragma once

#include <string>
#include <vector>

#include "brs/config.hpp"
#include "brs/metrics.hpp"
#include "brs/pipeline.hpp"

namespace brs {

// Operator-facing workflows. Each command validates its inputs, writes its
// outputs under cfg.out_dir next to a resolved-config snapshot, and throws
// ConfigError / IntegrityError / Error on failure (the CLI maps these to
// distinct exit codes).

struct TrainOutput {
    std::string checkpoint_path;
    std::vector<double> loss_history;
    std::uint64_t fingerprint = 0;
};
TrainOutput cmd_train(const RunConfig& cfg);

struct EncodeOutput {
    std::string container_path;
    BitrateReport report;
    std::vector<std::string> warnings;
};
EncodeOutput cmd_encode(const RunConfig& cfg);

struct DecodeOutput {
    std::string frames_dir;
    int frame_count = 0;
    BitrateReport report;
};
DecodeOutput cmd_decode(const RunConfig& cfg);

struct BenchmarkRow {
    std::string label;  // "baseline" or "pipeline"
    double target_mbps = 0.0;
    double split = 1.0;
    double realized_mbps = 0.0;
    double bits_per_pixel = 0.0;
    double mean_psnr = 0.0;
    double mean_ssim = 0.0;
    std::string checkpoint;
};
std::vector<BenchmarkRow> cmd_benchmark(const RunConfig& cfg);

struct CompareRow {
    std::string variant;
    double mean_psnr = 0.0;
    double mean_ssim = 0.0;
    double final_loss = 0.0;
};
std::vector<CompareRow> cmd_compare_binarizers(const RunConfig& cfg);

std::string cmd_inspect(const std::string& path);

// Base codec alone, quality bisected until the serialized container total
// lands as close as possible to target_total_bits. Used for equal-rate
// baselines.
EncodeResult encode_base_only_at_total_bits(const std::vector<Frame>& frames, double fps,
                                            std::int64_t target_total_bits, int group_bits = 16,
                                            int iterations = 40);

// Residuals padded to the model's downsample multiple, ready for training.
std::vector<ResidualFrame> pad_residuals(const std::vector<ResidualFrame>& residuals,
                                         int multiple);

}  // namespace brs
