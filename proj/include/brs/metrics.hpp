#pragma once

#include <string>
#include <vector>

#include "brs/frame.hpp"

namespace brs {

// 10*log10(peak^2 / MSE) over all channels and pixels; identical inputs are
// capped at 99 dB instead of +inf.
double psnr(const Frame& x, const Frame& y, double peak = 1.0);

inline constexpr double kPsnrCap = 99.0;

// Single-scale SSIM on BT.601 luma: 11x11 Gaussian window (sigma 1.5),
// K1 = 0.01, K2 = 0.03, dynamic range 1.0, averaged over all positions where
// the window fits entirely inside the frame.
double ssim(const Frame& x, const Frame& y);

struct QualityScore {
    std::vector<double> psnr_db;
    std::vector<double> ssim;
    double mean_psnr = 0.0;
    double mean_ssim = 0.0;
};

QualityScore score_sequence(const std::vector<Frame>& reference,
                            const std::vector<Frame>& test);

// frame_index,psnr_db,ssim rows.
void write_scores_csv(const std::string& path, const QualityScore& score);
std::string scores_json(const QualityScore& score);

}  // namespace brs
