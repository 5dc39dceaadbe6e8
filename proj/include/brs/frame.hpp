#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "brs/autoencoder.hpp"
#include "brs/tensor.hpp"

namespace brs {

// One planar image with values in [0, 1]. 8-bit sources map through /255.
struct Frame {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<double> values;  // row-major, channel-major

    std::int64_t pixel_count() const { return static_cast<std::int64_t>(height) * width; }
    std::int64_t numel() const { return static_cast<std::int64_t>(channels) * height * width; }
    double& at(int c, int y, int x) {
        return values[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
    double at(int c, int y, int x) const {
        return values[(static_cast<std::size_t>(c) * height + y) * width + x];
    }

    static Frame zeros(int channels, int height, int width);
    static Frame from_bytes(int channels, int height, int width,
                            std::span<const std::uint8_t> planar);
    std::vector<std::uint8_t> to_bytes() const;  // round(v * 255), clamped

    Tensor to_tensor() const;  // (C, H, W)
    static Frame from_tensor(const Tensor& chw, bool clamp_unit = true);

    void require_unit_range(const char* what) const;
};

bool same_dims(const Frame& a, const Frame& b);

// x - y, exact, in [-1, 1].
ResidualFrame compute_residual(const Frame& x, const Frame& y);
// clamp(y + r, 0, 1)
Frame add_residual(const Frame& y, const ResidualFrame& r);

// Raw planar 8-bit frame files.
Frame read_frame_file(const std::string& path, int channels, int height, int width);
void write_frame_file(const std::string& path, const Frame& frame);

}  // namespace brs
