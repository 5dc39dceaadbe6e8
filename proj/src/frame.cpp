#include "brs/frame.hpp"

#include <cmath>
#include <fstream>

namespace brs {

Frame Frame::zeros(int channels, int height, int width) {
    Frame f;
    f.channels = channels;
    f.height = height;
    f.width = width;
    f.values.assign(static_cast<std::size_t>(f.numel()), 0.0);
    return f;
}

Frame Frame::from_bytes(int channels, int height, int width,
                        std::span<const std::uint8_t> planar) {
    Frame f = zeros(channels, height, width);
    if (static_cast<std::int64_t>(planar.size()) != f.numel()) {
        throw ShapeError("frame byte buffer has " + std::to_string(planar.size()) +
                         " bytes, expected " + std::to_string(f.numel()));
    }
    for (std::size_t i = 0; i < planar.size(); ++i) f.values[i] = planar[i] / 255.0;
    return f;
}

std::vector<std::uint8_t> Frame::to_bytes() const {
    std::vector<std::uint8_t> out(static_cast<std::size_t>(numel()));
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double v = std::clamp(values[i], 0.0, 1.0) * 255.0;
        out[i] = static_cast<std::uint8_t>(std::lround(v));
    }
    return out;
}

Tensor Frame::to_tensor() const { return Tensor({channels, height, width}, values); }

Frame Frame::from_tensor(const Tensor& chw, bool clamp_unit) {
    if (chw.rank() != 3) throw ShapeError("Frame::from_tensor expects (C, H, W)");
    Frame f;
    f.channels = chw.dim(0);
    f.height = chw.dim(1);
    f.width = chw.dim(2);
    f.values = chw.values();
    if (clamp_unit) {
        for (auto& v : f.values) v = std::clamp(v, 0.0, 1.0);
    }
    return f;
}

void Frame::require_unit_range(const char* what) const {
    for (double v : values) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw ShapeError(std::string(what) + ": pixel value " + std::to_string(v) +
                             " outside [0, 1]");
        }
    }
}

bool same_dims(const Frame& a, const Frame& b) {
    return a.channels == b.channels && a.height == b.height && a.width == b.width;
}

ResidualFrame compute_residual(const Frame& x, const Frame& y) {
    if (!same_dims(x, y)) {
        throw ShapeError("compute_residual: dims differ");
    }
    Tensor r({x.channels, x.height, x.width});
    for (std::int64_t i = 0; i < r.numel(); ++i) {
        r[i] = x.values[static_cast<std::size_t>(i)] - y.values[static_cast<std::size_t>(i)];
    }
    return ResidualFrame::wrap(std::move(r));
}

Frame add_residual(const Frame& y, const ResidualFrame& r) {
    if (y.channels != r.data.dim(0) || y.height != r.data.dim(1) || y.width != r.data.dim(2)) {
        throw ShapeError("add_residual: dims differ");
    }
    Frame out = y;
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        out.values[i] = std::clamp(out.values[i] + r.data[static_cast<std::int64_t>(i)], 0.0, 1.0);
    }
    return out;
}

Frame read_frame_file(const std::string& path, int channels, int height, int width) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open frame file: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (static_cast<std::int64_t>(bytes.size()) !=
        static_cast<std::int64_t>(channels) * height * width) {
        throw Error("frame file " + path + " has " + std::to_string(bytes.size()) +
                    " bytes, expected " + std::to_string(channels * height * width));
    }
    return Frame::from_bytes(channels, height, width, bytes);
}

void write_frame_file(const std::string& path, const Frame& frame) {
    const std::vector<std::uint8_t> bytes = frame.to_bytes();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open frame file for writing: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("short write to frame file: " + path);
}

}  // namespace brs
