#include "brs/synthetic.hpp"

#include <cmath>

#include "brs/rng.hpp"

namespace brs {

namespace {

struct Grating {
    double kx, ky, phase, speed;
    double amp[3];
};

}  // namespace

std::vector<Frame> make_moving_texture_corpus(int frame_count, int height, int width,
                                              std::uint64_t seed) {
    if (frame_count < 1 || height < 1 || width < 1) {
        throw ShapeError("corpus dims must be positive");
    }
    Rng rng(seed);

    // Two fine gratings share one near-Nyquist carrier (the domain's
    // signature texture); two coarse gratings drift underneath.
    std::vector<Grating> gratings;
    const double carrier = rng.uniform(2.2, 2.6);  // radians per pixel
    for (int g = 0; g < 4; ++g) {
        Grating gr;
        const bool fine = g < 2;
        const double angle = rng.uniform(0.0, 2.0 * M_PI);
        const double freq = fine ? carrier : rng.uniform(0.2, 0.5);
        gr.kx = freq * std::cos(angle);
        gr.ky = freq * std::sin(angle);
        gr.phase = rng.uniform(0.0, 2.0 * M_PI);
        gr.speed = rng.uniform(0.1, 0.4) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
        const double base_amp = fine ? 0.18 : 0.08;
        for (int c = 0; c < 3; ++c) gr.amp[c] = base_amp * rng.uniform(0.7, 1.0);
        gratings.push_back(gr);
    }
    const double blob_sigma = rng.uniform(0.12, 0.2) * std::min(height, width);
    const double blob_amp[3] = {rng.uniform(0.10, 0.2), rng.uniform(0.10, 0.2),
                                rng.uniform(0.10, 0.2)};
    const double blob_wx = rng.uniform(0.05, 0.12), blob_wy = rng.uniform(0.05, 0.12);
    const double wobble_amp = 0.02, wobble_speed = rng.uniform(0.02, 0.08);

    std::vector<Frame> frames;
    frames.reserve(static_cast<std::size_t>(frame_count));
    for (int t = 0; t < frame_count; ++t) {
        Frame f = Frame::zeros(3, height, width);
        const double wobble = wobble_amp * std::sin(wobble_speed * t);
        const double cx = width * (0.5 + 0.3 * std::sin(blob_wx * t));
        const double cy = height * (0.5 + 0.3 * std::cos(blob_wy * t));
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                double base[3] = {0.5 + wobble, 0.5 + wobble, 0.5 + wobble};
                for (const Grating& gr : gratings) {
                    const double s = std::sin(gr.kx * x + gr.ky * y + gr.phase + gr.speed * t);
                    for (int c = 0; c < 3; ++c) base[c] += gr.amp[c] * s;
                }
                const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
                const double bump = std::exp(-d2 / (2.0 * blob_sigma * blob_sigma));
                for (int c = 0; c < 3; ++c) {
                    const double v = std::clamp(base[c] + blob_amp[c] * bump, 0.0, 1.0);
                    f.at(c, y, x) = std::round(v * 255.0) / 255.0;
                }
            }
        }
        frames.push_back(std::move(f));
    }
    return frames;
}

}  // namespace brs
