#pragma once

#include <cstdint>
#include <vector>

#include "brs/frame.hpp"

namespace brs {

// Seeded clip of moving textured patterns: drifting sinusoidal gratings, a
// hard-edged square-wave grating and a wandering blob over a mid-gray base,
// with a slow global brightness wobble. Values are snapped to the 8-bit
// grid like any frame loaded from disk.
std::vector<Frame> make_moving_texture_corpus(int frame_count, int height, int width,
                                              std::uint64_t seed);

}  // namespace brs
