#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace pgraft {

/// 8-bit grayscale PNG from row-major pixels (width * height bytes).
std::vector<std::uint8_t> encode_png_gray(std::span<const std::uint8_t> pixels, std::uint32_t width,
                                          std::uint32_t height);

/// Picture of a state: a 2-D point plotted on a 64x64 canvas spanning [-extent, extent]^2,
/// or a one-row intensity strip for any other dimension.
std::vector<std::uint8_t> render_state_png(std::span<const double> data, double extent = 12.0);

}  // namespace pgraft
