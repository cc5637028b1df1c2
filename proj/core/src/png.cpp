#include "pgraft/png.hpp"

#include <algorithm>
#include <cmath>

#include <png.h>

#include "pgraft/errors.hpp"

namespace pgraft {

namespace {

void append(png_structp png, png_bytep data, png_size_t length) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + length);
}

void no_flush(png_structp) {}

}  // namespace

std::vector<std::uint8_t> encode_png_gray(std::span<const std::uint8_t> pixels, std::uint32_t width,
                                          std::uint32_t height) {
    if (width == 0 || height == 0 || pixels.size() != static_cast<std::size_t>(width) * height) {
        throw InvalidArgument("pixel buffer does not match image size");
    }
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (info == nullptr) {
        png_destroy_write_struct(&png, nullptr);
        throw Error("libpng initialisation failed");
    }
    std::vector<std::uint8_t> out;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error("libpng failed to encode image");
    }
    png_set_write_fn(png, &out, append, no_flush);
    png_set_IHDR(png, info, width, height, 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (std::uint32_t y = 0; y < height; ++y) {
        png_write_row(png, const_cast<png_bytep>(pixels.data() + static_cast<std::size_t>(y) * width));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

std::vector<std::uint8_t> render_state_png(std::span<const double> data, double extent) {
    if (data.size() == 2) {
        constexpr std::uint32_t n = 64;
        std::vector<std::uint8_t> pixels(n * n, 0);
        auto to_pixel = [&](double v) {
            const double u = (v + extent) / (2.0 * extent) * (n - 1);
            return static_cast<long>(std::lround(std::clamp(u, 0.0, double(n - 1))));
        };
        const long px = to_pixel(data[0]);
        const long py = static_cast<long>(n - 1) - to_pixel(data[1]);
        for (long dy = -1; dy <= 1; ++dy) {
            for (long dx = -1; dx <= 1; ++dx) {
                const long x = px + dx;
                const long y = py + dy;
                if (x >= 0 && y >= 0 && x < long(n) && y < long(n)) {
                    pixels[static_cast<std::size_t>(y * n + x)] = 255;
                }
            }
        }
        return encode_png_gray(pixels, n, n);
    }
    const auto width = static_cast<std::uint32_t>(std::max<std::size_t>(data.size(), 1));
    std::vector<std::uint8_t> pixels(width, 0);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double u = std::isfinite(data[i]) ? (data[i] + extent) / (2.0 * extent) : 0.0;
        pixels[i] = static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(u, 0.0, 1.0)));
    }
    return encode_png_gray(pixels, width, 1);
}

}  // namespace pgraft
