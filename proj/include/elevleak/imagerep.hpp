#pragma once

#include "elevleak/profile.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace elevleak::imagerep {

inline constexpr int kImageSize = 32;
inline constexpr int kResampleLength = 200;

// Channel-major 3 x 32 x 32, values in [0, 1]. Row 0 is the top of the image.
struct ImageTensor {
    std::vector<double> values = std::vector<double>(3 * kImageSize * kImageSize, 0.0);

    double& at(int channel, int row, int col) {
        return values[static_cast<std::size_t>((channel * kImageSize + row) * kImageSize + col)];
    }
    double at(int channel, int row, int col) const {
        return values[static_cast<std::size_t>((channel * kImageSize + row) * kImageSize + col)];
    }
    bool is_background(int row, int col) const {
        return at(0, row, col) == 1.0 && at(1, row, col) == 1.0 && at(2, row, col) == 1.0;
    }
};

using Rgb = std::array<double, 3>;

// Equal-width elevation bins over a global range, each with a distinct
// non-white color. The line color encodes which bin a sample's mean
// elevation falls in.
struct Palette {
    double lo_m = -100.0;
    double hi_m = 3000.0;
    std::vector<Rgb> colors;

    static Palette defaults();
    int bin_of(double elevation_m) const; // clamped to [0, colors.size())
};

// Squeezes or stretches a profile to exactly 200 values: contiguous
// partition means when the profile is longer, linear interpolation when it
// is shorter.
std::vector<double> resample_200(const std::vector<double>& elevations);

// Draws the profile as a 1-pixel polyline on a white background. The y-axis
// is scaled per sample (min -> bottom row, max -> top row); a constant
// profile draws a horizontal line at row 16. Bresenham, no anti-aliasing.
ImageTensor rasterize(const ElevationProfile& profile, const Palette& palette = Palette::defaults());

// 8-bit RGB dumps for inspection; `scale` repeats each pixel scale x scale.
std::vector<std::uint8_t> to_rgb8(const ImageTensor& image, int scale = 1);
void write_ppm(const std::string& path, const ImageTensor& image, int scale = 1);
void write_png(const std::string& path, const ImageTensor& image, int scale = 1);
std::vector<std::uint8_t> png_bytes(const ImageTensor& image, int scale = 1);

} // namespace elevleak::imagerep
