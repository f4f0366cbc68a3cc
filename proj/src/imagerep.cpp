#include "elevleak/imagerep.hpp"

#include "elevleak/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace elevleak::imagerep {

Palette Palette::defaults() {
    Palette p;
    // Eight well-separated hues; none may collide with the white background.
    p.colors = {
        Rgb{0.894, 0.102, 0.110}, // red
        Rgb{0.216, 0.494, 0.722}, // blue
        Rgb{0.302, 0.686, 0.290}, // green
        Rgb{0.596, 0.306, 0.639}, // purple
        Rgb{1.000, 0.498, 0.000}, // orange
        Rgb{0.651, 0.337, 0.157}, // brown
        Rgb{0.969, 0.506, 0.749}, // pink
        Rgb{0.400, 0.400, 0.400}, // gray
    };
    return p;
}

int Palette::bin_of(double elevation_m) const {
    const int n = static_cast<int>(colors.size());
    if (n == 0) throw ValidationError("palette has no colors");
    const double width = (hi_m - lo_m) / n;
    const int bin = static_cast<int>(std::floor((elevation_m - lo_m) / width));
    return std::clamp(bin, 0, n - 1);
}

std::vector<double> resample_200(const std::vector<double>& elevations) {
    const std::size_t n = elevations.size();
    if (n < 2) throw ValidationError("profile must have at least 2 values");
    std::vector<double> out(kResampleLength);

    if (n >= kResampleLength) {
        // Contiguous near-equal parts; each output value is its part's mean.
        for (std::size_t k = 0; k < kResampleLength; ++k) {
            const std::size_t lo = k * n / kResampleLength;
            const std::size_t hi = (k + 1) * n / kResampleLength;
            double sum = 0.0;
            for (std::size_t i = lo; i < hi; ++i) sum += elevations[i];
            out[k] = sum / static_cast<double>(hi - lo);
        }
    } else {
        for (std::size_t k = 0; k < kResampleLength; ++k) {
            const double t = static_cast<double>(k) * static_cast<double>(n - 1) /
                             static_cast<double>(kResampleLength - 1);
            const std::size_t i = std::min(static_cast<std::size_t>(t), n - 2);
            const double frac = t - static_cast<double>(i);
            out[k] = elevations[i] + frac * (elevations[i + 1] - elevations[i]);
        }
    }
    return out;
}

namespace {

void put_pixel(ImageTensor& img, int row, int col, const Rgb& color) {
    for (int c = 0; c < 3; ++c) img.at(c, row, col) = color[static_cast<std::size_t>(c)];
}

void draw_segment(ImageTensor& img, int x0, int y0, int x1, int y1, const Rgb& color) {
    const int dx = std::abs(x1 - x0);
    const int dy = -std::abs(y1 - y0);
    const int sx = x0 < x1 ? 1 : -1;
    const int sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
        put_pixel(img, y0, x0, color);
        if (x0 == x1 && y0 == y1) break;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y0 += sy;
        }
    }
}

} // namespace

ImageTensor rasterize(const ElevationProfile& profile, const Palette& palette) {
    for (double e : profile.elevations_m)
        if (!std::isfinite(e)) throw NonFiniteElevation();

    const auto pts = resample_200(profile.elevations_m);
    const double lo = *std::min_element(pts.begin(), pts.end());
    const double hi = *std::max_element(pts.begin(), pts.end());
    const double mean = [&] {
        double s = 0.0;
        for (double v : pts) s += v;
        return s / static_cast<double>(pts.size());
    }();
    const Rgb color = palette.colors[static_cast<std::size_t>(palette.bin_of(mean))];

    ImageTensor img;
    std::fill(img.values.begin(), img.values.end(), 1.0); // white background

    auto x_of = [](std::size_t i) {
        return static_cast<int>(
            std::lround(static_cast<double>(i) * (kImageSize - 1) / (kResampleLength - 1)));
    };
    auto y_of = [&](double v) {
        if (hi == lo) return kImageSize / 2; // degenerate: horizontal midline
        return static_cast<int>(std::lround((1.0 - (v - lo) / (hi - lo)) * (kImageSize - 1)));
    };

    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        draw_segment(img, x_of(i), y_of(pts[i]), x_of(i + 1), y_of(pts[i + 1]), color);
    return img;
}

std::vector<std::uint8_t> to_rgb8(const ImageTensor& image, int scale) {
    if (scale < 1) throw ValidationError("scale must be >= 1");
    const int side = kImageSize * scale;
    std::vector<std::uint8_t> rgb(static_cast<std::size_t>(side) * side * 3);
    for (int row = 0; row < side; ++row) {
        for (int col = 0; col < side; ++col) {
            const std::size_t base = (static_cast<std::size_t>(row) * side + col) * 3;
            for (int c = 0; c < 3; ++c) {
                const double v = image.at(c, row / scale, col / scale);
                rgb[base + static_cast<std::size_t>(c)] =
                    static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
            }
        }
    }
    return rgb;
}

void write_ppm(const std::string& path, const ImageTensor& image, int scale) {
    const auto rgb = to_rgb8(image, scale);
    const int side = kImageSize * scale;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path + " for writing");
    out << "P6\n" << side << " " << side << "\n255\n";
    out.write(reinterpret_cast<const char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
}

} // namespace elevleak::imagerep
