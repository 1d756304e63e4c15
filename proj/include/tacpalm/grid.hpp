#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace tacpalm {

// Row-major raster of interleaved channel intensities. Pixel (x, y) channel c
// lives at data[(y * width + x) * channels + c]; origin is top-left with y
// increasing downward. Camera frames hold values in [0, 1]; difference images
// reuse the same container with values in [-1, 1].
struct TactileFrame {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<double> data;

    static TactileFrame zeros(int width, int height, int channels);

    double& at(int x, int y, int c) {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    double at(int x, int y, int c) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    bool same_shape(const TactileFrame& other) const {
        return width == other.width && height == other.height && channels == other.channels;
    }
    std::size_t pixel_count() const {
        return static_cast<std::size_t>(width) * height;
    }
};

// Per-pixel surface slope pair (p = dz/dx, q = dz/dy), planar layout.
struct GradientField {
    int width = 0;
    int height = 0;
    std::vector<double> p;
    std::vector<double> q;

    static GradientField zeros(int width, int height);

    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * width + x;
    }
};

// Height field, gel-thickness normalized (1.0 == one gel thickness).
// Also reused as a generic scalar raster (e.g. divergence fields).
struct DepthMap {
    int width = 0;
    int height = 0;
    std::vector<double> z;

    static DepthMap zeros(int width, int height);

    double& at(int x, int y) { return z[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return z[static_cast<std::size_t>(y) * width + x]; }
};

using ScalarField = DepthMap;

// Boolean raster; area_px always equals the number of set pixels.
struct ContactMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> mask;  // 0 or 1
    std::size_t area_px = 0;

    static ContactMask zeros(int width, int height);

    bool at(int x, int y) const { return mask[static_cast<std::size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool value);
    void recount();
};

// Converts a mask (0 -> black, 1 -> white) to a single-channel frame.
TactileFrame to_frame(const ContactMask& mask);
// Converts a depth map to a single-channel frame; values must already be in [0, 1].
TactileFrame to_frame(const DepthMap& depth);
// Keeps the first n channels of a frame (e.g. RGB -> two-color palm channels).
TactileFrame select_channels(const TactileFrame& frame, int n);

// PNG I/O: 8- or 16-bit gray, gray+alpha or RGB input, scaled to [0, 1].
// Gray files map to channels=1 which is rejected unless gray_to_rgb duplicates
// the channel. Writing emits 8-bit PNGs (1 -> gray, 2 -> gray+alpha, 3 -> RGB)
// with deterministic bytes for identical input.
TactileFrame read_png(const std::filesystem::path& path, bool gray_to_rgb = false);
void write_png(const TactileFrame& frame, const std::filesystem::path& path);

// Portable Float Map ("Pf", single channel, little-endian). Rows are flipped
// on read/write so in-memory rasters keep the top-left origin. Lossless at
// 32-bit float precision.
DepthMap read_pfm(const std::filesystem::path& path);
void write_pfm(const DepthMap& depth, const std::filesystem::path& path);

}  // namespace tacpalm
