#include "tacpalm/grid.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

#include "tacpalm/errors.hpp"

namespace tacpalm {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void require_unit_range(const std::vector<double>& values, const char* what) {
    for (double v : values) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw InputError(std::string(what) + ": value out of [0,1] range");
        }
    }
}

}  // namespace

TactileFrame TactileFrame::zeros(int width, int height, int channels) {
    TactileFrame f;
    f.width = width;
    f.height = height;
    f.channels = channels;
    f.data.assign(static_cast<std::size_t>(width) * height * channels, 0.0);
    return f;
}

GradientField GradientField::zeros(int width, int height) {
    GradientField g;
    g.width = width;
    g.height = height;
    g.p.assign(static_cast<std::size_t>(width) * height, 0.0);
    g.q.assign(static_cast<std::size_t>(width) * height, 0.0);
    return g;
}

DepthMap DepthMap::zeros(int width, int height) {
    DepthMap d;
    d.width = width;
    d.height = height;
    d.z.assign(static_cast<std::size_t>(width) * height, 0.0);
    return d;
}

ContactMask ContactMask::zeros(int width, int height) {
    ContactMask m;
    m.width = width;
    m.height = height;
    m.mask.assign(static_cast<std::size_t>(width) * height, 0);
    m.area_px = 0;
    return m;
}

void ContactMask::set(int x, int y, bool value) {
    auto& cell = mask[static_cast<std::size_t>(y) * width + x];
    if (cell != static_cast<std::uint8_t>(value)) {
        cell = value ? 1 : 0;
        area_px += value ? 1 : -1;
    }
}

void ContactMask::recount() {
    area_px = 0;
    for (auto v : mask) area_px += v ? 1 : 0;
}

TactileFrame to_frame(const ContactMask& mask) {
    TactileFrame f = TactileFrame::zeros(mask.width, mask.height, 1);
    for (std::size_t i = 0; i < mask.mask.size(); ++i) {
        f.data[i] = mask.mask[i] ? 1.0 : 0.0;
    }
    return f;
}

TactileFrame to_frame(const DepthMap& depth) {
    require_unit_range(depth.z, "to_frame(depth)");
    TactileFrame f = TactileFrame::zeros(depth.width, depth.height, 1);
    f.data = depth.z;
    return f;
}

TactileFrame select_channels(const TactileFrame& frame, int n) {
    if (n < 1 || n > frame.channels) {
        throw UsageError("select_channels: requested " + std::to_string(n) + " of " +
                         std::to_string(frame.channels) + " channels");
    }
    TactileFrame out = TactileFrame::zeros(frame.width, frame.height, n);
    for (std::size_t px = 0; px < frame.pixel_count(); ++px) {
        for (int c = 0; c < n; ++c) {
            out.data[px * n + c] = frame.data[px * frame.channels + c];
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// PNG
// ---------------------------------------------------------------------------

TactileFrame read_png(const std::filesystem::path& path, bool gray_to_rgb) {
    FilePtr file(std::fopen(path.string().c_str(), "rb"));
    if (!file) {
        throw InputError("cannot open PNG file: " + path.string());
    }

    unsigned char signature[8];
    if (std::fread(signature, 1, 8, file.get()) != 8 || png_sig_cmp(signature, 0, 8)) {
        throw FormatError("not a PNG file: " + path.string());
    }

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("libpng initialization failed");
    }

    std::vector<std::vector<unsigned char>> rows;
    int width = 0, height = 0, channels = 0, bit_depth = 0;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("malformed PNG: " + path.string());
    }

    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    width = static_cast<int>(png_get_image_width(png, info));
    height = static_cast<int>(png_get_image_height(png, info));
    bit_depth = png_get_bit_depth(png, info);
    int color_type = png_get_color_type(png, info);

    if (bit_depth != 8 && bit_depth != 16) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("unsupported PNG bit depth " + std::to_string(bit_depth) +
                          " (want 8 or 16): " + path.string());
    }
    switch (color_type) {
        case PNG_COLOR_TYPE_GRAY:
            channels = 1;
            break;
        case PNG_COLOR_TYPE_GRAY_ALPHA:
            channels = 2;
            break;
        case PNG_COLOR_TYPE_RGB:
            channels = 3;
            break;
        default:
            png_destroy_read_struct(&png, &info, nullptr);
            throw FormatError("unsupported PNG color type (want gray, gray+alpha or RGB): " +
                              path.string());
    }
    if (bit_depth == 16) {
        if constexpr (std::endian::native == std::endian::little) {
            png_set_swap(png);
        }
    }
    png_read_update_info(png, info);

    const std::size_t rowbytes = png_get_rowbytes(png, info);
    rows.assign(height, std::vector<unsigned char>(rowbytes));
    std::vector<png_bytep> row_ptrs(height);
    for (int y = 0; y < height; ++y) row_ptrs[y] = rows[y].data();
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    const int out_channels = (channels == 1 && gray_to_rgb) ? 3 : channels;
    if (out_channels != 2 && out_channels != 3) {
        throw FormatError("PNG maps to " + std::to_string(out_channels) +
                          " channel(s); only 2 or 3 supported (pass gray_to_rgb for gray input): " +
                          path.string());
    }

    TactileFrame frame = TactileFrame::zeros(width, height, out_channels);
    const double scale = bit_depth == 8 ? 1.0 / 255.0 : 1.0 / 65535.0;
    for (int y = 0; y < height; ++y) {
        const unsigned char* row = rows[y].data();
        for (int x = 0; x < width; ++x) {
            for (int c = 0; c < channels; ++c) {
                double v;
                if (bit_depth == 8) {
                    v = row[x * channels + c] * scale;
                } else {
                    std::uint16_t raw;
                    std::memcpy(&raw, row + (x * channels + c) * 2, 2);
                    v = raw * scale;
                }
                if (channels == 1 && gray_to_rgb) {
                    for (int oc = 0; oc < 3; ++oc) frame.at(x, y, oc) = v;
                } else {
                    frame.at(x, y, c) = v;
                }
            }
        }
    }
    return frame;
}

void write_png(const TactileFrame& frame, const std::filesystem::path& path) {
    if (frame.width <= 0 || frame.height <= 0 || frame.channels < 1 || frame.channels > 3) {
        throw UsageError("write_png: frame must have 1..3 channels and positive size");
    }
    require_unit_range(frame.data, "write_png");

    FilePtr file(std::fopen(path.string().c_str(), "wb"));
    if (!file) {
        throw InputError("cannot open PNG file for writing: " + path.string());
    }

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw FormatError("libpng initialization failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw InputError("PNG write failed: " + path.string());
    }

    int color_type = PNG_COLOR_TYPE_RGB;
    if (frame.channels == 1) color_type = PNG_COLOR_TYPE_GRAY;
    if (frame.channels == 2) color_type = PNG_COLOR_TYPE_GRAY_ALPHA;

    png_init_io(png, file.get());
    png_set_IHDR(png, info, frame.width, frame.height, 8, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::vector<unsigned char> row(static_cast<std::size_t>(frame.width) * frame.channels);
    for (int y = 0; y < frame.height; ++y) {
        for (int x = 0; x < frame.width; ++x) {
            for (int c = 0; c < frame.channels; ++c) {
                row[x * frame.channels + c] =
                    static_cast<unsigned char>(std::lround(frame.at(x, y, c) * 255.0));
            }
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

// ---------------------------------------------------------------------------
// PFM
// ---------------------------------------------------------------------------

namespace {

// Reads one whitespace-delimited header token (PFM allows any whitespace).
std::string next_token(std::istream& in) {
    std::string tok;
    in >> tok;
    return tok;
}

}  // namespace

DepthMap read_pfm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open PFM file: " + path.string());
    }
    const std::string magic = next_token(in);
    if (magic == "PF") {
        throw FormatError("color PFM (\"PF\") not supported, expected single-channel \"Pf\": " +
                          path.string());
    }
    if (magic != "Pf") {
        throw FormatError("not a PFM file (bad magic): " + path.string());
    }
    int width = 0, height = 0;
    double scale = 0.0;
    if (!(in >> width >> height >> scale) || width <= 0 || height <= 0 || scale == 0.0) {
        throw FormatError("malformed PFM header: " + path.string());
    }
    // Exactly one whitespace byte separates the header from the raster.
    in.get();
    if (scale > 0.0) {
        throw FormatError("big-endian PFM not supported (scale must be negative): " +
                          path.string());
    }

    std::vector<float> raster(static_cast<std::size_t>(width) * height);
    in.read(reinterpret_cast<char*>(raster.data()),
            static_cast<std::streamsize>(raster.size() * sizeof(float)));
    if (in.gcount() != static_cast<std::streamsize>(raster.size() * sizeof(float))) {
        throw FormatError("truncated PFM raster: " + path.string());
    }
    static_assert(std::endian::native == std::endian::little,
                  "PFM reader assumes a little-endian host");

    // PFM stores rows bottom-up; flip to the top-left origin convention.
    DepthMap depth = DepthMap::zeros(width, height);
    for (int y = 0; y < height; ++y) {
        const float* src = raster.data() + static_cast<std::size_t>(height - 1 - y) * width;
        for (int x = 0; x < width; ++x) {
            depth.at(x, y) = src[x];
        }
    }
    return depth;
}

void write_pfm(const DepthMap& depth, const std::filesystem::path& path) {
    if (depth.width <= 0 || depth.height <= 0) {
        throw UsageError("write_pfm: empty depth map");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InputError("cannot open PFM file for writing: " + path.string());
    }
    out << "Pf\n" << depth.width << " " << depth.height << "\n-1.0\n";
    std::vector<float> row(depth.width);
    for (int y = depth.height - 1; y >= 0; --y) {
        for (int x = 0; x < depth.width; ++x) {
            row[x] = static_cast<float>(depth.at(x, y));
        }
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size() * sizeof(float)));
    }
    if (!out) {
        throw InputError("PFM write failed: " + path.string());
    }
}

}  // namespace tacpalm
