#include <doctest.h>

#include <png.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "tacpalm/errors.hpp"
#include "tacpalm/grid.hpp"
#include "test_util.hpp"

using namespace tacpalm;
namespace fs = std::filesystem;

namespace {

std::vector<unsigned char> slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("raster indexing probe: pixel (x,y) channel c lives at ((y*W+x)*C+c)") {
    TactileFrame f = TactileFrame::zeros(5, 4, 3);
    f.at(3, 2, 1) = 0.5;
    CHECK(f.data[(2 * 5 + 3) * 3 + 1] == 0.5);
    for (std::size_t i = 0; i < f.data.size(); ++i) {
        if (i != (2 * 5 + 3) * 3 + 1) CHECK(f.data[i] == 0.0);
    }

    DepthMap d = DepthMap::zeros(5, 4);
    d.at(1, 3) = 2.0;
    CHECK(d.z[3 * 5 + 1] == 2.0);
}

TEST_CASE("contact mask tracks its area") {
    ContactMask m = ContactMask::zeros(4, 4);
    CHECK(m.area_px == 0);
    m.set(1, 1, true);
    m.set(2, 2, true);
    m.set(1, 1, true);  // idempotent
    CHECK(m.area_px == 2);
    m.set(1, 1, false);
    CHECK(m.area_px == 1);
    m.recount();
    CHECK(m.area_px == 1);
}

TEST_CASE("PNG: all-white saturation and 8-bit scaling") {
    const auto dir = testutil::temp_dir("grid_png");

    TactileFrame white = TactileFrame::zeros(2, 2, 3);
    for (auto& v : white.data) v = 1.0;
    write_png(white, dir / "white.png");
    const TactileFrame back = read_png(dir / "white.png");
    CHECK(back.width == 2);
    CHECK(back.height == 2);
    CHECK(back.channels == 3);
    for (double v : back.data) CHECK(v == 1.0);

    // An 8-bit value of 128 reads back as exactly 128/255.
    TactileFrame mid = TactileFrame::zeros(1, 1, 3);
    for (auto& v : mid.data) v = 128.0 / 255.0;
    write_png(mid, dir / "mid.png");
    const TactileFrame mid_back = read_png(dir / "mid.png");
    for (double v : mid_back.data) CHECK(v == doctest::Approx(128.0 / 255.0).epsilon(1e-12));
}

TEST_CASE("PNG round-trips are lossless at 8-bit depth (randomized)") {
    const auto dir = testutil::temp_dir("grid_png_rt");
    auto gen = testutil::rng(42);
    std::uniform_int_distribution<int> dim(1, 17);
    std::uniform_int_distribution<int> level(0, 255);
    std::uniform_int_distribution<int> chan_pick(1, 3);

    for (int trial = 0; trial < 100; ++trial) {
        const int w = dim(gen), h = dim(gen), ch = chan_pick(gen);
        TactileFrame f = TactileFrame::zeros(w, h, ch);
        for (auto& v : f.data) v = level(gen) / 255.0;
        const auto p1 = dir / ("rt_" + std::to_string(trial) + ".png");
        const auto p2 = dir / ("rt_" + std::to_string(trial) + "_again.png");
        write_png(f, p1);
        const TactileFrame g = ch == 1 ? read_png(p1, true) : read_png(p1);
        if (ch == 1) {
            CHECK(g.channels == 3);
            for (std::size_t px = 0; px < f.pixel_count(); ++px) {
                for (int c = 0; c < 3; ++c) {
                    CHECK(g.data[px * 3 + c] == f.data[px]);
                }
            }
        } else {
            CHECK(g.same_shape(f));
            for (std::size_t i = 0; i < f.data.size(); ++i) CHECK(g.data[i] == f.data[i]);
            // write(read(x)) reproduces identical bytes
            write_png(g, p2);
            CHECK(slurp(p1) == slurp(p2));
        }
    }
}

TEST_CASE("PNG: gray input is rejected unless duplicated by flag") {
    const auto dir = testutil::temp_dir("grid_gray");
    TactileFrame gray = TactileFrame::zeros(3, 3, 1);
    gray.at(1, 1, 0) = 0.25;
    write_png(gray, dir / "gray.png");
    CHECK_THROWS_AS((void)read_png(dir / "gray.png"), FormatError);
    const TactileFrame rgb = read_png(dir / "gray.png", /*gray_to_rgb=*/true);
    CHECK(rgb.channels == 3);
    CHECK(rgb.at(1, 1, 0) == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(rgb.at(1, 1, 2) == rgb.at(1, 1, 0));
}

TEST_CASE("PNG error paths: missing file, garbage, unsupported bit depth") {
    const auto dir = testutil::temp_dir("grid_err");
    CHECK_THROWS_AS((void)read_png(dir / "nope.png"), InputError);

    std::ofstream(dir / "garbage.png") << "this is not a png";
    CHECK_THROWS_AS((void)read_png(dir / "garbage.png"), FormatError);

    // Craft a 1-bit gray PNG; only 8 and 16 bit are supported.
    {
        std::FILE* fp = std::fopen((dir / "onebit.png").string().c_str(), "wb");
        REQUIRE(fp != nullptr);
        png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        png_infop info = png_create_info_struct(png);
        REQUIRE(setjmp(png_jmpbuf(png)) == 0);
        png_init_io(png, fp);
        png_set_IHDR(png, info, 8, 1, 1, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                     PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
        png_write_info(png, info);
        unsigned char row = 0xA5;
        png_bytep rows[1] = {&row};
        png_write_image(png, rows);
        png_write_end(png, nullptr);
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
    }
    CHECK_THROWS_AS((void)read_png(dir / "onebit.png"), FormatError);

    // Out-of-range values are refused on write.
    TactileFrame bad = TactileFrame::zeros(2, 2, 3);
    bad.at(0, 0, 0) = 1.5;
    CHECK_THROWS_AS(write_png(bad, dir / "bad.png"), InputError);
}

TEST_CASE("mask to PNG: area_px white pixels, all-zero mask is all black") {
    const auto dir = testutil::temp_dir("grid_mask");
    ContactMask m = ContactMask::zeros(8, 8);
    m.set(0, 0, true);
    m.set(3, 4, true);
    m.set(7, 7, true);
    m.set(2, 2, true);
    m.set(5, 1, true);
    CHECK(m.area_px == 5);
    write_png(to_frame(m), dir / "mask.png");
    const TactileFrame back = read_png(dir / "mask.png", true);
    std::size_t white = 0, black = 0;
    for (std::size_t px = 0; px < back.pixel_count(); ++px) {
        if (back.data[px * 3] == 1.0) ++white;
        if (back.data[px * 3] == 0.0) ++black;
    }
    CHECK(white == 5);
    CHECK(black == 64 - 5);

    ContactMask empty = ContactMask::zeros(4, 4);
    write_png(to_frame(empty), dir / "empty.png");
    const TactileFrame eb = read_png(dir / "empty.png", true);
    for (double v : eb.data) CHECK(v == 0.0);
}

TEST_CASE("PFM: bitwise float round-trip (randomized)") {
    const auto dir = testutil::temp_dir("grid_pfm");
    auto gen = testutil::rng(7);
    std::uniform_int_distribution<int> dim(1, 23);
    std::uniform_real_distribution<float> val(-100.0f, 100.0f);

    for (int trial = 0; trial < 100; ++trial) {
        const int w = dim(gen), h = dim(gen);
        DepthMap d = DepthMap::zeros(w, h);
        for (auto& z : d.z) z = val(gen);  // float-representable by construction
        const auto path = dir / ("d" + std::to_string(trial) + ".pfm");
        write_pfm(d, path);
        const DepthMap back = read_pfm(path);
        REQUIRE(back.width == w);
        REQUIRE(back.height == h);
        for (std::size_t i = 0; i < d.z.size(); ++i) {
            CHECK(static_cast<float>(back.z[i]) == static_cast<float>(d.z[i]));
            CHECK(back.z[i] == d.z[i]);
        }
    }
}

TEST_CASE("PFM header grammar") {
    const auto dir = testutil::temp_dir("grid_pfm_hdr");

    // Minimal legal single-channel map: "Pf\n3 2\n-1.0\n" + 6 floats.
    {
        std::ofstream out(dir / "ok.pfm", std::ios::binary);
        out << "Pf\n3 2\n-1.0\n";
        const float values[6] = {1, 2, 3, 4, 5, 6};
        out.write(reinterpret_cast<const char*>(values), sizeof(values));
    }
    const DepthMap d = read_pfm(dir / "ok.pfm");
    CHECK(d.width == 3);
    CHECK(d.height == 2);
    // PFM rows are bottom-up: the first stored row is the image's last row.
    CHECK(d.at(0, 1) == 1.0f);
    CHECK(d.at(0, 0) == 4.0f);

    // Color "PF" is rejected.
    {
        std::ofstream out(dir / "color.pfm", std::ios::binary);
        out << "PF\n1 1\n-1.0\n";
        const float rgb[3] = {0, 0, 0};
        out.write(reinterpret_cast<const char*>(rgb), sizeof(rgb));
    }
    CHECK_THROWS_AS((void)read_pfm(dir / "color.pfm"), FormatError);

    // Truncated raster and malformed headers are rejected.
    {
        std::ofstream out(dir / "short.pfm", std::ios::binary);
        out << "Pf\n3 2\n-1.0\n";
        const float one = 1.0f;
        out.write(reinterpret_cast<const char*>(&one), sizeof(one));
    }
    CHECK_THROWS_AS((void)read_pfm(dir / "short.pfm"), FormatError);
    std::ofstream(dir / "bad.pfm") << "Pf\n-3 2\n-1.0\n";
    CHECK_THROWS_AS((void)read_pfm(dir / "bad.pfm"), FormatError);
    // Positive scale would mean big-endian data.
    std::ofstream(dir / "be.pfm") << "Pf\n1 1\n1.0\nxxxx";
    CHECK_THROWS_AS((void)read_pfm(dir / "be.pfm"), FormatError);
}

TEST_CASE("select_channels keeps the leading channels") {
    TactileFrame f = TactileFrame::zeros(2, 1, 3);
    f.at(0, 0, 0) = 0.1;
    f.at(0, 0, 1) = 0.2;
    f.at(0, 0, 2) = 0.3;
    f.at(1, 0, 0) = 0.4;
    f.at(1, 0, 1) = 0.5;
    f.at(1, 0, 2) = 0.6;
    const TactileFrame two = select_channels(f, 2);
    CHECK(two.channels == 2);
    CHECK(two.at(0, 0, 0) == 0.1);
    CHECK(two.at(0, 0, 1) == 0.2);
    CHECK(two.at(1, 0, 1) == 0.5);
    CHECK_THROWS_AS((void)select_channels(f, 4), UsageError);
}
