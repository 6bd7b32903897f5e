// Shared builders for synthetic shapes and on-disk dataset fixtures.

#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "contourkit/mask.hpp"
#include "contourkit/png_io.hpp"
#include "contourkit/polygon.hpp"
#include "contourkit/rng.hpp"

namespace fixtures {

using contourkit::BinaryMask;
using contourkit::ContourPolygon;

inline BinaryMask rect(int w, int h, int x0, int y0, int x1, int y1) {
    BinaryMask m(w, h);
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) m.set(x, y, true);
    }
    return m;
}

inline BinaryMask centered_square(int frame, int side) {
    const int o = (frame - side) / 2;
    return rect(frame, frame, o, o, o + side, o + side);
}

inline BinaryMask disk(int w, int h, double cx, double cy, double radius) {
    BinaryMask m(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double dx = x + 0.5 - cx;
            const double dy = y + 0.5 - cy;
            if (dx * dx + dy * dy <= radius * radius) m.set(x, y, true);
        }
    }
    return m;
}

inline BinaryMask ring(int w, int h, double cx, double cy, double r_outer, double r_inner) {
    BinaryMask m(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double dx = x + 0.5 - cx;
            const double dy = y + 0.5 - cy;
            const double d2 = dx * dx + dy * dy;
            if (d2 <= r_outer * r_outer && d2 >= r_inner * r_inner) m.set(x, y, true);
        }
    }
    return m;
}

/// Three quadrants of a 2n x 2n square (the bottom-right quadrant missing).
inline BinaryMask l_shape(int frame, int n, int x0, int y0) {
    BinaryMask m(frame, frame);
    for (int y = 0; y < 2 * n; ++y) {
        for (int x = 0; x < 2 * n; ++x) {
            if (x >= n && y >= n) continue;
            m.set(x0 + x, y0 + y, true);
        }
    }
    return m;
}

/// Axis-aligned plus sign: two crossing bars of the given thickness.
inline BinaryMask plus_shape(int frame, int arm_length, int thickness) {
    BinaryMask m(frame, frame);
    const int c = frame / 2;
    const int t = thickness / 2;
    for (int y = c - arm_length; y < c + arm_length; ++y) {
        for (int x = c - t; x < c + t; ++x) m.set(x, y, true);
    }
    for (int x = c - arm_length; x < c + arm_length; ++x) {
        for (int y = c - t; y < c + t; ++y) m.set(x, y, true);
    }
    return m;
}

/// E-shaped comb with the given number of teeth, for strongly non-convex
/// fixtures.
inline BinaryMask comb(int frame, int teeth, int tooth_len, int tooth_thick, int x0, int y0) {
    BinaryMask m(frame, frame);
    const int pitch = 2 * tooth_thick;
    for (int t = 0; t < teeth; ++t) {
        const int ty = y0 + t * pitch;
        for (int y = ty; y < ty + tooth_thick; ++y) {
            for (int x = x0; x < x0 + tooth_len; ++x) m.set(x, y, true);
        }
    }
    // spine connecting the teeth
    for (int y = y0; y < y0 + (teeth - 1) * pitch + tooth_thick; ++y) {
        for (int x = x0; x < x0 + tooth_thick; ++x) m.set(x, y, true);
    }
    return m;
}

inline ContourPolygon square_polygon(double x0, double y0, double x1, double y1) {
    ContourPolygon p;
    p.vertices = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
    return p;
}

/// A loose polygon around a mask's bbox, inset/outset by `margin` in
/// normalized units.
inline ContourPolygon loose_polygon_around(const BinaryMask& m, double margin) {
    const contourkit::BoundingBox b = m.bounding_box();
    const double x0 = static_cast<double>(b.x0) / m.width() - margin;
    const double y0 = static_cast<double>(b.y0) / m.height() - margin;
    const double x1 = static_cast<double>(b.x1) / m.width() + margin;
    const double y1 = static_cast<double>(b.y1) / m.height() + margin;
    return square_polygon(x0, y0, x1, y1);
}

/// Minimal JPEG shell: SOI + SOF0 carrying the dimensions + EOI. Enough for
/// header sniffing; the toolkit never decodes image content.
inline void write_stub_jpeg(const std::filesystem::path& path, int width, int height) {
    const std::uint8_t bytes[] = {
        0xFF, 0xD8, // SOI
        0xFF, 0xC0, // SOF0
        0x00, 0x0B, // segment length 11
        0x08,       // precision
        static_cast<std::uint8_t>((height >> 8) & 0xFF),
        static_cast<std::uint8_t>(height & 0xFF),
        static_cast<std::uint8_t>((width >> 8) & 0xFF),
        static_cast<std::uint8_t>(width & 0xFF),
        0x01, 0x01, 0x11, 0x00, // one component
        0xFF, 0xD9, // EOI
    };
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes), sizeof(bytes));
}

struct FixtureAnnotation {
    std::string image_id;
    BinaryMask mask;
    std::vector<ContourPolygon> pos;
    std::vector<ContourPolygon> neg;
};

/// Writes a full dataset layout (images/, masks/, contours.json) into dir.
inline void write_dataset(const std::filesystem::path& dir,
                          const std::vector<FixtureAnnotation>& annotations) {
    namespace fs = std::filesystem;
    fs::create_directories(dir / "images");
    fs::create_directories(dir / "masks");

    std::map<std::string, std::vector<const FixtureAnnotation*>> by_image;
    for (const FixtureAnnotation& a : annotations) by_image[a.image_id].push_back(&a);

    std::string json = "{";
    bool first = true;
    char buf[64];
    for (const auto& [image_id, list] : by_image) {
        fixtures::write_stub_jpeg(dir / "images" / (image_id + ".jpg"), list[0]->mask.width(),
                                  list[0]->mask.height());
        if (!first) json += ",";
        first = false;
        json += "\"" + image_id + "\":[";
        for (std::size_t i = 0; i < list.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%02d", static_cast<int>(i) + 1);
            contourkit::pngio::write_mask_png(
                dir / "masks" / (image_id + "_" + buf + ".png"), list[i]->mask);
            if (i) json += ",";
            auto contours = [&](const std::vector<ContourPolygon>& cs) {
                std::string out = "[";
                for (std::size_t c = 0; c < cs.size(); ++c) {
                    if (c) out += ",";
                    out += "[";
                    for (std::size_t v = 0; v < cs[c].vertices.size(); ++v) {
                        if (v) out += ",";
                        std::snprintf(buf, sizeof(buf), "[%.6f,%.6f]", cs[c].vertices[v].x,
                                      cs[c].vertices[v].y);
                        out += buf;
                    }
                    out += "]";
                }
                out += "]";
                return out;
            };
            json += "{\"pos_contours\":" + contours(list[i]->pos) +
                    ",\"neg_contours\":" + contours(list[i]->neg) + "}";
        }
        json += "]";
    }
    json += "}";
    std::ofstream out(dir / "contours.json", std::ios::binary);
    out << json;
}

/// Standard 3-image / 5-annotation fixture used across the dataset and
/// harness tests. Contours are drawn loosely around each object so Zoom-In
/// crops always cover the ground truth.
inline std::vector<FixtureAnnotation> standard_annotations() {
    std::vector<FixtureAnnotation> out;
    {
        FixtureAnnotation a;
        a.image_id = "0000001";
        a.mask = rect(64, 48, 20, 12, 44, 36);
        a.pos = {loose_polygon_around(a.mask, 0.04)};
        out.push_back(a);
    }
    {
        FixtureAnnotation a;
        a.image_id = "0000001";
        a.mask = disk(64, 48, 32.0, 24.0, 14.0);
        a.pos = {loose_polygon_around(a.mask, 0.05)};
        out.push_back(a);
    }
    {
        FixtureAnnotation a;
        a.image_id = "0000002";
        a.mask = rect(80, 80, 10, 10, 40, 70);
        a.pos = {loose_polygon_around(a.mask, 0.03)};
        a.neg = {square_polygon(0.7, 0.7, 0.9, 0.9)};
        out.push_back(a);
    }
    {
        FixtureAnnotation a;
        a.image_id = "0000002";
        a.mask = l_shape(80, 18, 30, 30);
        a.pos = {loose_polygon_around(a.mask, 0.04)};
        out.push_back(a);
    }
    {
        FixtureAnnotation a;
        a.image_id = "0000003";
        a.mask = disk(96, 64, 48.0, 32.0, 20.0);
        a.pos = {loose_polygon_around(a.mask, 0.05)};
        out.push_back(a);
    }
    return out;
}

/// Unique scratch directory under the system temp dir; wiped on construction.
class TempDir {
public:
    explicit TempDir(const std::string& name)
        : path_(std::filesystem::temp_directory_path() / ("contourkit_test_" + name)) {
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

/// The 20-shape synthetic generation suite: squares, disks, L-shapes, rings,
/// thin bars, plus signs, and combs at varying sizes in a 128x128 frame.
inline std::vector<BinaryMask> generation_suite() {
    std::vector<BinaryMask> shapes;
    shapes.push_back(centered_square(128, 24));
    shapes.push_back(centered_square(128, 40));
    shapes.push_back(centered_square(128, 64));
    shapes.push_back(rect(128, 128, 20, 30, 60, 100));
    shapes.push_back(disk(128, 128, 64, 64, 18));
    shapes.push_back(disk(128, 128, 48, 70, 30));
    shapes.push_back(l_shape(128, 16, 30, 30));
    shapes.push_back(l_shape(128, 24, 20, 20));
    shapes.push_back(l_shape(128, 30, 25, 25));
    shapes.push_back(ring(128, 128, 64, 64, 28, 16));
    shapes.push_back(ring(128, 128, 64, 64, 40, 30));
    shapes.push_back(rect(128, 128, 20, 58, 108, 70));  // horizontal bar
    shapes.push_back(rect(128, 128, 58, 16, 70, 112));  // vertical bar
    shapes.push_back(rect(128, 128, 30, 60, 100, 68));  // thin bar
    shapes.push_back(plus_shape(128, 40, 10));
    shapes.push_back(plus_shape(128, 30, 8));
    shapes.push_back(plus_shape(128, 45, 12));
    shapes.push_back(comb(128, 4, 60, 8, 30, 30));
    shapes.push_back(comb(128, 3, 70, 10, 25, 35));
    shapes.push_back(comb(128, 5, 50, 7, 35, 25));
    return shapes;
}

} // namespace fixtures
