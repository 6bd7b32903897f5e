#include <catch2/catch_amalgamated.hpp>

#include "contourkit/raster_ops.hpp"
#include "contourkit/rng.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace contourkit;

namespace {

BinaryMask random_mask(RngStream& rng, int w, int h, double density) {
    BinaryMask m(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (rng.uniform01() < density) m.set(x, y, true);
        }
    }
    return m;
}

/// A few random blobs away from the border (keeps dilation interior-safe).
BinaryMask random_blobs(RngStream& rng, int w, int h, int margin) {
    BinaryMask m(w, h);
    const int blobs = rng.uniform_int(1, 3);
    for (int b = 0; b < blobs; ++b) {
        const int cx = rng.uniform_int(margin, w - 1 - margin);
        const int cy = rng.uniform_int(margin, h - 1 - margin);
        const int r = rng.uniform_int(1, 3);
        for (int y = std::max(0, cy - r); y <= std::min(h - 1, cy + r); ++y) {
            for (int x = std::max(0, cx - r); x <= std::min(w - 1, cx + r); ++x) {
                m.set(x, y, true);
            }
        }
    }
    return m;
}

} // namespace

TEST_CASE("fill_holes closes enclosed background") {
    // 5x5 ring with a one-pixel hole
    BinaryMask ring = fixtures::rect(7, 7, 1, 1, 6, 6);
    ring.set(3, 3, false);
    const BinaryMask filled = fill_holes(ring);
    REQUIRE(filled == fixtures::rect(7, 7, 1, 1, 6, 6));

    const BinaryMask zeros(6, 6);
    REQUIRE(fill_holes(zeros) == zeros);
}

TEST_CASE("fill_holes keeps border-connected notches") {
    // solid block with a background notch reaching the mask (and image) border
    BinaryMask m = fixtures::rect(5, 5, 0, 0, 5, 5);
    m.set(2, 0, false);
    m.set(2, 1, false);
    REQUIRE(fill_holes(m) == m);
}

TEST_CASE("fill_holes matches the border-flood oracle") {
    RngStream rng(71);
    for (int trial = 0; trial < 300; ++trial) {
        const BinaryMask m = random_mask(rng, 14, 11, 0.55);
        REQUIRE(fill_holes(m) == oracles::fill_holes(m));
    }
}

TEST_CASE("morph_transform frozen examples") {
    BinaryMask single(7, 7);
    single.set(3, 3, true);
    const BinaryMask plus = morph_transform(single, MorphKind::dilate, 3);
    REQUIRE(plus.count() == 5);
    REQUIRE(plus.get(3, 3));
    REQUIRE(plus.get(2, 3));
    REQUIRE(plus.get(4, 3));
    REQUIRE(plus.get(3, 2));
    REQUIRE(plus.get(3, 4));

    const BinaryMask block = fixtures::rect(5, 5, 1, 1, 4, 4);
    REQUIRE(morph_transform(block, MorphKind::dilate, 1) == block);
    REQUIRE(morph_transform(block, MorphKind::erode, 1) == block);

    const BinaryMask eroded = morph_transform(block, MorphKind::erode, 3);
    REQUIRE(eroded.count() == 1);
    REQUIRE(eroded.get(2, 2));

    REQUIRE_THROWS_AS(morph_transform(block, MorphKind::dilate, 4), MaskError);
}

TEST_CASE("morphology matches the structuring-element sweep") {
    RngStream rng(1001);
    for (int trial = 0; trial < 120; ++trial) {
        const BinaryMask m = random_mask(rng, 24, 18, 0.25);
        for (int kernel : {3, 5, 7}) {
            REQUIRE(morph_transform(m, MorphKind::dilate, kernel) == oracles::dilate(m, kernel));
            REQUIRE(morph_transform(m, MorphKind::erode, kernel) == oracles::erode(m, kernel));
        }
    }
}

TEST_CASE("closing covers the input on interior-safe masks") {
    RngStream rng(4242);
    for (int trial = 0; trial < 150; ++trial) {
        for (int kernel : {3, 5}) {
            const int margin = (kernel - 1) / 2 + 1;
            const BinaryMask m = random_blobs(rng, 24, 24, margin + 3);
            const BinaryMask closed =
                morph_transform(morph_transform(m, MorphKind::dilate, kernel),
                                MorphKind::erode, kernel);
            REQUIRE(mask_subtract(m, closed).empty()); // erode(dilate(m)) >= m
        }
    }
}

TEST_CASE("largest_component selection and ties") {
    // blobs of 10 and 7 pixels
    BinaryMask m(20, 10);
    for (int x = 2; x < 7; ++x) {
        m.set(x, 2, true);
        m.set(x, 3, true); // 10 px
    }
    for (int x = 12; x < 19; ++x) m.set(x, 6, true); // 7 px
    const BinaryMask kept = largest_component(m);
    REQUIRE(kept.count() == 10);
    REQUIRE(kept.get(2, 2));
    REQUIRE_FALSE(kept.get(12, 6));

    const BinaryMask single = fixtures::disk(16, 16, 8, 8, 4);
    REQUIRE(largest_component(single) == single);

    // equal-size blobs; the one whose bbox (y0, x0) is smaller wins
    BinaryMask tie(12, 12);
    tie.set(0, 0, true);
    tie.set(1, 0, true);
    tie.set(5, 5, true);
    tie.set(6, 5, true);
    const BinaryMask tied = largest_component(tie);
    REQUIRE(tied.count() == 2);
    REQUIRE(tied.get(0, 0));

    REQUIRE(largest_component(BinaryMask(4, 4)).empty());
}

TEST_CASE("largest_component matches the BFS oracle and is one component") {
    RngStream rng(99);
    for (int trial = 0; trial < 250; ++trial) {
        const BinaryMask m = random_mask(rng, 16, 16, 0.35);
        const BinaryMask kept = largest_component(m);
        REQUIRE(kept == oracles::largest_component(m));
        if (!kept.empty()) {
            REQUIRE(oracles::components(kept).size() == 1);
        }
    }
}

TEST_CASE("component_count agrees with the oracle") {
    RngStream rng(123);
    for (int trial = 0; trial < 250; ++trial) {
        const BinaryMask m = random_mask(rng, 14, 14, 0.3);
        REQUIRE(component_count(m) == static_cast<int>(oracles::components(m).size()));
    }
}

TEST_CASE("gaussian_smooth frozen examples") {
    const BinaryMask ones = fixtures::rect(9, 9, 0, 0, 9, 9);
    REQUIRE(gaussian_smooth(ones, 5) == ones);
    REQUIRE(gaussian_smooth(ones, 9) == ones);

    const BinaryMask block = fixtures::rect(9, 9, 2, 2, 7, 7);
    REQUIRE(gaussian_smooth(block, 1) == block);

    BinaryMask lone(21, 21);
    lone.set(10, 10, true);
    REQUIRE(gaussian_smooth(lone, 9).empty()); // peak response < 0.5

    REQUIRE_THROWS_AS(gaussian_smooth(block, 2), MaskError);
}

TEST_CASE("gaussian_smooth matches direct 2D convolution") {
    RngStream rng(2024);
    for (int trial = 0; trial < 60; ++trial) {
        const BinaryMask m = random_mask(rng, 24, 17, 0.45);
        for (int kernel : {3, 5, 9}) {
            REQUIRE(gaussian_smooth(m, kernel) == oracles::gaussian_smooth(m, kernel));
        }
    }
}

TEST_CASE("scale_about_centroid frozen examples") {
    const BinaryMask sq = fixtures::centered_square(100, 10);
    REQUIRE(scale_about_centroid(sq, 1.0) == sq);

    const BinaryMask up = scale_about_centroid(sq, 2.0);
    const BoundingBox ub = up.bounding_box();
    REQUIRE(ub.width() == 20);
    REQUIRE(ub.height() == 20);
    REQUIRE(up == oracles::scale_about_centroid(sq, 2.0));

    const BinaryMask down = scale_about_centroid(sq, 0.5);
    const BoundingBox db = down.bounding_box();
    REQUIRE(db.width() == 5);
    REQUIRE(db.height() == 5);
    REQUIRE(down == oracles::scale_about_centroid(sq, 0.5));

    REQUIRE_THROWS_AS(scale_about_centroid(sq, 0.0), MaskError);
}

TEST_CASE("scale_about_centroid matches the inverse-map oracle") {
    RngStream rng(31);
    for (int trial = 0; trial < 120; ++trial) {
        const BinaryMask m = random_blobs(rng, 28, 28, 6);
        const double factor = rng.uniform(0.5, 1.8);
        REQUIRE(scale_about_centroid(m, factor) == oracles::scale_about_centroid(m, factor));
    }
}

TEST_CASE("convexity_ratio examples") {
    const BinaryMask rect_mask = fixtures::rect(40, 40, 5, 8, 30, 25);
    REQUIRE(convexity_ratio(rect_mask) == 1.0);

    // L-shape: 3 quadrants of a 2N x 2N square -> 3/3.5 for large N
    const BinaryMask l = fixtures::l_shape(80, 32, 4, 4);
    REQUIRE(convexity_ratio(l) == Catch::Approx(3.0 / 3.5).margin(0.02));

    const BinaryMask plus = fixtures::plus_shape(64, 24, 6);
    REQUIRE(convexity_ratio(plus) < 0.6);

    REQUIRE_THROWS_AS(convexity_ratio(BinaryMask(5, 5)), MaskError);
}

TEST_CASE("convexity_ratio stays in (0,1] and tracks the gift-wrap oracle") {
    RngStream rng(555);
    for (int trial = 0; trial < 60; ++trial) {
        const BinaryMask m = random_blobs(rng, 26, 26, 4);
        if (m.empty()) continue;
        const double r = convexity_ratio(m);
        REQUIRE(r > 0.0);
        REQUIRE(r <= 1.0);
        REQUIRE(r == Catch::Approx(oracles::convexity_ratio(m)).margin(0.02));
    }
}

TEST_CASE("convexity_ratio is 1 on rasterized convex shapes") {
    for (double radius : {5.0, 9.0, 14.5}) {
        const BinaryMask d = fixtures::disk(48, 48, 24.0, 24.0, radius);
        REQUIRE(std::abs(convexity_ratio(d) - 1.0) <= 0.02);
    }
}

TEST_CASE("trace_boundary frozen examples") {
    // 3x3 block: 8 boundary pixels in clockwise order from topmost-leftmost
    const BinaryMask block = fixtures::rect(10, 10, 4, 4, 7, 7);
    const ContourPolygon poly = trace_boundary(block);
    REQUIRE(poly.vertices.size() == 8);
    REQUIRE(poly.vertices[0].x == Catch::Approx(4.5 / 10.0));
    REQUIRE(poly.vertices[0].y == Catch::Approx(4.5 / 10.0));
    REQUIRE(poly.vertices[1].x == Catch::Approx(5.5 / 10.0)); // clockwise: first move east
    const std::vector<std::pair<int, int>> expected = {{4, 4}, {5, 4}, {6, 4}, {6, 5},
                                                       {6, 6}, {5, 6}, {4, 6}, {4, 5}};
    for (std::size_t i = 0; i < expected.size(); ++i) {
        REQUIRE(poly.vertices[i].x == Catch::Approx((expected[i].first + 0.5) / 10.0));
        REQUIRE(poly.vertices[i].y == Catch::Approx((expected[i].second + 0.5) / 10.0));
    }

    BinaryMask single(8, 8);
    single.set(3, 3, true);
    REQUIRE(trace_boundary(single).vertices.size() == 1);

    const BinaryMask line = fixtures::rect(9, 9, 2, 4, 7, 5); // 1x5 run
    REQUIRE(trace_boundary(line).vertices.size() == 5);

    BinaryMask multi(8, 8);
    multi.set(1, 1, true);
    multi.set(6, 6, true);
    REQUIRE_THROWS_AS(trace_boundary(multi), MaskError);
    REQUIRE_THROWS_AS(trace_boundary(BinaryMask(4, 4)), MaskError);
}

TEST_CASE("trace_boundary covers every border pixel of blobs") {
    RngStream rng(808);
    for (int trial = 0; trial < 60; ++trial) {
        // hole-free single component: the trace covers the full outer boundary
        BinaryMask m = fill_holes(largest_component(random_blobs(rng, 24, 24, 5)));
        if (m.empty()) continue;
        const ContourPolygon poly = trace_boundary(m);
        // every traced vertex is a foreground pixel center
        for (const Point& v : poly.vertices) {
            const int x = static_cast<int>(v.x * 24.0);
            const int y = static_cast<int>(v.y * 24.0);
            REQUIRE(m.get(x, y));
        }
        // every 4-boundary pixel appears in the trace
        std::size_t boundary_count = 0;
        for (int y = 0; y < 24; ++y) {
            for (int x = 0; x < 24; ++x) {
                if (!m.get(x, y)) continue;
                const bool boundary = x == 0 || y == 0 || x == 23 || y == 23 ||
                                      !m.get(x - 1, y) || !m.get(x + 1, y) ||
                                      !m.get(x, y - 1) || !m.get(x, y + 1);
                if (!boundary) continue;
                ++boundary_count;
                bool found = false;
                for (const Point& v : poly.vertices) {
                    if (static_cast<int>(v.x * 24.0) == x && static_cast<int>(v.y * 24.0) == y) {
                        found = true;
                        break;
                    }
                }
                REQUIRE(found);
            }
        }
        REQUIRE(poly.vertices.size() >= boundary_count);
    }
}
