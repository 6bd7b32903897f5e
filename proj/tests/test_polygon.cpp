#include <catch2/catch_amalgamated.hpp>

#include "contourkit/polygon.hpp"
#include "contourkit/rng.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace contourkit;

namespace {

ContourPolygon random_polygon(RngStream& rng, int max_vertices) {
    ContourPolygon p;
    const int n = rng.uniform_int(3, max_vertices);
    for (int i = 0; i < n; ++i) {
        p.vertices.push_back({rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)});
    }
    return p;
}

} // namespace

TEST_CASE("close_contour appends the first vertex once") {
    ContourPolygon open;
    open.vertices = {{0.1, 0.1}, {0.8, 0.2}, {0.5, 0.9}};
    const ContourPolygon closed = close_contour(open);
    REQUIRE(closed.vertices.size() == 4);
    REQUIRE(closed.vertices.back() == closed.vertices.front());

    REQUIRE(close_contour(closed).vertices.size() == 4); // idempotent

    ContourPolygon degenerate;
    degenerate.vertices = {{0.5, 0.5}};
    REQUIRE_THROWS_AS(close_contour(degenerate), MaskError);
}

TEST_CASE("close is idempotent on random polylines") {
    RngStream rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        const ContourPolygon p = random_polygon(rng, 12);
        const ContourPolygon once = close_contour(p);
        const ContourPolygon twice = close_contour(once);
        REQUIRE(once.vertices == twice.vertices);
    }
}

TEST_CASE("rasterize_polygon frozen examples") {
    // normalized square (0.1,0.1)-(0.9,0.9) on 10x10 fills rows/cols 1..8
    const RasterResult r =
        rasterize_polygon(fixtures::square_polygon(0.1, 0.1, 0.9, 0.9), 10, 10);
    REQUIRE_FALSE(r.degenerate);
    REQUIRE(r.mask == fixtures::rect(10, 10, 1, 1, 9, 9));

    // triangle covering half the unit square
    ContourPolygon tri;
    tri.vertices = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
    const RasterResult tr = rasterize_polygon(tri, 100, 100);
    REQUIRE(tr.mask.count() == Catch::Approx(5000).margin(100));
    std::vector<Point> tri_px;
    for (const Point& p : tri.vertices) tri_px.push_back({p.x * 100, p.y * 100});
    REQUIRE(tr.mask == oracles::rasterize(tri_px, 100, 100));

    // fully outside the unit square
    const RasterResult out =
        rasterize_polygon(fixtures::square_polygon(1.5, 1.5, 2.0, 2.0), 16, 16);
    REQUIRE(out.mask.empty());
    REQUIRE_FALSE(out.degenerate);

    // zero-area polygon is flagged
    ContourPolygon flat;
    flat.vertices = {{0.1, 0.5}, {0.9, 0.5}, {0.5, 0.5}};
    const RasterResult fr = rasterize_polygon(flat, 16, 16);
    REQUIRE(fr.degenerate);
    REQUIRE(fr.mask.empty());
}

TEST_CASE("rasterize_polygon agrees with the point-in-polygon oracle") {
    RngStream rng(300);
    for (int trial = 0; trial < 80; ++trial) {
        const ContourPolygon poly = random_polygon(rng, 10);
        const RasterResult r = rasterize_polygon(poly, 64, 64);
        std::vector<Point> px;
        for (const Point& p : poly.vertices) px.push_back({p.x * 64, p.y * 64});
        REQUIRE(r.mask == oracles::rasterize(px, 64, 64));
    }
}

TEST_CASE("convex_hull on simple sets") {
    const std::vector<Point> square = {{0, 0}, {4, 0}, {4, 4}, {0, 4}, {2, 2}, {1, 3}};
    const std::vector<Point> hull = convex_hull(square);
    REQUIRE(hull.size() == 4);

    const std::vector<Point> collinear = {{0, 0}, {1, 1}, {2, 2}, {3, 3}};
    REQUIRE(convex_hull(collinear).size() == 2);
}

TEST_CASE("draw_polyline frozen examples") {
    // 2-vertex horizontal segment, width 1: a single-row run
    ContourPolygon seg;
    seg.vertices = {{2.5 / 16.0, 5.5 / 16.0}, {11.5 / 16.0, 5.5 / 16.0}};
    const BinaryMask line = draw_polyline(seg, 1, 16, 16, false);
    REQUIRE(line == fixtures::rect(16, 16, 2, 5, 12, 6));

    // single vertex: disk of the line-width diameter
    ContourPolygon dot;
    dot.vertices = {{0.5, 0.5}};
    const BinaryMask disk5 = draw_polyline(dot, 5, 16, 16, false);
    REQUIRE(disk5 == fixtures::disk(16, 16, 8.0, 8.0, 2.5));

    // closed square path, width 3: hollow frame, interior hole preserved
    const BinaryMask frame =
        draw_polyline(fixtures::square_polygon(4.0 / 32, 4.0 / 32, 28.0 / 32, 28.0 / 32), 3,
                      32, 32, true);
    REQUIRE(frame.get(4, 4));
    REQUIRE(frame.get(16, 4));   // on the top edge
    REQUIRE_FALSE(frame.get(16, 16)); // interior stays empty
    REQUIRE_FALSE(frame.get(16, 8));  // 2.5 px inside the edge
    REQUIRE(frame.get(16, 5));        // within 1.5 px of the edge

    REQUIRE_THROWS_AS(draw_polyline(seg, 0, 16, 16, false), MaskError);
}

TEST_CASE("draw_polyline matches the distance-to-segment rule") {
    RngStream rng(900);
    for (int trial = 0; trial < 40; ++trial) {
        ContourPolygon poly = random_polygon(rng, 6);
        const int width = rng.uniform_int(1, 6);
        const bool close = rng.coin();
        const BinaryMask line = draw_polyline(poly, width, 32, 32, close);

        std::vector<Point> px;
        for (const Point& p : poly.vertices) px.push_back({p.x * 32, p.y * 32});
        std::vector<std::pair<Point, Point>> segments;
        for (std::size_t i = 0; i + 1 < px.size(); ++i) segments.push_back({px[i], px[i + 1]});
        if (close) segments.push_back({px.back(), px.front()});

        auto dist_seg = [](double x, double y, const Point& a, const Point& b) {
            const double vx = b.x - a.x, vy = b.y - a.y;
            const double len2 = vx * vx + vy * vy;
            double t = len2 > 0 ? ((x - a.x) * vx + (y - a.y) * vy) / len2 : 0.0;
            t = std::clamp(t, 0.0, 1.0);
            const double dx = x - (a.x + t * vx), dy = y - (a.y + t * vy);
            return std::sqrt(dx * dx + dy * dy);
        };
        for (int y = 0; y < 32; ++y) {
            for (int x = 0; x < 32; ++x) {
                double d = 1e30;
                for (const auto& [a, b] : segments) d = std::min(d, dist_seg(x + 0.5, y + 0.5, a, b));
                REQUIRE(line.get(x, y) == (d <= width / 2.0));
            }
        }
    }
}
