#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "contourkit/mask.hpp"

namespace contourkit {

struct Point {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Point&) const = default;
};

/// Ordered vertex list in normalized [0,1] image coordinates. The dataset's
/// native contour representation; also used (in pixel units) internally for
/// hull rasterization.
struct ContourPolygon {
    std::vector<Point> vertices;

    bool closed() const {
        return vertices.size() >= 2 && vertices.front() == vertices.back();
    }
};

/// Removes consecutive duplicate vertices (keeps a trailing closing vertex
/// only if it still differs from its predecessor).
inline std::vector<Point> dedup_consecutive(const std::vector<Point>& vs) {
    std::vector<Point> out;
    out.reserve(vs.size());
    for (const Point& p : vs) {
        if (out.empty() || !(out.back() == p)) out.push_back(p);
    }
    return out;
}

/// Appends the first vertex when the polyline is open. Idempotent.
inline ContourPolygon close_contour(const ContourPolygon& poly) {
    if (poly.vertices.size() < 2) {
        throw MaskError("degenerate contour: fewer than 2 vertices");
    }
    ContourPolygon out = poly;
    if (!(out.vertices.front() == out.vertices.back())) {
        out.vertices.push_back(out.vertices.front());
    }
    return out;
}

namespace detail {

/// Twice the signed area (shoelace) of a closed polygon given as a cyclic
/// vertex list (no explicit closing vertex required).
inline double twice_signed_area(const std::vector<Point>& vs) {
    double a = 0.0;
    const std::size_t n = vs.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point& p = vs[i];
        const Point& q = vs[(i + 1) % n];
        a += p.x * q.y - q.x * p.y;
    }
    return a;
}

/// Cyclic vertex list in pixel units: drops an explicit closing vertex and
/// consecutive duplicates.
inline std::vector<Point> cyclic_vertices(const std::vector<Point>& vs) {
    std::vector<Point> out = dedup_consecutive(vs);
    if (out.size() >= 2 && out.front() == out.back()) out.pop_back();
    return out;
}

} // namespace detail

struct RasterResult {
    BinaryMask mask;
    bool degenerate = false;
};

/// Even-odd scanline fill of a polygon given in pixel coordinates. A pixel is
/// foreground iff its center (col+0.5, row+0.5) is inside: per row, a center is
/// inside when an odd number of edge crossings lie strictly to its right
/// (same convention as the classic pnpoly ray cast).
inline RasterResult rasterize_polygon_px(const std::vector<Point>& vertices_px,
                                         int width, int height) {
    if (width < 1 || height < 1) throw MaskError("raster dimensions must be at least 1x1");
    RasterResult result{BinaryMask(width, height), false};
    const std::vector<Point> vs = detail::cyclic_vertices(vertices_px);
    if (vs.size() < 3 || detail::twice_signed_area(vs) == 0.0) {
        result.degenerate = true;
        return result;
    }

    double ymin = vs[0].y, ymax = vs[0].y;
    for (const Point& p : vs) {
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    const int row_lo = std::max(0, static_cast<int>(std::floor(ymin - 0.5)));
    const int row_hi = std::min(height - 1, static_cast<int>(std::ceil(ymax)));

    std::vector<double> crossings;
    for (int row = row_lo; row <= row_hi; ++row) {
        const double yc = row + 0.5;
        crossings.clear();
        for (std::size_t i = 0; i < vs.size(); ++i) {
            const Point& a = vs[i];
            const Point& b = vs[(i + 1) % vs.size()];
            if ((a.y > yc) == (b.y > yc)) continue;
            crossings.push_back(a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y));
        }
        if (crossings.empty()) continue;
        std::sort(crossings.begin(), crossings.end());
        // Walk columns; a center is inside iff an odd number of crossings
        // remain strictly to its right.
        std::size_t consumed = 0;
        for (int col = 0; col < width; ++col) {
            const double xc = col + 0.5;
            while (consumed < crossings.size() && crossings[consumed] <= xc) ++consumed;
            if ((crossings.size() - consumed) % 2 == 1) result.mask.set(col, row, true);
        }
    }
    return result;
}

/// Fill of a contour in normalized coordinates: vertex (x, y) maps to pixel
/// point (x*width, y*height).
inline RasterResult rasterize_polygon(const ContourPolygon& poly, int width, int height) {
    std::vector<Point> px;
    px.reserve(poly.vertices.size());
    for (const Point& p : poly.vertices) px.push_back({p.x * width, p.y * height});
    return rasterize_polygon_px(px, width, height);
}

/// Convex hull (Andrew's monotone chain) of a point set, counter-clockwise in
/// y-down coordinates. Collinear inputs yield a 2-point chain.
inline std::vector<Point> convex_hull(std::vector<Point> pts) {
    std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    const std::size_t n = pts.size();
    if (n <= 2) return pts;

    auto cross = [](const Point& o, const Point& a, const Point& b) {
        return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    };
    std::vector<Point> hull(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    const std::size_t lower_end = k + 1;
    for (std::size_t i = n - 1; i-- > 0;) {
        while (k >= lower_end && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

namespace detail {

inline double dist_point_segment(double px, double py, const Point& a, const Point& b) {
    const double vx = b.x - a.x;
    const double vy = b.y - a.y;
    const double len2 = vx * vx + vy * vy;
    double t = 0.0;
    if (len2 > 0.0) {
        t = ((px - a.x) * vx + (py - a.y) * vy) / len2;
        t = std::clamp(t, 0.0, 1.0);
    }
    const double dx = px - (a.x + t * vx);
    const double dy = py - (a.y + t * vy);
    return std::sqrt(dx * dx + dy * dy);
}

inline void stamp_segment(BinaryMask& out, const Point& a, const Point& b, double radius) {
    const int x_lo = std::max(0, static_cast<int>(std::floor(std::min(a.x, b.x) - radius - 1.0)));
    const int x_hi = std::min(out.width() - 1,
                              static_cast<int>(std::ceil(std::max(a.x, b.x) + radius + 1.0)));
    const int y_lo = std::max(0, static_cast<int>(std::floor(std::min(a.y, b.y) - radius - 1.0)));
    const int y_hi = std::min(out.height() - 1,
                              static_cast<int>(std::ceil(std::max(a.y, b.y) + radius + 1.0)));
    for (int y = y_lo; y <= y_hi; ++y) {
        for (int x = x_lo; x <= x_hi; ++x) {
            if (dist_point_segment(x + 0.5, y + 0.5, a, b) <= radius) out.set(x, y, true);
        }
    }
}

} // namespace detail

/// Renders the polyline as pixels within line_width/2 of any segment (round
/// caps and joins). A single vertex stamps a disk of the line width's diameter.
inline BinaryMask draw_polyline(const ContourPolygon& poly, int line_width,
                                int width, int height, bool close) {
    if (line_width < 1) throw MaskError("line width must be at least 1");
    BinaryMask out(width, height);
    std::vector<Point> px;
    px.reserve(poly.vertices.size());
    for (const Point& p : poly.vertices) px.push_back({p.x * width, p.y * height});
    px = dedup_consecutive(px);
    if (px.empty()) return out;

    const double radius = line_width / 2.0;
    if (px.size() == 1) {
        detail::stamp_segment(out, px[0], px[0], radius);
        return out;
    }
    for (std::size_t i = 0; i + 1 < px.size(); ++i) {
        detail::stamp_segment(out, px[i], px[i + 1], radius);
    }
    if (close && !(px.back() == px.front())) {
        detail::stamp_segment(out, px.back(), px.front(), radius);
    }
    return out;
}

} // namespace contourkit
