// Brute-force reference implementations used as independent oracles. These
// deliberately share no code with the library: flood fills use explicit
// queues, morphology sweeps the structuring element, rasterization tests every
// pixel center with the classic pnpoly ray cast.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <vector>

#include "contourkit/mask.hpp"
#include "contourkit/polygon.hpp"

namespace oracles {

using contourkit::BinaryMask;
using contourkit::Point;

inline double iou(const BinaryMask& a, const BinaryMask& b) {
    std::int64_t inter = 0, uni = 0;
    for (int y = 0; y < a.height(); ++y) {
        for (int x = 0; x < a.width(); ++x) {
            const bool pa = a.get(x, y);
            const bool pb = b.get(x, y);
            inter += pa && pb;
            uni += pa || pb;
        }
    }
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

/// W. Randolph Franklin's pnpoly: counts crossings strictly right of the point.
inline bool point_in_polygon(double px, double py, const std::vector<Point>& poly) {
    bool inside = false;
    const std::size_t n = poly.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        if ((poly[i].y > py) != (poly[j].y > py) &&
            px < (poly[j].x - poly[i].x) * (py - poly[i].y) / (poly[j].y - poly[i].y) +
                     poly[i].x) {
            inside = !inside;
        }
    }
    return inside;
}

inline BinaryMask rasterize(const std::vector<Point>& poly_px, int w, int h) {
    BinaryMask out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (point_in_polygon(x + 0.5, y + 0.5, poly_px)) out.set(x, y, true);
        }
    }
    return out;
}

inline BinaryMask fill_holes(const BinaryMask& m) {
    const int w = m.width();
    const int h = m.height();
    std::vector<std::uint8_t> outside(static_cast<std::size_t>(w) * h, 0);
    std::deque<std::pair<int, int>> queue;
    for (int x = 0; x < w; ++x) {
        for (int y : {0, h - 1}) {
            if (!m.get(x, y) && !outside[static_cast<std::size_t>(y) * w + x]) {
                outside[static_cast<std::size_t>(y) * w + x] = 1;
                queue.emplace_back(x, y);
            }
        }
    }
    for (int y = 0; y < h; ++y) {
        for (int x : {0, w - 1}) {
            if (!m.get(x, y) && !outside[static_cast<std::size_t>(y) * w + x]) {
                outside[static_cast<std::size_t>(y) * w + x] = 1;
                queue.emplace_back(x, y);
            }
        }
    }
    const int dx4[4] = {1, -1, 0, 0};
    const int dy4[4] = {0, 0, 1, -1};
    while (!queue.empty()) {
        const auto [x, y] = queue.front();
        queue.pop_front();
        for (int k = 0; k < 4; ++k) {
            const int nx = x + dx4[k];
            const int ny = y + dy4[k];
            if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
            if (m.get(nx, ny) || outside[static_cast<std::size_t>(ny) * w + nx]) continue;
            outside[static_cast<std::size_t>(ny) * w + nx] = 1;
            queue.emplace_back(nx, ny);
        }
    }
    BinaryMask out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (m.get(x, y) || !outside[static_cast<std::size_t>(y) * w + x]) out.set(x, y, true);
        }
    }
    return out;
}

/// Structuring element sweep; offsets with dx^2 + dy^2 <= r^2, outside the
/// frame counting as background.
inline BinaryMask dilate(const BinaryMask& m, int kernel) {
    const int r = (kernel - 1) / 2;
    BinaryMask out(m.width(), m.height());
    for (int y = 0; y < m.height(); ++y) {
        for (int x = 0; x < m.width(); ++x) {
            bool hit = false;
            for (int dy = -r; dy <= r && !hit; ++dy) {
                for (int dx = -r; dx <= r && !hit; ++dx) {
                    if (dx * dx + dy * dy > r * r) continue;
                    const int sx = x + dx;
                    const int sy = y + dy;
                    if (sx >= 0 && sx < m.width() && sy >= 0 && sy < m.height() &&
                        m.get(sx, sy)) {
                        hit = true;
                    }
                }
            }
            if (hit) out.set(x, y, true);
        }
    }
    return out;
}

inline BinaryMask erode(const BinaryMask& m, int kernel) {
    const int r = (kernel - 1) / 2;
    BinaryMask out(m.width(), m.height());
    for (int y = 0; y < m.height(); ++y) {
        for (int x = 0; x < m.width(); ++x) {
            if (!m.get(x, y)) continue;
            bool all = true;
            for (int dy = -r; dy <= r && all; ++dy) {
                for (int dx = -r; dx <= r && all; ++dx) {
                    if (dx * dx + dy * dy > r * r) continue;
                    const int sx = x + dx;
                    const int sy = y + dy;
                    if (sx < 0 || sx >= m.width() || sy < 0 || sy >= m.height() ||
                        !m.get(sx, sy)) {
                        all = false;
                    }
                }
            }
            if (all) out.set(x, y, true);
        }
    }
    return out;
}

struct Component {
    std::vector<std::pair<int, int>> pixels;
    int min_y = std::numeric_limits<int>::max();
    int min_x = std::numeric_limits<int>::max();
};

/// 8-connected components by BFS.
inline std::vector<Component> components(const BinaryMask& m) {
    const int w = m.width();
    const int h = m.height();
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(w) * h, 0);
    std::vector<Component> out;
    for (int y0 = 0; y0 < h; ++y0) {
        for (int x0 = 0; x0 < w; ++x0) {
            if (!m.get(x0, y0) || seen[static_cast<std::size_t>(y0) * w + x0]) continue;
            Component comp;
            std::deque<std::pair<int, int>> queue{{x0, y0}};
            seen[static_cast<std::size_t>(y0) * w + x0] = 1;
            while (!queue.empty()) {
                const auto [x, y] = queue.front();
                queue.pop_front();
                comp.pixels.emplace_back(x, y);
                comp.min_y = std::min(comp.min_y, y);
                comp.min_x = std::min(comp.min_x, x);
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dx == 0 && dy == 0) continue;
                        const int nx = x + dx;
                        const int ny = y + dy;
                        if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                        if (!m.get(nx, ny) || seen[static_cast<std::size_t>(ny) * w + nx]) continue;
                        seen[static_cast<std::size_t>(ny) * w + nx] = 1;
                        queue.emplace_back(nx, ny);
                    }
                }
            }
            out.push_back(std::move(comp));
        }
    }
    return out;
}

inline BinaryMask largest_component(const BinaryMask& m) {
    const std::vector<Component> comps = oracles::components(m);
    BinaryMask out(m.width(), m.height());
    if (comps.empty()) return out;
    const Component* best = &comps[0];
    for (const Component& c : comps) {
        if (c.pixels.size() > best->pixels.size() ||
            (c.pixels.size() == best->pixels.size() &&
             (c.min_y < best->min_y || (c.min_y == best->min_y && c.min_x < best->min_x)))) {
            best = &c;
        }
    }
    for (const auto& [x, y] : best->pixels) out.set(x, y, true);
    return out;
}

inline int reflect101(int i, int n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * (n - 1) - i;
    }
    return i;
}

/// Direct (non-separable) 2D convolution with the same ksize-derived Gaussian
/// and reflect-101 border, thresholded at 0.5.
inline BinaryMask gaussian_smooth(const BinaryMask& m, int kernel) {
    const double sigma = 0.3 * ((kernel - 1) * 0.5 - 1.0) + 0.8;
    const int r = (kernel - 1) / 2;
    std::vector<double> k1(kernel);
    double sum = 0.0;
    for (int i = -r; i <= r; ++i) {
        k1[i + r] = std::exp(-static_cast<double>(i) * i / (2.0 * sigma * sigma));
        sum += k1[i + r];
    }
    for (double& v : k1) v /= sum;
    BinaryMask out(m.width(), m.height());
    for (int y = 0; y < m.height(); ++y) {
        for (int x = 0; x < m.width(); ++x) {
            double acc = 0.0;
            for (int dy = -r; dy <= r; ++dy) {
                for (int dx = -r; dx <= r; ++dx) {
                    const int sx = reflect101(x + dx, m.width());
                    const int sy = reflect101(y + dy, m.height());
                    if (m.get(sx, sy)) acc += k1[dx + r] * k1[dy + r];
                }
            }
            if (acc >= 0.5) out.set(x, y, true);
        }
    }
    return out;
}

/// Independent nearest-neighbor rescale about the foreground centroid.
inline BinaryMask scale_about_centroid(const BinaryMask& m, double factor) {
    double sx = 0.0, sy = 0.0;
    std::int64_t n = 0;
    for (int y = 0; y < m.height(); ++y) {
        for (int x = 0; x < m.width(); ++x) {
            if (m.get(x, y)) {
                sx += x + 0.5;
                sy += y + 0.5;
                ++n;
            }
        }
    }
    BinaryMask out(m.width(), m.height());
    if (n == 0) return out;
    const double cx = sx / n;
    const double cy = sy / n;
    for (int y = 0; y < m.height(); ++y) {
        for (int x = 0; x < m.width(); ++x) {
            const double ux = cx + (x + 0.5 - cx) / factor;
            const double uy = cy + (y + 0.5 - cy) / factor;
            const int ix = static_cast<int>(std::floor(ux));
            const int iy = static_cast<int>(std::floor(uy));
            if (ix >= 0 && ix < m.width() && iy >= 0 && iy < m.height() && m.get(ix, iy)) {
                out.set(x, y, true);
            }
        }
    }
    return out;
}

/// O(n * sites) exact squared distances to the nearest site pixel.
inline std::vector<std::int64_t> squared_edt(int w, int h, const std::vector<std::uint8_t>& site) {
    std::vector<std::pair<int, int>> sites;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (site[static_cast<std::size_t>(y) * w + x]) sites.emplace_back(x, y);
        }
    }
    std::vector<std::int64_t> out(static_cast<std::size_t>(w) * h,
                                  std::numeric_limits<std::int64_t>::max() / 4);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            std::int64_t best = std::numeric_limits<std::int64_t>::max() / 4;
            for (const auto& [sx, sy] : sites) {
                const std::int64_t dx = x - sx;
                const std::int64_t dy = y - sy;
                best = std::min(best, dx * dx + dy * dy);
            }
            out[static_cast<std::size_t>(y) * w + x] = best;
        }
    }
    return out;
}

/// Convex hull by gift wrapping (independent of the monotone chain), then
/// half-plane rasterization over pixel centers, unioned with the mask.
inline double convexity_ratio(const BinaryMask& m) {
    std::vector<Point> pts;
    for (int y = 0; y < m.height(); ++y) {
        for (int x = 0; x < m.width(); ++x) {
            if (m.get(x, y)) pts.push_back({x + 0.5, y + 0.5});
        }
    }
    const double area = static_cast<double>(pts.size());
    // gift wrapping
    std::size_t start = 0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (pts[i].x < pts[start].x || (pts[i].x == pts[start].x && pts[i].y < pts[start].y)) {
            start = i;
        }
    }
    std::vector<Point> hull;
    std::size_t current = start;
    do {
        hull.push_back(pts[current]);
        std::size_t next = (current + 1) % pts.size();
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const double cross = (pts[next].x - pts[current].x) * (pts[i].y - pts[current].y) -
                                 (pts[next].y - pts[current].y) * (pts[i].x - pts[current].x);
            if (cross < 0.0) next = i;
        }
        current = next;
        if (hull.size() > pts.size() + 1) break;
    } while (current != start);

    // rasterize with the same pixel-center rule as polygon fills (pnpoly),
    // then union with the mask
    std::int64_t hull_count = 0;
    for (int y = 0; y < m.height(); ++y) {
        for (int x = 0; x < m.width(); ++x) {
            if (m.get(x, y)) {
                ++hull_count;
                continue;
            }
            if (hull.size() < 3) continue;
            if (point_in_polygon(x + 0.5, y + 0.5, hull)) ++hull_count;
        }
    }
    return area / static_cast<double>(hull_count);
}

} // namespace oracles
