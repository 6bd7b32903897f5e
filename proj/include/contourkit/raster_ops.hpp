#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <unordered_set>
#include <vector>

#include "contourkit/edt.hpp"
#include "contourkit/mask.hpp"
#include "contourkit/polygon.hpp"

namespace contourkit {

enum class MorphKind { dilate, erode };

/// Fills background regions not 4-connected to the image border. Foreground is
/// 8-connected, background 4-connected (the standard dual pair; anything else
/// lets holes leak through diagonal checkerboards).
inline BinaryMask fill_holes(const BinaryMask& mask) {
    if (mask.empty()) return mask;
    const BoundingBox box = mask.bounding_box();
    const int bw = box.width();
    const int bh = box.height();

    // Background outside the bbox is one border-connected region, so flooding
    // from the bbox ring is equivalent to flooding from the image border.
    std::vector<std::uint8_t> reached(static_cast<std::size_t>(bw) * bh, 0);
    std::vector<std::int32_t> stack;
    auto push = [&](int bx, int by) {
        const std::size_t i = static_cast<std::size_t>(by) * bw + bx;
        if (reached[i] || mask.get(box.x0 + bx, box.y0 + by)) return;
        reached[i] = 1;
        stack.push_back(static_cast<std::int32_t>(i));
    };
    for (int bx = 0; bx < bw; ++bx) {
        push(bx, 0);
        push(bx, bh - 1);
    }
    for (int by = 0; by < bh; ++by) {
        push(0, by);
        push(bw - 1, by);
    }
    while (!stack.empty()) {
        const std::int32_t i = stack.back();
        stack.pop_back();
        const int bx = i % bw;
        const int by = i / bw;
        if (bx > 0) push(bx - 1, by);
        if (bx + 1 < bw) push(bx + 1, by);
        if (by > 0) push(bx, by - 1);
        if (by + 1 < bh) push(bx, by + 1);
    }

    BinaryMask out = mask;
    for (int by = 0; by < bh; ++by) {
        for (int bx = 0; bx < bw; ++bx) {
            if (!reached[static_cast<std::size_t>(by) * bw + bx]) {
                out.set(box.x0 + bx, box.y0 + by, true);
            }
        }
    }
    return out;
}

/// Dilation/erosion with an elliptical (here circular) structuring element of
/// diameter kernel_size: offsets with dx^2+dy^2 <= r^2, r = (kernel_size-1)/2.
/// Computed as a threshold on the exact Euclidean distance transform, which is
/// identical to the brute-force sweep. Outside the frame counts as background,
/// so erosion shrinks masks touching the border.
inline BinaryMask morph_transform(const BinaryMask& mask, MorphKind kind, int kernel_size) {
    if (kernel_size < 1 || kernel_size % 2 == 0) {
        throw MaskError("morph kernel size must be odd and >= 1");
    }
    if (kernel_size == 1 || mask.empty()) return mask;
    const int r = (kernel_size - 1) / 2;
    const std::int64_t r2 = static_cast<std::int64_t>(r) * r;
    const BoundingBox box = mask.bounding_box();
    BinaryMask out(mask.width(), mask.height());

    if (kind == MorphKind::dilate) {
        // window = bbox grown by r, clipped to the frame; all sites lie inside
        const int wx0 = std::max(0, box.x0 - r);
        const int wy0 = std::max(0, box.y0 - r);
        const int wx1 = std::min(mask.width(), box.x1 + r);
        const int wy1 = std::min(mask.height(), box.y1 + r);
        const int ww = wx1 - wx0;
        const int wh = wy1 - wy0;
        std::vector<std::uint8_t> site(static_cast<std::size_t>(ww) * wh, 0);
        for (int y = box.y0; y < box.y1; ++y) {
            for (int x = box.x0; x < box.x1; ++x) {
                if (mask.get(x, y)) site[static_cast<std::size_t>(y - wy0) * ww + (x - wx0)] = 1;
            }
        }
        const std::vector<std::int64_t> dist = squared_edt(ww, wh, site.data());
        for (int y = 0; y < wh; ++y) {
            for (int x = 0; x < ww; ++x) {
                if (dist[static_cast<std::size_t>(y) * ww + x] <= r2) {
                    out.set(wx0 + x, wy0 + y, true);
                }
            }
        }
        return out;
    }

    // erosion: keep p iff the nearest complement pixel (frame exterior
    // included) is strictly beyond r. The window pads the bbox by r+1 without
    // clipping; exterior cells are complement sites.
    const int wx0 = box.x0 - (r + 1);
    const int wy0 = box.y0 - (r + 1);
    const int ww = box.width() + 2 * (r + 1);
    const int wh = box.height() + 2 * (r + 1);
    std::vector<std::uint8_t> site(static_cast<std::size_t>(ww) * wh, 0);
    for (int y = 0; y < wh; ++y) {
        for (int x = 0; x < ww; ++x) {
            const int gx = wx0 + x;
            const int gy = wy0 + y;
            const bool fg = gx >= 0 && gx < mask.width() && gy >= 0 && gy < mask.height() &&
                            mask.get(gx, gy);
            if (!fg) site[static_cast<std::size_t>(y) * ww + x] = 1;
        }
    }
    const std::vector<std::int64_t> dist = squared_edt(ww, wh, site.data());
    for (int y = box.y0; y < box.y1; ++y) {
        for (int x = box.x0; x < box.x1; ++x) {
            if (!mask.get(x, y)) continue;
            if (dist[static_cast<std::size_t>(y - wy0) * ww + (x - wx0)] > r2) {
                out.set(x, y, true);
            }
        }
    }
    return out;
}

namespace detail {

struct ComponentStats {
    std::int64_t area = 0;
    int min_y = std::numeric_limits<int>::max();
    int min_x = std::numeric_limits<int>::max();
};

/// 8-connected labeling of foreground pixels; returns per-pixel root ids (over
/// the mask bbox) plus stats per root. Run-based union-find.
class ComponentLabels {
public:
    explicit ComponentLabels(const BinaryMask& mask) : mask_(&mask) {
        if (mask.empty()) return;
        box_ = mask.bounding_box();
        const int bw = box_.width();
        const int bh = box_.height();
        labels_.assign(static_cast<std::size_t>(bw) * bh, -1);

        std::vector<std::pair<int, int>> prev_runs; // [x_begin, x_end) with labels
        std::vector<int> prev_ids;
        std::vector<std::pair<int, int>> runs;
        std::vector<int> ids;
        for (int y = box_.y0; y < box_.y1; ++y) {
            runs.clear();
            ids.clear();
            int x = box_.x0;
            while (x < box_.x1) {
                if (!mask.get(x, y)) {
                    ++x;
                    continue;
                }
                int e = x;
                while (e < box_.x1 && mask.get(e, y)) ++e;
                int id = -1;
                // 8-connectivity: overlap with previous-row runs widened by 1
                for (std::size_t i = 0; i < prev_runs.size(); ++i) {
                    if (prev_runs[i].second + 1 <= x || prev_runs[i].first - 1 >= e) continue;
                    if (id < 0) {
                        id = find(prev_ids[i]);
                    } else {
                        unite(id, prev_ids[i]);
                        id = find(id);
                    }
                }
                if (id < 0) {
                    id = static_cast<int>(parent_.size());
                    parent_.push_back(id);
                }
                runs.emplace_back(x, e);
                ids.push_back(id);
                for (int c = x; c < e; ++c) {
                    labels_[static_cast<std::size_t>(y - box_.y0) * bw + (c - box_.x0)] = id;
                }
                x = e;
            }
            prev_runs = runs;
            prev_ids = ids;
        }
        // flatten and collect stats
        for (int by = 0; by < bh; ++by) {
            for (int bx = 0; bx < bw; ++bx) {
                int& l = labels_[static_cast<std::size_t>(by) * bw + bx];
                if (l < 0) continue;
                l = find(l);
                if (static_cast<std::size_t>(l) >= stats_.size()) stats_.resize(l + 1);
                ComponentStats& s = stats_[l];
                s.area += 1;
                if (by + box_.y0 < s.min_y) s.min_y = by + box_.y0;
                if (bx + box_.x0 < s.min_x) s.min_x = bx + box_.x0;
            }
        }
    }

    bool empty() const { return labels_.empty(); }

    int count() const {
        int n = 0;
        for (const ComponentStats& s : stats_) {
            if (s.area > 0) ++n;
        }
        return n;
    }

    /// Root of the largest component; area ties broken by smallest
    /// (bbox min_y, bbox min_x).
    int largest_root() const {
        int best = -1;
        for (std::size_t i = 0; i < stats_.size(); ++i) {
            const ComponentStats& s = stats_[i];
            if (s.area == 0) continue;
            if (best < 0) {
                best = static_cast<int>(i);
                continue;
            }
            const ComponentStats& b = stats_[best];
            if (s.area > b.area ||
                (s.area == b.area &&
                 (s.min_y < b.min_y || (s.min_y == b.min_y && s.min_x < b.min_x)))) {
                best = static_cast<int>(i);
            }
        }
        return best;
    }

    BinaryMask extract(int root) const {
        BinaryMask out(mask_->width(), mask_->height());
        const int bw = box_.width();
        for (int by = 0; by < box_.height(); ++by) {
            for (int bx = 0; bx < bw; ++bx) {
                if (labels_[static_cast<std::size_t>(by) * bw + bx] == root) {
                    out.set(box_.x0 + bx, box_.y0 + by, true);
                }
            }
        }
        return out;
    }

    int root_limit() const { return static_cast<int>(stats_.size()); }

    const ComponentStats* stats(int root) const {
        if (root < 0 || static_cast<std::size_t>(root) >= stats_.size()) return nullptr;
        return &stats_[root];
    }

private:
    int find(int a) {
        while (parent_[a] != a) {
            parent_[a] = parent_[parent_[a]];
            a = parent_[a];
        }
        return a;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

    const BinaryMask* mask_;
    BoundingBox box_{};
    std::vector<int> labels_;
    std::vector<int> parent_;
    std::vector<ComponentStats> stats_;
};

} // namespace detail

inline int component_count(const BinaryMask& mask) {
    if (mask.empty()) return 0;
    return detail::ComponentLabels(mask).count();
}

/// All 8-connected foreground components as separate masks, ordered by
/// (bbox y0, bbox x0).
inline std::vector<BinaryMask> components(const BinaryMask& mask) {
    std::vector<BinaryMask> out;
    if (mask.empty()) return out;
    detail::ComponentLabels labels(mask);
    std::vector<std::pair<std::pair<int, int>, int>> roots;
    for (int r = 0; r < labels.root_limit(); ++r) {
        const auto* s = labels.stats(r);
        if (s && s->area > 0) roots.push_back({{s->min_y, s->min_x}, r});
    }
    std::sort(roots.begin(), roots.end());
    out.reserve(roots.size());
    for (const auto& [key, r] : roots) out.push_back(labels.extract(r));
    return out;
}

inline bool is_single_component(const BinaryMask& mask) {
    return component_count(mask) == 1;
}

/// Keeps only the 8-connected foreground component with the largest pixel
/// count; ties go to the component whose bbox (y0, x0) is lexicographically
/// smallest. Empty input returns empty output.
inline BinaryMask largest_component(const BinaryMask& mask) {
    if (mask.empty()) return mask;
    detail::ComponentLabels labels(mask);
    return labels.extract(labels.largest_root());
}

namespace detail {

/// Reflect-101 index fold: ... 2 1 | 0 1 2 ... n-1 | n-2 n-3 ...
inline int reflect101(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    i = std::abs(i) % period;
    return i < n ? i : period - i;
}

inline std::vector<double> gaussian_kernel(int kernel_size) {
    const double sigma = 0.3 * ((kernel_size - 1) * 0.5 - 1.0) + 0.8;
    const int r = (kernel_size - 1) / 2;
    std::vector<double> k(kernel_size);
    double sum = 0.0;
    for (int i = -r; i <= r; ++i) {
        k[i + r] = std::exp(-static_cast<double>(i) * i / (2.0 * sigma * sigma));
        sum += k[i + r];
    }
    for (double& v : k) v /= sum;
    return k;
}

} // namespace detail

/// Convolves the 0/1 raster with a normalized Gaussian (sigma derived from the
/// kernel size as in the classic ksize->sigma rule), reflect-101 borders, then
/// re-binarizes at 0.5.
inline BinaryMask gaussian_smooth(const BinaryMask& mask, int kernel_size) {
    if (kernel_size < 1 || kernel_size % 2 == 0) {
        throw MaskError("gaussian kernel size must be odd and >= 1");
    }
    if (kernel_size == 1 || mask.empty()) return mask;
    const std::vector<double> kernel = detail::gaussian_kernel(kernel_size);
    const int r = (kernel_size - 1) / 2;
    const int W = mask.width();
    const int H = mask.height();
    const BoundingBox box = mask.bounding_box();

    // Result support is bbox +- r; compute the horizontal pass on those
    // columns over vertically padded rows so the vertical pass reads only
    // in-frame rows it has.
    const int cx0 = std::max(0, box.x0 - r);
    const int cx1 = std::min(W, box.x1 + r);
    const int ry0 = std::max(0, box.y0 - 2 * r);
    const int ry1 = std::min(H, box.y1 + 2 * r);
    const int cw = cx1 - cx0;
    const int rh = ry1 - ry0;
    std::vector<double> hbuf(static_cast<std::size_t>(cw) * rh, 0.0);
    for (int y = ry0; y < ry1; ++y) {
        for (int x = cx0; x < cx1; ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i) {
                const int sx = detail::reflect101(x + i, W);
                if (mask.get(sx, y)) acc += kernel[i + r];
            }
            hbuf[static_cast<std::size_t>(y - ry0) * cw + (x - cx0)] = acc;
        }
    }

    BinaryMask out(W, H);
    const int oy0 = std::max(0, box.y0 - r);
    const int oy1 = std::min(H, box.y1 + r);
    for (int y = oy0; y < oy1; ++y) {
        for (int x = cx0; x < cx1; ++x) {
            double acc = 0.0;
            for (int j = -r; j <= r; ++j) {
                const int sy = detail::reflect101(y + j, H);
                acc += kernel[j + r] * hbuf[static_cast<std::size_t>(sy - ry0) * cw + (x - cx0)];
            }
            if (acc >= 0.5) out.set(x, y, true);
        }
    }
    return out;
}

/// Nearest-neighbor rescale of the foreground about its centroid (mean of
/// foreground pixel centers); clipped to the frame, dims unchanged. factor 1
/// is an exact identity.
inline BinaryMask scale_about_centroid(const BinaryMask& mask, double factor) {
    if (!(factor > 0.0)) throw MaskError("scale factor must be positive");
    if (factor == 1.0 || mask.empty()) return mask;

    std::int64_t sum_x = 0, sum_y = 0, n = 0;
    const BoundingBox box = mask.bounding_box();
    for (int y = box.y0; y < box.y1; ++y) {
        for (int x = box.x0; x < box.x1; ++x) {
            if (mask.get(x, y)) {
                sum_x += x;
                sum_y += y;
                ++n;
            }
        }
    }
    const double cx = static_cast<double>(sum_x) / static_cast<double>(n) + 0.5;
    const double cy = static_cast<double>(sum_y) / static_cast<double>(n) + 0.5;

    // output support: bbox corners scaled about the centroid
    const double ox0 = cx + (box.x0 - cx) * factor;
    const double ox1 = cx + (box.x1 - cx) * factor;
    const double oy0 = cy + (box.y0 - cy) * factor;
    const double oy1 = cy + (box.y1 - cy) * factor;
    const int wx0 = std::max(0, static_cast<int>(std::floor(ox0)) - 1);
    const int wx1 = std::min(mask.width(), static_cast<int>(std::ceil(ox1)) + 1);
    const int wy0 = std::max(0, static_cast<int>(std::floor(oy0)) - 1);
    const int wy1 = std::min(mask.height(), static_cast<int>(std::ceil(oy1)) + 1);

    BinaryMask out(mask.width(), mask.height());
    const double inv = 1.0 / factor;
    for (int y = wy0; y < wy1; ++y) {
        const double sy = cy + (y + 0.5 - cy) * inv;
        const int iy = static_cast<int>(std::floor(sy));
        if (iy < 0 || iy >= mask.height()) continue;
        for (int x = wx0; x < wx1; ++x) {
            const double sx = cx + (x + 0.5 - cx) * inv;
            const int ix = static_cast<int>(std::floor(sx));
            if (ix < 0 || ix >= mask.width()) continue;
            if (mask.get(ix, iy)) out.set(x, y, true);
        }
    }
    return out;
}

/// Foreground area divided by the area of its rasterized convex hull. The hull
/// is taken over foreground pixel centers and rasterized with the same
/// pixel-center rule as polygon fills; the union with the mask itself keeps
/// r <= 1 exact under boundary rounding.
inline double convexity_ratio(const BinaryMask& mask) {
    if (mask.empty()) throw MaskError("convexity_ratio: empty mask");
    const BoundingBox box = mask.bounding_box();
    std::vector<Point> pts;
    pts.reserve(2 * static_cast<std::size_t>(box.height()));
    for (int y = box.y0; y < box.y1; ++y) {
        int xmin, xmax;
        if (!mask.row_extent(y, xmin, xmax)) continue;
        pts.push_back({xmin + 0.5, y + 0.5});
        if (xmax != xmin) pts.push_back({xmax + 0.5, y + 0.5});
    }
    const std::vector<Point> hull = convex_hull(std::move(pts));
    RasterResult hull_raster = rasterize_polygon_px(hull, mask.width(), mask.height());
    const BinaryMask hull_mask = mask_or(hull_raster.mask, mask);
    return static_cast<double>(mask.count()) / static_cast<double>(hull_mask.count());
}

/// Ordered outer-boundary pixel sequence (Moore neighborhood, clockwise),
/// starting at the topmost-then-leftmost foreground pixel, in normalized
/// pixel-center coordinates. Revisited pixels (out-and-back spurs) are
/// deduplicated to their first occurrence.
inline ContourPolygon trace_boundary(const BinaryMask& mask) {
    if (mask.empty()) throw MaskError("trace_boundary: empty mask");
    if (!is_single_component(mask)) {
        throw MaskError("trace_boundary: mask has more than one component");
    }
    const int W = mask.width();
    const int H = mask.height();
    const BoundingBox box = mask.bounding_box();
    int sx = -1, sy = box.y0;
    for (int x = box.x0; x < box.x1; ++x) {
        if (mask.get(x, sy)) {
            sx = x;
            break;
        }
    }

    // clockwise ring in y-down coordinates, starting north
    static constexpr int kDx[8] = {0, 1, 1, 1, 0, -1, -1, -1};
    static constexpr int kDy[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
    auto fg = [&](int x, int y) {
        return x >= 0 && x < W && y >= 0 && y < H && mask.get(x, y);
    };
    auto dir_index = [&](int cx2, int cy2, int nx, int ny) {
        for (int i = 0; i < 8; ++i) {
            if (cx2 + kDx[i] == nx && cy2 + kDy[i] == ny) return i;
        }
        return -1;
    };

    std::vector<std::pair<int, int>> path;
    path.emplace_back(sx, sy);
    int cx = sx, cy = sy;
    int bx = sx - 1, by = sy; // backtrack: west of start (background by construction)
    int second_x = -1, second_y = -1;
    const std::int64_t max_steps = 8 * mask.count() + 16;
    for (std::int64_t step = 0; step < max_steps; ++step) {
        const int start_dir = (dir_index(cx, cy, bx, by) + 1) % 8;
        int nx = -1, ny = -1;
        int px = bx, py = by;
        for (int i = 0; i < 8; ++i) {
            const int d = (start_dir + i) % 8;
            const int tx = cx + kDx[d];
            const int ty = cy + kDy[d];
            if (fg(tx, ty)) {
                nx = tx;
                ny = ty;
                break;
            }
            px = tx;
            py = ty;
        }
        if (nx < 0) break; // isolated pixel
        if (second_x < 0) {
            second_x = nx;
            second_y = ny;
        } else if (cx == sx && cy == sy && nx == second_x && ny == second_y) {
            break; // about to retrace the initial edge
        }
        path.emplace_back(nx, ny);
        bx = px;
        by = py;
        cx = nx;
        cy = ny;
    }

    ContourPolygon poly;
    std::unordered_set<std::int64_t> seen;
    for (const auto& [x, y] : path) {
        const std::int64_t key = static_cast<std::int64_t>(y) * W + x;
        if (seen.insert(key).second) {
            poly.vertices.push_back({(x + 0.5) / W, (y + 0.5) / H});
        }
    }
    return poly;
}

} // namespace contourkit
