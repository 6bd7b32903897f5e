#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "contourkit/mask.hpp"
#include "contourkit/parallel.hpp"
#include "contourkit/polygon.hpp"
#include "contourkit/raster_ops.hpp"
#include "contourkit/rng.hpp"

namespace contourkit {

/// One sampled draw of every randomized quantity of the contour simulation.
/// d_scale, d_x/d_y and the shifts are filled in by generate_contour, since
/// they depend on intermediate masks.
struct GenerationParams {
    MorphKind morph_kind = MorphKind::dilate;
    double d_morph = 0.0;  // dilation draw in [0.03,0.06], erosion draw in [0.02,0.04]
    double d_affine = 0.0; // [0.4, 0.6]
    double d_sigma = 0.0;  // [0.5, 0.75]
    double d_alpha = 0.0;  // [0.8, 1.2]
    double d_size = 0.0;   // [0.008, 0.06]
    double convexity = 0.0; // ratio r, measured after smoothing
    double d_scale = 0.0;  // [0.9,1.1] when r < 0.6, else [0.75,1.2]
    double d_x = 0.0;      // shift bound along x after doubling/clipping
    double d_y = 0.0;
    int shift_x = 0;
    int shift_y = 0;
    std::uint64_t seed = 0;
};

struct GeneratedContour {
    BinaryMask filled;
    GenerationParams params;
    bool fallback_used = false;
};

/// Complexity threshold: below it an object counts as non-convex and gets the
/// narrow scale range and undoubled shift bounds.
constexpr double kConvexityThreshold = 0.6;

/// Rounds to the nearest odd integer (ties upward), clamped to >= 3 so
/// morphology and blur kernels keep a center pixel.
inline int round_odd_min3(double x) {
    const int odd = 2 * static_cast<int>(std::floor(x / 2.0)) + 1;
    return std::max(3, odd);
}

namespace detail {

/// Draw order is part of the determinism contract: morph coin, morph amount,
/// affine, sigma, alpha, size.
inline GenerationParams draw_base_params(RngStream& rng) {
    GenerationParams p;
    p.morph_kind = rng.coin() ? MorphKind::dilate : MorphKind::erode;
    p.d_morph = p.morph_kind == MorphKind::dilate ? rng.uniform(0.03, 0.06)
                                                  : rng.uniform(0.02, 0.04);
    p.d_affine = rng.uniform(0.4, 0.6);
    p.d_sigma = rng.uniform(0.5, 0.75);
    p.d_alpha = rng.uniform(0.8, 1.2);
    p.d_size = rng.uniform(0.008, 0.06);
    return p;
}

struct AffineMap {
    // x' = a*x + b*y + c ; y' = d*x + e*y + f
    double a = 1, b = 0, c = 0, d = 0, e = 1, f = 0;

    Point apply(const Point& p) const { return {a * p.x + b * p.y + c, d * p.x + e * p.y + f}; }
};

/// Affine map sending src[i] -> dst[i]; returns false when the source triangle
/// is degenerate.
inline bool affine_from_triangles(const Point src[3], const Point dst[3], AffineMap& out) {
    const double det = (src[1].x - src[0].x) * (src[2].y - src[0].y) -
                       (src[2].x - src[0].x) * (src[1].y - src[0].y);
    if (det == 0.0) return false;
    const double inv = 1.0 / det;
    // solve for both rows via differences against src[0]
    const double u1 = src[1].x - src[0].x, v1 = src[1].y - src[0].y;
    const double u2 = src[2].x - src[0].x, v2 = src[2].y - src[0].y;
    const double px1 = dst[1].x - dst[0].x, py1 = dst[1].y - dst[0].y;
    const double px2 = dst[2].x - dst[0].x, py2 = dst[2].y - dst[0].y;
    out.a = (px1 * v2 - px2 * v1) * inv;
    out.b = (px2 * u1 - px1 * u2) * inv;
    out.c = dst[0].x - out.a * src[0].x - out.b * src[0].y;
    out.d = (py1 * v2 - py2 * v1) * inv;
    out.e = (py2 * u1 - py1 * u2) * inv;
    out.f = dst[0].y - out.d * src[0].x - out.e * src[0].y;
    return true;
}

/// Nearest-neighbor inverse-mapped affine warp; the target window is the
/// forward image of the mask bbox, clipped to the frame.
inline BinaryMask warp_affine_nn(const BinaryMask& mask, const AffineMap& fwd,
                                 const AffineMap& inv) {
    const BoundingBox box = mask.bounding_box();
    const Point corners[4] = {{double(box.x0), double(box.y0)},
                              {double(box.x1), double(box.y0)},
                              {double(box.x0), double(box.y1)},
                              {double(box.x1), double(box.y1)}};
    double x_lo = 1e30, x_hi = -1e30, y_lo = 1e30, y_hi = -1e30;
    for (const Point& c : corners) {
        const Point t = fwd.apply(c);
        x_lo = std::min(x_lo, t.x);
        x_hi = std::max(x_hi, t.x);
        y_lo = std::min(y_lo, t.y);
        y_hi = std::max(y_hi, t.y);
    }
    const int wx0 = std::max(0, static_cast<int>(std::floor(x_lo)) - 1);
    const int wx1 = std::min(mask.width(), static_cast<int>(std::ceil(x_hi)) + 1);
    const int wy0 = std::max(0, static_cast<int>(std::floor(y_lo)) - 1);
    const int wy1 = std::min(mask.height(), static_cast<int>(std::ceil(y_hi)) + 1);

    BinaryMask out(mask.width(), mask.height());
    for (int y = wy0; y < wy1; ++y) {
        for (int x = wx0; x < wx1; ++x) {
            const Point s = inv.apply({x + 0.5, y + 0.5});
            const int ix = static_cast<int>(std::floor(s.x));
            const int iy = static_cast<int>(std::floor(s.y));
            if (ix >= 0 && ix < mask.width() && iy >= 0 && iy < mask.height() &&
                mask.get(ix, iy)) {
                out.set(x, y, true);
            }
        }
    }
    return out;
}

inline std::int64_t div_round_half_away(std::int64_t a, std::int64_t b) {
    return a >= 0 ? (a + b / 2) / b : -((-a + b / 2) / b);
}

/// Three box widths (odd) whose chained application approximates a Gaussian of
/// the given sigma (Kovesi's fast almost-Gaussian rule).
inline void box_widths_for_sigma(double sigma, int widths[3]) {
    int wl = static_cast<int>(std::floor(std::sqrt(4.0 * sigma * sigma + 1.0)));
    if (wl % 2 == 0) --wl;
    if (wl < 1) wl = 1;
    const double m_ideal =
        (12.0 * sigma * sigma - 3.0 * wl * wl - 12.0 * wl - 9.0) / (-4.0 * wl - 4.0);
    int m = static_cast<int>(std::lround(m_ideal));
    m = std::clamp(m, 0, 3);
    for (int i = 0; i < 3; ++i) widths[i] = i < m ? wl : wl + 2;
}

/// In-place sliding box sum of the given odd width; shrinks the row by
/// width-1 samples.
inline void box_pass(std::vector<std::int64_t>& row, int w) {
    if (w == 1) return;
    const int n = static_cast<int>(row.size()) - (w - 1);
    std::int64_t acc = 0;
    for (int i = 0; i < w; ++i) acc += row[i];
    for (int i = 0; i < n; ++i) {
        const std::int64_t keep = acc;
        acc += row[i + w] - row[i];
        row[i] = keep;
        if (i + 1 == n) break;
    }
    row.resize(n);
}

/// Smoothed noise field over an out_w x out_h window: raw samples are int16
/// draws (the U(-1,1) lattice at 1/32768 resolution), smoothed by a 3-pass box
/// chain per axis with exact integer sums, renormalized per axis with
/// half-away rounding. Values stay in [-32768, 32767]; divide by 32768 for the
/// real-valued field. Draws are consumed row-major over the padded window.
inline std::vector<std::int32_t> smoothed_noise_field(RngStream& rng, int out_w, int out_h,
                                                      double sigma) {
    int widths[3];
    box_widths_for_sigma(sigma, widths);
    const int pad = ((widths[0] - 1) + (widths[1] - 1) + (widths[2] - 1)) / 2;
    const std::int64_t norm =
        static_cast<std::int64_t>(widths[0]) * widths[1] * widths[2];
    const int pw = out_w + 2 * pad;
    const int ph = out_h + 2 * pad;

    // horizontal passes, row by row
    std::vector<std::int32_t> hsm(static_cast<std::size_t>(out_w) * ph);
    std::vector<std::int64_t> row;
    for (int y = 0; y < ph; ++y) {
        row.resize(pw);
        for (int x = 0; x < pw; ++x) row[x] = rng.noise16();
        for (int k = 0; k < 3; ++k) box_pass(row, widths[k]);
        for (int x = 0; x < out_w; ++x) {
            hsm[static_cast<std::size_t>(y) * out_w + x] =
                static_cast<std::int32_t>(div_round_half_away(row[x], norm));
        }
    }
    // vertical passes, column by column
    std::vector<std::int32_t> out(static_cast<std::size_t>(out_w) * out_h);
    std::vector<std::int64_t> col;
    for (int x = 0; x < out_w; ++x) {
        col.resize(ph);
        for (int y = 0; y < ph; ++y) col[y] = hsm[static_cast<std::size_t>(y) * out_w + x];
        for (int k = 0; k < 3; ++k) box_pass(col, widths[k]);
        for (int y = 0; y < out_h; ++y) {
            out[static_cast<std::size_t>(y) * out_w + x] =
                static_cast<std::int32_t>(div_round_half_away(col[y], norm));
        }
    }
    return out;
}

} // namespace detail

/// Draws the randomized generation parameters that do not depend on
/// intermediate masks. Same seed, same params, bit for bit.
inline GenerationParams sample_generation_params(std::uint64_t rng_seed, int /*image_width*/,
                                                 int /*image_height*/,
                                                 const BinaryMask& object_mask) {
    if (object_mask.empty()) throw MaskError("sample_generation_params: empty object mask");
    RngStream rng(rng_seed);
    GenerationParams p = detail::draw_base_params(rng);
    p.seed = rng_seed;
    return p;
}

/// Random affine jitter of the mask-bbox control triangle followed by a
/// Simard-style elastic warp. The displacement fields are per-pixel U(-1,1)
/// noise smoothed with sigma = d_sigma * object_size and scaled by
/// d_alpha * object_size; they are evaluated on the warped mask's bbox grown
/// by 8 px, which covers every displacement these parameter ranges can
/// actually produce. May return an empty or multi-part mask; callers re-apply
/// largest_component and retry on empty.
inline BinaryMask elastic_deform(const BinaryMask& mask, double d_affine, double d_sigma,
                                 double d_alpha, double object_size, RngStream& rng) {
    if (mask.empty()) return mask;
    const BoundingBox box = mask.bounding_box();
    const Point src[3] = {{double(box.x0), double(box.y0)},
                          {double(box.x1), double(box.y0)},
                          {double(box.x0), double(box.y1)}};
    const double amp = d_affine * object_size;
    Point dst[3];
    for (int i = 0; i < 3; ++i) {
        const double dx = rng.uniform(-amp, amp);
        const double dy = rng.uniform(-amp, amp);
        dst[i] = {src[i].x + dx, src[i].y + dy};
    }
    detail::AffineMap fwd, inv;
    if (!detail::affine_from_triangles(src, dst, fwd) ||
        !detail::affine_from_triangles(dst, src, inv)) {
        return BinaryMask(mask.width(), mask.height()); // degenerate jitter; retry upstream
    }
    const BinaryMask warped = detail::warp_affine_nn(mask, fwd, inv);
    if (warped.empty()) return warped;

    const double sigma = d_sigma * object_size;
    const double alpha = d_alpha * object_size;
    const BoundingBox wb = warped.bounding_box();
    constexpr int kFieldMargin = 8;
    const int fx0 = std::max(0, wb.x0 - kFieldMargin);
    const int fy0 = std::max(0, wb.y0 - kFieldMargin);
    const int fx1 = std::min(mask.width(), wb.x1 + kFieldMargin);
    const int fy1 = std::min(mask.height(), wb.y1 + kFieldMargin);
    const int fw = fx1 - fx0;
    const int fh = fy1 - fy0;
    const std::vector<std::int32_t> field_x = detail::smoothed_noise_field(rng, fw, fh, sigma);
    const std::vector<std::int32_t> field_y = detail::smoothed_noise_field(rng, fw, fh, sigma);

    BinaryMask out(mask.width(), mask.height());
    for (int y = 0; y < fh; ++y) {
        for (int x = 0; x < fw; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * fw + x;
            const double dx = alpha * (field_x[i] / 32768.0);
            const double dy = alpha * (field_y[i] / 32768.0);
            const int ix = static_cast<int>(std::floor(fx0 + x + 0.5 + dx));
            const int iy = static_cast<int>(std::floor(fy0 + y + 0.5 + dy));
            if (ix >= 0 && ix < mask.width() && iy >= 0 && iy < mask.height() &&
                warped.get(ix, iy)) {
                out.set(fx0 + x, fy0 + y, true);
            }
        }
    }
    return out;
}

/// Runs the full randomized distortion pipeline on a ground-truth mask:
/// hole fill, random dilation/erosion (kernel from the image diagonal),
/// largest component, elastic warp, largest component, Gaussian smoothing
/// (kernel from the object size), complexity-gated scaling, bounded shift.
/// Any stage producing an empty (or multi-part final) mask restarts with a
/// derived sub-seed, up to 10 attempts; after that the hole-filled ground
/// truth is returned with fallback_used set.
inline GeneratedContour generate_contour(const BinaryMask& gt_mask, std::uint64_t seed) {
    if (gt_mask.empty()) throw MaskError("generate_contour: empty ground-truth mask");
    const int W = gt_mask.width();
    const int H = gt_mask.height();
    const double diagonal = std::sqrt(static_cast<double>(W) * W + static_cast<double>(H) * H);
    const BoundingBox gt_box = gt_mask.bounding_box();

    GenerationParams params;
    constexpr int kMaxAttempts = 10;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        RngStream rng(derive_key(seed, static_cast<std::uint64_t>(attempt)));
        params = detail::draw_base_params(rng);
        params.seed = seed;

        const BinaryMask filled = fill_holes(gt_mask);
        const int morph_kernel = round_odd_min3(params.d_morph * diagonal);
        const BinaryMask morphed = morph_transform(filled, params.morph_kind, morph_kernel);
        if (morphed.empty()) continue;
        const BinaryMask comp1 = largest_component(morphed);

        const BoundingBox b1 = comp1.bounding_box();
        const double object_size = std::max(b1.width(), b1.height());
        const BinaryMask deformed = elastic_deform(comp1, params.d_affine, params.d_sigma,
                                                   params.d_alpha, object_size, rng);
        if (deformed.empty()) continue;
        const BinaryMask comp2 = largest_component(deformed);

        const BoundingBox b2 = comp2.bounding_box();
        const double object_size_post = std::max(b2.width(), b2.height());
        const int blur_kernel = round_odd_min3(params.d_size * object_size_post);
        const BinaryMask smoothed = gaussian_smooth(comp2, blur_kernel);
        if (smoothed.empty()) continue;

        params.convexity = convexity_ratio(smoothed);
        const bool non_convex = params.convexity < kConvexityThreshold;
        params.d_scale = non_convex ? rng.uniform(0.9, 1.1) : rng.uniform(0.75, 1.2);
        const BinaryMask scaled = scale_about_centroid(smoothed, params.d_scale);
        if (scaled.empty()) continue;

        const BoundingBox tb = scaled.bounding_box();
        double dx = std::min(std::abs(tb.x0 - gt_box.x0), std::abs(tb.x1 - gt_box.x1));
        double dy = std::min(std::abs(tb.y0 - gt_box.y0), std::abs(tb.y1 - gt_box.y1));
        if (!non_convex) {
            dx *= 2.0;
            dy *= 2.0;
        }
        dx = std::min(dx, 0.5 * tb.width());
        dy = std::min(dy, 0.5 * tb.height());
        params.d_x = dx;
        params.d_y = dy;
        params.shift_x = rng.uniform_int(-static_cast<int>(dx), static_cast<int>(dx));
        params.shift_y = rng.uniform_int(-static_cast<int>(dy), static_cast<int>(dy));
        const BinaryMask shifted = shift_clipped(scaled, params.shift_x, params.shift_y);
        if (shifted.empty()) continue;
        if (!is_single_component(shifted)) continue; // smoothing/scaling can split; resample

        return GeneratedContour{shifted, params, false};
    }
    return GeneratedContour{fill_holes(gt_mask), params, true};
}

/// Per-pixel counts of n boundary-line renderings of independently generated
/// contours. Values lie in [0, n].
inline std::vector<std::uint32_t> generate_heatmap(const BinaryMask& gt_mask, int n,
                                                   std::uint64_t seed, int line_width) {
    if (n < 1) throw MaskError("generate_heatmap: n must be >= 1");
    std::vector<std::uint32_t> counts(
        static_cast<std::size_t>(gt_mask.width()) * gt_mask.height(), 0);
    for (int i = 0; i < n; ++i) {
        const GeneratedContour gc =
            generate_contour(gt_mask, derive_key(seed, static_cast<std::uint64_t>(i)));
        const ContourPolygon boundary = trace_boundary(largest_component(gc.filled));
        const BinaryMask line =
            draw_polyline(boundary, line_width, gt_mask.width(), gt_mask.height(), true);
        for (int y = 0; y < gt_mask.height(); ++y) {
            for (int x = 0; x < gt_mask.width(); ++x) {
                if (line.get(x, y)) ++counts[static_cast<std::size_t>(y) * gt_mask.width() + x];
            }
        }
    }
    return counts;
}

enum class SamplePolarity { positive, negative };

/// A synthesized training interaction: positive samples teach "select this
/// object", negative samples teach "erase it" (ground truth passed as the
/// previous mask, all-zero target).
struct TrainingSample {
    SamplePolarity polarity = SamplePolarity::positive;
    BinaryMask contour;
    BinaryMask previous_mask;
    BinaryMask target;
    bool fallback_used = false;
};

inline TrainingSample synthesize_training_sample(const BinaryMask& gt_mask, std::uint64_t seed) {
    if (gt_mask.empty()) throw MaskError("synthesize_training_sample: empty ground-truth mask");
    RngStream polarity_rng(derive_key(seed, {0x706f6cull}));
    const bool positive = polarity_rng.coin();
    const GeneratedContour gc = generate_contour(gt_mask, derive_key(seed, {0x636f6eull}));
    TrainingSample s;
    s.contour = gc.filled;
    s.fallback_used = gc.fallback_used;
    const BinaryMask zeros(gt_mask.width(), gt_mask.height());
    if (positive) {
        s.polarity = SamplePolarity::positive;
        s.previous_mask = zeros;
        s.target = gt_mask;
    } else {
        s.polarity = SamplePolarity::negative;
        s.previous_mask = gt_mask;
        s.target = zeros;
    }
    return s;
}

/// Deterministic batch generation: sample i uses derive_key(master_seed, i),
/// so results are identical for any worker count.
inline std::vector<GeneratedContour> generate_batch(const BinaryMask& gt_mask, int count,
                                                    std::uint64_t master_seed, int workers) {
    std::vector<GeneratedContour> out(count);
    parallel_for(count, workers, [&](int i) {
        out[i] = generate_contour(gt_mask, derive_key(master_seed, static_cast<std::uint64_t>(i)));
    });
    return out;
}

} // namespace contourkit
