#pragma once

#include <cmath>
#include <filesystem>
#include <optional>
#include <variant>
#include <vector>

#include "contourkit/mask.hpp"
#include "contourkit/png_io.hpp"
#include "contourkit/polygon.hpp"
#include "contourkit/raster_ops.hpp"

namespace contourkit {

enum class EncodingMode { filled, line };

struct EncodingConfig {
    EncodingMode mode = EncodingMode::filled;
    double w = 0.02; // line width as a fraction of the shorter image side
};

/// Three aligned planes forming the segmenter input: positive contours,
/// negative contours, previous prediction.
struct InteractionEncoding {
    BinaryMask positive;
    BinaryMask negative;
    ProbabilityMask previous;
    EncodingMode mode = EncodingMode::filled;
};

/// Line width in pixels: round(w * shorter side), half away from zero,
/// minimum 1.
inline int line_width_px(double w, int image_width, int image_height) {
    if (!(w > 0.0)) throw EncodingError("line width fraction must be positive");
    const long px = std::lround(w * std::min(image_width, image_height));
    return std::max(1, static_cast<int>(px));
}

/// A contour for encoding: either an already-filled mask (generated contours)
/// or a polygon in normalized coordinates (dataset annotations).
using ContourSource = std::variant<BinaryMask, ContourPolygon>;

namespace detail {

inline void render_source(BinaryMask& plane, const ContourSource& src, EncodingMode mode,
                          int width, int height, int line_px) {
    if (std::holds_alternative<BinaryMask>(src)) {
        const BinaryMask& m = std::get<BinaryMask>(src);
        if (m.width() != width || m.height() != height) {
            throw EncodingError("contour mask dimensions do not match the encoding dims");
        }
        if (mode == EncodingMode::filled) {
            plane = mask_or(plane, m);
            return;
        }
        if (m.empty()) return;
        for (const BinaryMask& part : components(m)) {
            const ContourPolygon boundary = trace_boundary(part);
            plane = mask_or(plane, draw_polyline(boundary, line_px, width, height, true));
        }
        return;
    }
    const ContourPolygon closed = close_contour(std::get<ContourPolygon>(src));
    if (mode == EncodingMode::filled) {
        plane = mask_or(plane, rasterize_polygon(closed, width, height).mask);
    } else {
        plane = mask_or(plane, draw_polyline(closed, line_px, width, height, false));
    }
}

} // namespace detail

/// Builds the three-plane input: positive plane = union of positive contours,
/// negative plane = union of negative contours, previous plane = prior
/// prediction or all zeros before the first interaction.
inline InteractionEncoding encode_interaction(const std::vector<ContourSource>& pos,
                                              const std::vector<ContourSource>& neg,
                                              const std::optional<ProbabilityMask>& previous,
                                              const EncodingConfig& config,
                                              int width, int height) {
    if (pos.empty() && neg.empty() && !previous.has_value()) {
        throw EncodingError("no interaction to encode");
    }
    if (previous && (previous->width() != width || previous->height() != height)) {
        throw EncodingError("previous mask dimensions do not match the encoding dims");
    }
    const int line_px =
        config.mode == EncodingMode::line ? line_width_px(config.w, width, height) : 1;
    InteractionEncoding enc{BinaryMask(width, height), BinaryMask(width, height),
                            previous ? *previous : ProbabilityMask(width, height),
                            config.mode};
    for (const ContourSource& s : pos) {
        detail::render_source(enc.positive, s, config.mode, width, height, line_px);
    }
    for (const ContourSource& s : neg) {
        detail::render_source(enc.negative, s, config.mode, width, height, line_px);
    }
    return enc;
}

/// Serializes an encoding as the three-PNG wire/file layout:
/// <stem>_pos.png, <stem>_neg.png (binary), <stem>_prev.png (8-bit quantized).
inline void write_encoding_pngs(const InteractionEncoding& enc,
                                const std::filesystem::path& dir, const std::string& stem) {
    pngio::write_mask_png(dir / (stem + "_pos.png"), enc.positive);
    pngio::write_mask_png(dir / (stem + "_neg.png"), enc.negative);
    pngio::write_probability_png(dir / (stem + "_prev.png"), enc.previous);
}

inline InteractionEncoding hflip(const InteractionEncoding& enc) {
    return InteractionEncoding{hflip(enc.positive), hflip(enc.negative), hflip(enc.previous),
                               enc.mode};
}

} // namespace contourkit
