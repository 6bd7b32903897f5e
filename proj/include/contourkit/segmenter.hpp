#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "contourkit/encoding.hpp"
#include "contourkit/mask.hpp"

namespace contourkit {

/// A crop of the full frame plus the resolution it was resampled to.
/// Offset = (box.x0, box.y0); per-axis scale = box extent / out extent.
struct CropWindow {
    BoundingBox box;
    int out_width = 0;
    int out_height = 0;

    bool identity_scale() const {
        return out_width == box.width() && out_height == box.height();
    }
};

/// How the query planes were derived from the full frame: optional crop
/// (applied first), then optional horizontal mirror. Built-in segmenters that
/// consult full-frame ground truth apply the same view.
struct QueryGeometry {
    std::optional<CropWindow> crop;
    bool hflip = false;
};

namespace view {

/// Nearest-neighbor crop/resample of a full-frame probability plane into the
/// window's output resolution. Scale-1 windows copy pixels exactly.
inline ProbabilityMask crop_resample(const ProbabilityMask& full, const CropWindow& w) {
    ProbabilityMask out(w.out_width, w.out_height);
    const double sx = static_cast<double>(w.box.width()) / w.out_width;
    const double sy = static_cast<double>(w.box.height()) / w.out_height;
    for (int y = 0; y < w.out_height; ++y) {
        int src_y = w.box.y0 + static_cast<int>(std::floor((y + 0.5) * sy));
        src_y = std::clamp(src_y, w.box.y0, w.box.y1 - 1);
        for (int x = 0; x < w.out_width; ++x) {
            int src_x = w.box.x0 + static_cast<int>(std::floor((x + 0.5) * sx));
            src_x = std::clamp(src_x, w.box.x0, w.box.x1 - 1);
            out.set(x, y, full.at(src_x, src_y));
        }
    }
    return out;
}

inline BinaryMask crop_resample(const BinaryMask& full, const CropWindow& w) {
    BinaryMask out(w.out_width, w.out_height);
    const double sx = static_cast<double>(w.box.width()) / w.out_width;
    const double sy = static_cast<double>(w.box.height()) / w.out_height;
    for (int y = 0; y < w.out_height; ++y) {
        int src_y = w.box.y0 + static_cast<int>(std::floor((y + 0.5) * sy));
        src_y = std::clamp(src_y, w.box.y0, w.box.y1 - 1);
        for (int x = 0; x < w.out_width; ++x) {
            int src_x = w.box.x0 + static_cast<int>(std::floor((x + 0.5) * sx));
            src_x = std::clamp(src_x, w.box.x0, w.box.x1 - 1);
            if (full.get(src_x, src_y)) out.set(x, y, true);
        }
    }
    return out;
}

/// Warps a full-frame plane into query space: crop, then mirror.
template <typename MaskT>
inline MaskT to_view(const MaskT& full, const QueryGeometry& g) {
    MaskT v = g.crop ? crop_resample(full, *g.crop) : full;
    if (g.hflip) v = hflip(v);
    return v;
}

/// Pastes a crop-space prediction back into a full-frame zero canvas
/// (inverse of the crop sampling; exact for scale-1 windows). Mirroring must
/// already be undone by the caller.
inline ProbabilityMask paste_back(const ProbabilityMask& pred, const CropWindow& w,
                                  int full_width, int full_height) {
    ProbabilityMask out(full_width, full_height);
    const double sx = static_cast<double>(w.out_width) / w.box.width();
    const double sy = static_cast<double>(w.out_height) / w.box.height();
    for (int y = w.box.y0; y < w.box.y1; ++y) {
        int vy = static_cast<int>(std::floor((y - w.box.y0 + 0.5) * sy));
        vy = std::clamp(vy, 0, w.out_height - 1);
        for (int x = w.box.x0; x < w.box.x1; ++x) {
            int vx = static_cast<int>(std::floor((x - w.box.x0 + 0.5) * sx));
            vx = std::clamp(vx, 0, w.out_width - 1);
            out.set(x, y, pred.at(vx, vy));
        }
    }
    return out;
}

} // namespace view

struct SegmenterQuery {
    std::string image_ref;
    InteractionEncoding encoding;
    int interaction_index = 1;
    QueryGeometry geometry; // view the planes were rendered through
};

struct SegmenterAnswer {
    ProbabilityMask probabilities;
};

/// A predictor mapping (image, interaction encoding) to a probability mask.
class ContourSegmenter {
public:
    virtual ~ContourSegmenter() = default;
    virtual SegmenterAnswer predict(const SegmenterQuery& query) = 0;
    virtual std::string name() const = 0;
};

enum class ClickPolarity { positive, negative };

struct Click {
    int x = 0;
    int y = 0;
    ClickPolarity polarity = ClickPolarity::positive;
    bool operator==(const Click&) const = default;
};

/// Click-protocol query: clicks are coordinates in full-frame pixel space,
/// plus the previous prediction.
struct ClickQuery {
    std::string image_ref;
    int width = 0;
    int height = 0;
    std::vector<Click> clicks;
    ProbabilityMask previous;
    int interaction_index = 1;
};

class ClickSegmenter {
public:
    virtual ~ClickSegmenter() = default;
    virtual SegmenterAnswer predict(const ClickQuery& query) = 0;
    virtual std::string name() const = 0;
};

/// Resolves an evaluation sample reference ("imageid_annotation") to its
/// ground-truth mask.
using GroundTruthResolver = std::function<BinaryMask(const std::string&)>;

/// Harness sanity oracle: answers with the ground truth, warped through the
/// query geometry so Zoom-In and flip runs stay exact.
class OracleSegmenter : public ContourSegmenter {
public:
    explicit OracleSegmenter(GroundTruthResolver resolver) : resolver_(std::move(resolver)) {}

    SegmenterAnswer predict(const SegmenterQuery& query) override {
        const BinaryMask gt = resolver_(query.image_ref);
        return {view::to_view(ProbabilityMask::from_binary(gt), query.geometry)};
    }

    std::string name() const override { return "oracle"; }

private:
    GroundTruthResolver resolver_;
};

/// Non-neural lower bound: believe the user verbatim. Probability 1 inside
/// positive-and-not-negative, 0 inside negative, previous passthrough
/// elsewhere. Requires filled encoding.
class FilledBaselineSegmenter : public ContourSegmenter {
public:
    SegmenterAnswer predict(const SegmenterQuery& query) override {
        if (query.encoding.mode != EncodingMode::filled) {
            throw SegmenterError("baseline requires filled encoding");
        }
        const BinaryMask& pos = query.encoding.positive;
        const BinaryMask& neg = query.encoding.negative;
        ProbabilityMask out(pos.width(), pos.height());
        for (int y = 0; y < pos.height(); ++y) {
            for (int x = 0; x < pos.width(); ++x) {
                if (neg.get(x, y)) continue; // clipped to zero
                if (pos.get(x, y)) {
                    out.set(x, y, 1.0f);
                } else {
                    out.set(x, y, query.encoding.previous.at(x, y));
                }
            }
        }
        return {out};
    }

    std::string name() const override { return "baseline"; }
};

/// Never improves: always predicts an empty mask. Test/CLI stub.
class EmptySegmenter : public ContourSegmenter, public ClickSegmenter {
public:
    SegmenterAnswer predict(const SegmenterQuery& query) override {
        return {ProbabilityMask(query.encoding.positive.width(),
                                query.encoding.positive.height())};
    }
    SegmenterAnswer predict(const ClickQuery& query) override {
        return {ProbabilityMask(query.width, query.height)};
    }
    std::string name() const override { return "empty"; }
};

/// Click-protocol oracle: ground truth regardless of the clicks.
class OracleClickSegmenter : public ClickSegmenter {
public:
    explicit OracleClickSegmenter(GroundTruthResolver resolver)
        : resolver_(std::move(resolver)) {}

    SegmenterAnswer predict(const ClickQuery& query) override {
        return {ProbabilityMask::from_binary(resolver_(query.image_ref))};
    }

    std::string name() const override { return "oracle"; }

private:
    GroundTruthResolver resolver_;
};

using ContourSegmenterFactory = std::function<std::unique_ptr<ContourSegmenter>()>;
using ClickSegmenterFactory = std::function<std::unique_ptr<ClickSegmenter>()>;

} // namespace contourkit
