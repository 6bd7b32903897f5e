#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "contourkit/dataset.hpp"
#include "contourkit/edt.hpp"
#include "contourkit/encoding.hpp"
#include "contourkit/generator.hpp"
#include "contourkit/parallel.hpp"
#include "contourkit/segmenter.hpp"

namespace contourkit {

struct EvalConfig {
    double target_iou = 0.90; // the k of NoC@k
    int max_clicks = 20;
    double threshold = 0.5; // prediction binarization
    bool zoom_in = false;      // contour protocol only
    bool flip_average = false; // contour protocol only
    double expansion = 1.4;    // Zoom-In bbox growth factor
    EncodingConfig encoding;
    int workers = 1;
};

struct SampleResult {
    std::string image_id;
    std::string annotation_number;
    std::optional<double> iou_at_1;
    std::vector<double> iou_per_click;
    std::optional<int> noc_at_k;           // nullopt in a click run = not reached
    std::optional<int> equivalent_clicks;  // nullopt when attached = beyond max
    bool click_protocol = false;
    bool fallback_used = false;
    std::optional<std::string> error;

    std::string ref() const { return image_id + "_" + annotation_number; }
};

struct EvalReport {
    EvalConfig config;
    std::vector<SampleResult> rows; // sorted by (image_id, annotation_number)

    /// Mean IoU after the first contour, over error-free rows.
    double mean_iou1() const {
        double sum = 0.0;
        int n = 0;
        for (const SampleResult& r : rows) {
            if (r.error || !r.iou_at_1) continue;
            sum += *r.iou_at_1;
            ++n;
        }
        return n == 0 ? 0.0 : sum / n;
    }

    /// Mean NoC@k; "not reached" contributes max_clicks.
    double mean_noc() const {
        double sum = 0.0;
        int n = 0;
        for (const SampleResult& r : rows) {
            if (r.error || !r.click_protocol) continue;
            sum += r.noc_at_k ? *r.noc_at_k : config.max_clicks;
            ++n;
        }
        return n == 0 ? 0.0 : sum / n;
    }

    /// Per-click mean IoU curve; converged samples hold their final IoU for
    /// the remaining clicks.
    std::vector<double> mean_curve() const {
        std::vector<double> mean;
        int n = 0;
        for (const SampleResult& r : rows) {
            if (r.error || r.iou_per_click.empty()) continue;
            ++n;
            if (mean.empty()) mean.assign(config.max_clicks, 0.0);
            for (int i = 0; i < config.max_clicks; ++i) {
                const std::size_t j = std::min<std::size_t>(i, r.iou_per_click.size() - 1);
                mean[i] += r.iou_per_click[j];
            }
        }
        for (double& v : mean) v /= n;
        return mean;
    }

    int error_count() const {
        int n = 0;
        for (const SampleResult& r : rows) n += r.error.has_value() ? 1 : 0;
        return n;
    }
};

struct ZoomResult {
    InteractionEncoding encoding;
    CropWindow window;
};

/// Crops the encoding to the positive plane's bbox grown by `expansion`,
/// clipped to the frame. Without a target size the crop keeps scale 1 (no
/// resampling); predictions are pasted back into a full-frame zero canvas.
inline ZoomResult zoom_in(const InteractionEncoding& enc, double expansion,
                          std::optional<std::pair<int, int>> target_size = std::nullopt) {
    if (enc.positive.empty()) throw EncodingError("zoom-in requires a contour");
    const int W = enc.positive.width();
    const int H = enc.positive.height();
    const BoundingBox box = enc.positive.bounding_box();
    const double cx = 0.5 * (box.x0 + box.x1);
    const double cy = 0.5 * (box.y0 + box.y1);
    const double hx = 0.5 * box.width() * expansion;
    const double hy = 0.5 * box.height() * expansion;
    CropWindow window;
    window.box.x0 = std::max(0, static_cast<int>(std::floor(cx - hx)));
    window.box.x1 = std::min(W, static_cast<int>(std::ceil(cx + hx)));
    window.box.y0 = std::max(0, static_cast<int>(std::floor(cy - hy)));
    window.box.y1 = std::min(H, static_cast<int>(std::ceil(cy + hy)));
    window.out_width = target_size ? target_size->first : window.box.width();
    window.out_height = target_size ? target_size->second : window.box.height();

    ZoomResult out{InteractionEncoding{view::crop_resample(enc.positive, window),
                                       view::crop_resample(enc.negative, window),
                                       view::crop_resample(enc.previous, window), enc.mode},
                   window};
    return out;
}

/// Averages the prediction for the query with the un-mirrored prediction for
/// the horizontally mirrored query.
inline SegmenterAnswer flip_average(ContourSegmenter& segmenter, const SegmenterQuery& query) {
    const SegmenterAnswer original = segmenter.predict(query);
    SegmenterQuery mirrored = query;
    mirrored.encoding = hflip(query.encoding);
    mirrored.geometry.hflip = !mirrored.geometry.hflip;
    const SegmenterAnswer flipped = segmenter.predict(mirrored);
    return {average(original.probabilities, hflip(flipped.probabilities))};
}

/// Next simulated click: pick the larger of the false-negative and
/// false-positive regions (ties go positive) and click its pixel farthest from
/// the region boundary, the image edge counting as boundary. Ties broken in
/// (y, x) order.
inline Click simulate_next_click(const BinaryMask& gt, const BinaryMask& pred) {
    require_same_dims(gt, pred, "simulate_next_click");
    if (gt == pred) throw MaskError("converged: prediction equals ground truth");
    const BinaryMask fn = mask_subtract(gt, pred);
    const BinaryMask fp = mask_subtract(pred, gt);
    const bool use_fn = fn.count() >= fp.count();
    const BinaryMask& region = use_fn ? fn : fp;

    const int W = gt.width();
    const int H = gt.height();
    const int pw = W + 2;
    const int ph = H + 2;
    std::vector<std::uint8_t> site(static_cast<std::size_t>(pw) * ph, 1);
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            if (region.get(x, y)) site[static_cast<std::size_t>(y + 1) * pw + (x + 1)] = 0;
        }
    }
    const std::vector<std::int64_t> dist = squared_edt(pw, ph, site.data());
    std::int64_t best = -1;
    int bx = 0, by = 0;
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            if (!region.get(x, y)) continue;
            const std::int64_t d = dist[static_cast<std::size_t>(y + 1) * pw + (x + 1)];
            if (d > best) {
                best = d;
                bx = x;
                by = y;
            }
        }
    }
    return Click{bx, by, use_fn ? ClickPolarity::positive : ClickPolarity::negative};
}

/// Smallest 1-based click count whose IoU reaches the single-contour IoU;
/// nullopt when the curve never gets there.
inline std::optional<int> equivalent_clicks(const std::vector<double>& click_curve,
                                            double iou_one_contour) {
    if (click_curve.empty()) throw MaskError("equivalent_clicks: empty curve");
    for (std::size_t i = 0; i < click_curve.size(); ++i) {
        if (click_curve[i] >= iou_one_contour) return static_cast<int>(i) + 1;
    }
    return std::nullopt;
}

namespace detail {

inline void sort_rows(std::vector<SampleResult>& rows) {
    std::sort(rows.begin(), rows.end(), [](const SampleResult& a, const SampleResult& b) {
        return a.image_id < b.image_id ||
               (a.image_id == b.image_id && a.annotation_number < b.annotation_number);
    });
}

} // namespace detail

/// Single-contour protocol: close and rasterize the annotated contours, encode
/// (empty previous), optionally Zoom-In and flip-average, threshold, score IoU
/// against the record's mask. Per-sample failures are recorded, not fatal.
inline EvalReport run_contour_eval(const ContourSegmenterFactory& factory,
                                   const DatasetIndex& dataset, const EvalConfig& config) {
    EvalReport report;
    report.config = config;
    report.rows.resize(dataset.records.size());

    const int workers = std::max(1, config.workers);
    std::vector<std::unique_ptr<ContourSegmenter>> segmenters;
    segmenters.reserve(workers);
    for (int i = 0; i < workers; ++i) segmenters.push_back(factory());

    parallel_for_workers(
        static_cast<int>(dataset.records.size()), workers, [&](int worker, int i) {
            const AnnotationRecord& rec = dataset.records[i];
            SampleResult row;
            row.image_id = rec.image_id;
            row.annotation_number = rec.annotation_number;
            try {
                const BinaryMask gt = pngio::read_mask_png(rec.mask_path);
                std::vector<ContourSource> pos(rec.pos_contours.begin(), rec.pos_contours.end());
                std::vector<ContourSource> neg(rec.neg_contours.begin(), rec.neg_contours.end());
                InteractionEncoding enc = encode_interaction(pos, neg, std::nullopt,
                                                             config.encoding, gt.width(),
                                                             gt.height());
                QueryGeometry geometry;
                std::optional<CropWindow> window;
                if (config.zoom_in) {
                    ZoomResult z = zoom_in(enc, config.expansion);
                    enc = std::move(z.encoding);
                    window = z.window;
                    geometry.crop = z.window;
                }
                const SegmenterQuery query{record_ref(rec), std::move(enc), 1, geometry};
                ContourSegmenter& seg = *segmenters[worker];
                const ProbabilityMask probs = config.flip_average
                                                  ? flip_average(seg, query).probabilities
                                                  : seg.predict(query).probabilities;
                const ProbabilityMask full =
                    window ? view::paste_back(probs, *window, gt.width(), gt.height()) : probs;
                row.iou_at_1 = iou(full.threshold(config.threshold), gt);
            } catch (const std::exception& e) {
                row.error = e.what();
            }
            report.rows[i] = std::move(row);
        });
    detail::sort_rows(report.rows);
    return report;
}

/// Click protocol: iterate simulated clicks up to max_clicks, recording the
/// IoU after each prediction; NoC@k is the first click reaching the target.
/// Zoom-In and flip averaging are contour-protocol features and are not
/// applied here (there is no contour to hypothesize a crop from).
inline EvalReport run_click_eval(const ClickSegmenterFactory& factory,
                                 const DatasetIndex& dataset, const EvalConfig& config) {
    EvalReport report;
    report.config = config;
    report.rows.resize(dataset.records.size());

    const int workers = std::max(1, config.workers);
    std::vector<std::unique_ptr<ClickSegmenter>> segmenters;
    segmenters.reserve(workers);
    for (int i = 0; i < workers; ++i) segmenters.push_back(factory());

    parallel_for_workers(
        static_cast<int>(dataset.records.size()), workers, [&](int worker, int i) {
            const AnnotationRecord& rec = dataset.records[i];
            SampleResult row;
            row.image_id = rec.image_id;
            row.annotation_number = rec.annotation_number;
            row.click_protocol = true;
            try {
                const BinaryMask gt = pngio::read_mask_png(rec.mask_path);
                ProbabilityMask previous(gt.width(), gt.height());
                BinaryMask pred(gt.width(), gt.height());
                std::vector<Click> clicks;
                for (int k = 1; k <= config.max_clicks; ++k) {
                    if (pred == gt) break; // converged; curve keeps its final value
                    clicks.push_back(simulate_next_click(gt, pred));
                    const ClickQuery query{record_ref(rec), gt.width(), gt.height(),
                                           clicks, previous, k};
                    previous = segmenters[worker]->predict(query).probabilities;
                    pred = previous.threshold(config.threshold);
                    row.iou_per_click.push_back(iou(pred, gt));
                }
                for (std::size_t k = 0; k < row.iou_per_click.size(); ++k) {
                    if (row.iou_per_click[k] >= config.target_iou) {
                        row.noc_at_k = static_cast<int>(k) + 1;
                        break;
                    }
                }
            } catch (const std::exception& e) {
                row.error = e.what();
            }
            report.rows[i] = std::move(row);
        });
    detail::sort_rows(report.rows);
    return report;
}

/// Merges single-contour IoUs into a click report and computes per-sample
/// equivalent clicks.
inline void attach_equivalent_clicks(EvalReport& click_report,
                                     const std::map<std::string, double>& contour_iou_by_ref) {
    for (SampleResult& row : click_report.rows) {
        const auto it = contour_iou_by_ref.find(row.ref());
        if (it == contour_iou_by_ref.end() || row.iou_per_click.empty()) continue;
        row.iou_at_1 = it->second;
        row.equivalent_clicks = equivalent_clicks(row.iou_per_click, it->second);
    }
}

struct MinedSample {
    std::string image_id;
    std::string annotation_number;
    GeneratedContour contour;
    double iou_with_gt = 0.0;
};

/// Fine-tuning-set mining: one random contour per instance, kept iff the
/// segmenter's prediction reaches IoU > iou_threshold against the ground
/// truth. Failed samples are skipped and logged.
inline std::vector<MinedSample> mine_finetune_set(const ContourSegmenterFactory& factory,
                                                  const DatasetIndex& dataset,
                                                  std::uint64_t seed, double iou_threshold,
                                                  const EvalConfig& config,
                                                  std::vector<std::string>* skipped = nullptr) {
    const int workers = std::max(1, config.workers);
    std::vector<std::unique_ptr<ContourSegmenter>> segmenters;
    segmenters.reserve(workers);
    for (int i = 0; i < workers; ++i) segmenters.push_back(factory());

    std::vector<std::optional<MinedSample>> kept(dataset.records.size());
    std::vector<std::string> errors(dataset.records.size());
    parallel_for_workers(
        static_cast<int>(dataset.records.size()), workers, [&](int worker, int i) {
            const AnnotationRecord& rec = dataset.records[i];
            try {
                const BinaryMask gt = pngio::read_mask_png(rec.mask_path);
                GeneratedContour gc =
                    generate_contour(gt, derive_key(seed, static_cast<std::uint64_t>(i)));
                InteractionEncoding enc = encode_interaction(
                    {ContourSource{gc.filled}}, {}, std::nullopt,
                    EncodingConfig{EncodingMode::filled, 0.02}, gt.width(), gt.height());
                const SegmenterQuery query{record_ref(rec), std::move(enc), 1, {}};
                const ProbabilityMask probs = segmenters[worker]->predict(query).probabilities;
                const double sample_iou = iou(probs.threshold(config.threshold), gt);
                if (sample_iou > iou_threshold) {
                    kept[i] = MinedSample{rec.image_id, rec.annotation_number, std::move(gc),
                                          sample_iou};
                }
            } catch (const std::exception& e) {
                errors[i] = record_ref(rec) + ": " + e.what();
            }
        });

    std::vector<MinedSample> out;
    for (std::size_t i = 0; i < kept.size(); ++i) {
        if (kept[i]) out.push_back(std::move(*kept[i]));
        if (skipped && !errors[i].empty()) skipped->push_back(errors[i]);
    }
    return out;
}

} // namespace contourkit
