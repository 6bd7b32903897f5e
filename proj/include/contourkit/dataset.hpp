#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "contourkit/errors.hpp"
#include "contourkit/mask.hpp"
#include "contourkit/png_io.hpp"
#include "contourkit/polygon.hpp"

namespace contourkit {

/// One annotator's labeling of one image: polygon contours in normalized
/// coordinates plus the matching instance-mask PNG.
struct AnnotationRecord {
    std::string image_id;
    std::string annotation_number; // two digits, "01" upward
    std::vector<ContourPolygon> pos_contours;
    std::vector<ContourPolygon> neg_contours;
    std::filesystem::path mask_path;
};

inline std::string record_ref(const AnnotationRecord& r) {
    return r.image_id + "_" + r.annotation_number;
}

struct DatasetIndex {
    std::filesystem::path root;
    std::vector<AnnotationRecord> records; // sorted by (image_id, annotation_number)
    std::map<std::string, std::filesystem::path> images;
    std::vector<std::string> warnings;
};

namespace detail {

inline std::string two_digit(int n) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%02d", n);
    return buf;
}

inline ContourPolygon parse_contour(const nlohmann::json& arr, const std::string& where) {
    if (!arr.is_array() || arr.size() < 2) {
        throw DatasetError("malformed contour (need >= 2 [x, y] vertices) at " + where);
    }
    ContourPolygon poly;
    poly.vertices.reserve(arr.size());
    for (const auto& v : arr) {
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
            throw DatasetError("malformed contour vertex (expected [x, y]) at " + where);
        }
        poly.vertices.push_back({v[0].get<double>(), v[1].get<double>()});
    }
    return poly;
}

} // namespace detail

/// Reads the on-disk layout: images/ + masks/ + contours.json, where
/// contours.json maps image ids to per-annotator {pos_contours, neg_contours}
/// lists and masks follow the [IMAGE_ID]_[ANNOTATION_NUMBER].png convention.
inline DatasetIndex load_dataset(const std::filesystem::path& root) {
    namespace fs = std::filesystem;
    const fs::path images_dir = root / "images";
    const fs::path masks_dir = root / "masks";
    const fs::path json_path = root / "contours.json";
    if (!fs::is_directory(images_dir)) throw DatasetError("missing directory: " + images_dir.string());
    if (!fs::is_directory(masks_dir)) throw DatasetError("missing directory: " + masks_dir.string());
    if (!fs::is_regular_file(json_path)) throw DatasetError("missing file: " + json_path.string());

    std::ifstream in(json_path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw DatasetError(std::string("malformed contours.json: ") + e.what());
    }
    if (!doc.is_object()) throw DatasetError("contours.json: top level must be an object");

    DatasetIndex index;
    index.root = root;
    if (doc.empty()) index.warnings.push_back("no annotations");

    for (auto it = doc.begin(); it != doc.end(); ++it) { // nlohmann iterates keys sorted
        const std::string& image_id = it.key();
        const nlohmann::json& annots = it.value();
        if (!annots.is_array()) {
            throw DatasetError("contours.json: value for image '" + image_id +
                               "' must be a list of annotations");
        }
        fs::path image_path = images_dir / (image_id + ".jpg");
        if (!fs::is_regular_file(image_path)) {
            throw DatasetError("missing image file: " + image_path.string());
        }
        index.images[image_id] = image_path;

        int number = 0;
        for (const nlohmann::json& annot : annots) {
            ++number;
            AnnotationRecord rec;
            rec.image_id = image_id;
            rec.annotation_number = detail::two_digit(number);
            const std::string where = image_id + " annotation " + rec.annotation_number;
            if (!annot.is_object() || !annot.contains("pos_contours") ||
                !annot.contains("neg_contours")) {
                throw DatasetError("annotation missing pos_contours/neg_contours keys at " + where);
            }
            for (const auto& c : annot["pos_contours"]) {
                rec.pos_contours.push_back(detail::parse_contour(c, where));
            }
            for (const auto& c : annot["neg_contours"]) {
                rec.neg_contours.push_back(detail::parse_contour(c, where));
            }
            rec.mask_path = masks_dir / (image_id + "_" + rec.annotation_number + ".png");
            if (!fs::is_regular_file(rec.mask_path)) {
                throw DatasetError("missing mask file: " + rec.mask_path.string());
            }
            index.records.push_back(std::move(rec));
        }
    }
    return index;
}

/// Best-effort image dimensions from a JPEG's SOF header without decoding any
/// pixel data. Returns nullopt when no SOF marker is found.
inline std::optional<std::pair<int, int>> jpeg_dimensions(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    auto byte = [&]() -> int { return in.get(); };
    if (byte() != 0xFF || byte() != 0xD8) return std::nullopt; // SOI
    for (;;) {
        int b = byte();
        if (b < 0) return std::nullopt;
        if (b != 0xFF) continue;
        int marker = byte();
        while (marker == 0xFF) marker = byte();
        if (marker < 0) return std::nullopt;
        if (marker == 0xD9 || marker == 0xDA) return std::nullopt; // EOI / start of scan
        if (marker >= 0xD0 && marker <= 0xD7) continue;            // standalone RSTn
        const int len_hi = byte();
        const int len_lo = byte();
        if (len_hi < 0 || len_lo < 0) return std::nullopt;
        const int seg_len = (len_hi << 8) | len_lo;
        const bool is_sof = (marker >= 0xC0 && marker <= 0xCF) && marker != 0xC4 &&
                            marker != 0xC8 && marker != 0xCC;
        if (is_sof) {
            if (seg_len < 7) return std::nullopt;
            byte(); // sample precision
            const int h = (byte() << 8) | byte();
            const int w = (byte() << 8) | byte();
            if (w <= 0 || h <= 0) return std::nullopt;
            return std::make_pair(w, h);
        }
        in.seekg(seg_len - 2, std::ios::cur);
        if (!in) return std::nullopt;
    }
}

enum class FindingLevel { pass, warn, fail };

struct RecordFinding {
    FindingLevel level = FindingLevel::pass;
    std::string message;
};

struct RecordValidation {
    std::string ref;
    FindingLevel level = FindingLevel::pass;
    std::vector<RecordFinding> findings;
};

struct ValidationReport {
    std::vector<RecordValidation> records;
    int passed = 0;
    int warned = 0;
    int failed = 0;

    /// 0 = all pass, 1 = warnings only, 2 = any failure.
    int exit_code() const { return failed > 0 ? 2 : (warned > 0 ? 1 : 0); }
};

/// Per-record checks: coordinates inside [0,1] (warning), mask readable and
/// nonempty, mask dims consistent with the image (JPEG header when parseable,
/// sibling masks otherwise), at least one positive contour, and the rasterized
/// closed positive contours overlapping the mask — the ambiguity guard.
inline ValidationReport validate_dataset(const DatasetIndex& index) {
    ValidationReport report;
    std::map<std::string, std::pair<int, int>> mask_dims_by_image;

    for (const AnnotationRecord& rec : index.records) {
        RecordValidation rv;
        rv.ref = record_ref(rec);
        auto add = [&rv](FindingLevel level, std::string msg) {
            rv.findings.push_back({level, std::move(msg)});
            if (level == FindingLevel::fail) {
                rv.level = FindingLevel::fail;
            } else if (level == FindingLevel::warn && rv.level == FindingLevel::pass) {
                rv.level = FindingLevel::warn;
            }
        };

        bool coords_ok = true;
        auto scan_coords = [&](const std::vector<ContourPolygon>& list) {
            for (const ContourPolygon& poly : list) {
                for (const Point& p : poly.vertices) {
                    if (p.x < 0.0 || p.x > 1.0 || p.y < 0.0 || p.y > 1.0) coords_ok = false;
                }
            }
        };
        scan_coords(rec.pos_contours);
        scan_coords(rec.neg_contours);
        if (!coords_ok) {
            add(FindingLevel::warn, "contour coordinates outside [0,1]");
        }

        if (rec.pos_contours.empty()) {
            add(FindingLevel::fail, "no positive contour");
        }

        std::optional<BinaryMask> mask;
        try {
            mask = pngio::read_mask_png(rec.mask_path);
        } catch (const std::exception& e) {
            add(FindingLevel::fail, std::string("unreadable mask: ") + e.what());
        }
        if (mask) {
            const auto img_it = index.images.find(rec.image_id);
            std::optional<std::pair<int, int>> expected;
            if (img_it != index.images.end()) expected = jpeg_dimensions(img_it->second);
            if (!expected) {
                const auto sibling = mask_dims_by_image.find(rec.image_id);
                if (sibling != mask_dims_by_image.end()) expected = sibling->second;
            }
            if (expected && (mask->width() != expected->first || mask->height() != expected->second)) {
                add(FindingLevel::fail, "mask dimensions do not match the image");
            }
            mask_dims_by_image.emplace(rec.image_id,
                                       std::make_pair(mask->width(), mask->height()));

            if (mask->empty()) {
                add(FindingLevel::fail, "mask is empty");
            } else if (!rec.pos_contours.empty()) {
                BinaryMask pos_fill(mask->width(), mask->height());
                for (const ContourPolygon& poly : rec.pos_contours) {
                    if (poly.vertices.size() < 2) continue;
                    pos_fill = mask_or(
                        pos_fill,
                        rasterize_polygon(close_contour(poly), mask->width(), mask->height())
                            .mask);
                }
                if (iou(pos_fill, *mask) == 0.0) {
                    add(FindingLevel::fail, "positive contour disjoint from mask (IoU=0)");
                }
            }
        }

        if (rv.findings.empty()) add(FindingLevel::pass, "ok");
        switch (rv.level) {
        case FindingLevel::pass: ++report.passed; break;
        case FindingLevel::warn: ++report.warned; break;
        case FindingLevel::fail: ++report.failed; break;
        }
        report.records.push_back(std::move(rv));
    }
    return report;
}

/// Emits the annotation JSON with 6-decimal coordinates and sorted keys;
/// byte-stable for identical indexes.
inline std::string serialize_annotations(const DatasetIndex& index) {
    std::map<std::string, std::vector<const AnnotationRecord*>> by_image;
    for (const AnnotationRecord& rec : index.records) {
        by_image[rec.image_id].push_back(&rec);
    }
    std::string out = "{";
    bool first_image = true;
    char buf[32];
    auto append_contours = [&out, &buf](const std::vector<ContourPolygon>& list) {
        out += "[";
        for (std::size_t i = 0; i < list.size(); ++i) {
            if (i) out += ",";
            out += "[";
            const auto& vs = list[i].vertices;
            for (std::size_t j = 0; j < vs.size(); ++j) {
                if (j) out += ",";
                std::snprintf(buf, sizeof(buf), "[%.6f,%.6f]", vs[j].x, vs[j].y);
                out += buf;
            }
            out += "]";
        }
        out += "]";
    };
    for (const auto& [image_id, recs] : by_image) {
        if (!first_image) out += ",";
        first_image = false;
        out += "\"" + image_id + "\":[";
        for (std::size_t i = 0; i < recs.size(); ++i) {
            if (i) out += ",";
            out += "{\"neg_contours\":";
            append_contours(recs[i]->neg_contours);
            out += ",\"pos_contours\":";
            append_contours(recs[i]->pos_contours);
            out += "}";
        }
        out += "]";
    }
    out += "}";
    return out;
}

} // namespace contourkit
