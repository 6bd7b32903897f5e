#pragma once

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "contourkit/eval.hpp"
#include "contourkit/generator.hpp"

namespace contourkit {

namespace detail {

inline std::string percent2(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", fraction * 100.0);
    return buf;
}

inline std::string num2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

} // namespace detail

/// Per-sample report CSV. IoU values are percentages with two decimals to
/// match the usual benchmark tables; unreached NoC prints "not reached",
/// unattained equivalent clicks prints "beyond max".
inline std::string report_to_csv(const EvalReport& report) {
    std::string out =
        "image_id,annotation,iou_at_1_contour,noc_at_k,equivalent_clicks,fallback_used,error\n";
    for (const SampleResult& r : report.rows) {
        out += r.image_id + "," + r.annotation_number + ",";
        out += r.iou_at_1 ? detail::percent2(*r.iou_at_1) : std::string();
        out += ",";
        if (r.click_protocol) {
            out += r.noc_at_k ? std::to_string(*r.noc_at_k) : std::string("not reached");
        }
        out += ",";
        if (r.click_protocol && r.iou_at_1) {
            out += r.equivalent_clicks ? std::to_string(*r.equivalent_clicks)
                                       : std::string("beyond max");
        }
        out += ",";
        out += r.fallback_used ? "1" : "0";
        out += ",";
        if (r.error) {
            std::string msg = *r.error;
            for (char& c : msg) {
                if (c == ',' || c == '\n') c = ';';
            }
            out += msg;
        }
        out += "\n";
    }
    return out;
}

/// Per-sample JSON-lines log (one object per row, sorted keys).
inline std::string report_to_jsonl(const EvalReport& report) {
    std::string out;
    for (const SampleResult& r : report.rows) {
        nlohmann::json j;
        j["image_id"] = r.image_id;
        j["annotation_number"] = r.annotation_number;
        if (r.iou_at_1) j["iou_at_1_contour"] = *r.iou_at_1;
        if (r.click_protocol) {
            j["iou_per_click"] = r.iou_per_click;
            if (r.noc_at_k) {
                j["noc_at_k"] = *r.noc_at_k;
            } else {
                j["noc_at_k"] = "not reached";
            }
            if (r.iou_at_1) {
                if (r.equivalent_clicks) {
                    j["equivalent_clicks"] = *r.equivalent_clicks;
                } else {
                    j["equivalent_clicks"] = "beyond max";
                }
            }
        }
        j["fallback_used"] = r.fallback_used;
        if (r.error) j["error"] = *r.error;
        out += j.dump();
        out += "\n";
    }
    return out;
}

struct CurveExport {
    std::string csv;
    std::string svg;
};

/// Curve CSV plus a deterministic SVG: the per-click mean-IoU series and a
/// horizontal reference line at the single-contour IoU.
inline CurveExport export_curves(const std::vector<double>& mean_curve,
                                 std::optional<double> contour_iou) {
    CurveExport out;
    out.csv = "clicks,mean_iou,contour_iou\n";
    for (std::size_t i = 0; i < mean_curve.size(); ++i) {
        out.csv += std::to_string(i + 1) + "," + detail::percent2(mean_curve[i]) + ",";
        if (contour_iou) out.csv += detail::percent2(*contour_iou);
        out.csv += "\n";
    }

    // fixed 640x480 canvas; x = clicks, y = IoU %
    const double x0 = 60, x1 = 620, y0 = 440, y1 = 20;
    const int n = static_cast<int>(mean_curve.size());
    auto map_x = [&](double click) {
        return n <= 1 ? x0 : x0 + (click - 1.0) / (n - 1.0) * (x1 - x0);
    };
    auto map_y = [&](double frac) { return y0 + frac * (y1 - y0); };
    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
           "viewBox=\"0 0 640 480\">\n";
    svg += "<rect x=\"0\" y=\"0\" width=\"640\" height=\"480\" fill=\"white\"/>\n";
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n",
                  x0, y0, x1, y0);
    svg += buf;
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n",
                  x0, y0, x0, y1);
    svg += buf;
    for (int pct = 0; pct <= 100; pct += 20) {
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\" text-anchor=\"end\">%d</text>\n",
                      x0 - 6.0, map_y(pct / 100.0) + 4.0, pct);
        svg += buf;
    }
    if (n > 0) {
        svg += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
        for (int i = 0; i < n; ++i) {
            std::snprintf(buf, sizeof(buf), "%s%.2f,%.2f", i ? " " : "", map_x(i + 1.0),
                          map_y(mean_curve[i]));
            svg += buf;
        }
        svg += "\"/>\n";
        for (int i = 0; i < n; ++i) {
            std::snprintf(buf, sizeof(buf),
                          "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"#1f77b4\"/>\n",
                          map_x(i + 1.0), map_y(mean_curve[i]));
            svg += buf;
        }
    }
    if (contour_iou) {
        std::snprintf(buf, sizeof(buf),
                      "<line x1=\"%.1f\" y1=\"%.2f\" x2=\"%.1f\" y2=\"%.2f\" stroke=\"#d62728\" "
                      "stroke-width=\"2\" stroke-dasharray=\"6,4\"/>\n",
                      x0, map_y(*contour_iou), x1, map_y(*contour_iou));
        svg += buf;
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%.1f\" y=\"%.2f\" font-size=\"12\" fill=\"#d62728\">single "
                      "contour %s</text>\n",
                      x0 + 8.0, map_y(*contour_iou) - 6.0, detail::percent2(*contour_iou).c_str());
        svg += buf;
    }
    svg += "<text x=\"340\" y=\"470\" font-size=\"12\" text-anchor=\"middle\">clicks</text>\n";
    svg += "<text x=\"16\" y=\"230\" font-size=\"12\" transform=\"rotate(-90 16 230)\" "
           "text-anchor=\"middle\">mean IoU, %</text>\n";
    svg += "</svg>\n";
    out.svg = svg;
    return out;
}

inline CurveExport export_curves(const EvalReport& report,
                                 std::optional<double> contour_iou = std::nullopt) {
    std::optional<double> reference = contour_iou;
    if (!reference) {
        for (const SampleResult& r : report.rows) {
            if (r.iou_at_1) {
                reference = report.mean_iou1();
                break;
            }
        }
    }
    return export_curves(report.mean_curve(), reference);
}

/// One generation-log line: every sampled parameter, the fallback flag, and
/// the IoU against the source mask.
inline std::string generation_log_line(const std::string& sample_id,
                                       const GenerationParams& p, bool fallback_used,
                                       double iou_with_gt) {
    nlohmann::json j;
    j["sample_id"] = sample_id;
    j["morph_kind"] = p.morph_kind == MorphKind::dilate ? "dilate" : "erode";
    j["d_morph"] = p.d_morph;
    j["d_affine"] = p.d_affine;
    j["d_sigma"] = p.d_sigma;
    j["d_alpha"] = p.d_alpha;
    j["d_size"] = p.d_size;
    j["convexity_ratio"] = p.convexity;
    j["d_scale"] = p.d_scale;
    j["d_x"] = p.d_x;
    j["d_y"] = p.d_y;
    j["shift_x"] = p.shift_x;
    j["shift_y"] = p.shift_y;
    j["seed"] = p.seed;
    j["fallback_used"] = fallback_used;
    j["iou_with_gt"] = iou_with_gt;
    return j.dump();
}

} // namespace contourkit
