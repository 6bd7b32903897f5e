// Batch front-end: every pipeline as a deterministic, scriptable subcommand.
// Exit codes: 0 success, 1 validator warnings, 2 failures, 64 usage, 70
// internal error. The resolved configuration and any fatal error are emitted
// as JSON on stderr.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "contourkit/dataset.hpp"
#include "contourkit/encoding.hpp"
#include "contourkit/eval.hpp"
#include "contourkit/generator.hpp"
#include "contourkit/parallel.hpp"
#include "contourkit/png_io.hpp"
#include "contourkit/reports.hpp"
#include "contourkit/segmenter.hpp"
#include "contourkit/wire.hpp"

namespace fs = std::filesystem;
using namespace contourkit;
using nlohmann::json;

namespace {

void echo_config(const std::string& command, const json& config) {
    json j;
    j["command"] = command;
    j["resolved_config"] = config;
    std::cerr << j.dump() << "\n";
}

void write_text(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

GroundTruthResolver make_resolver(const DatasetIndex& dataset) {
    auto paths = std::make_shared<std::map<std::string, fs::path>>();
    for (const AnnotationRecord& rec : dataset.records) {
        (*paths)[record_ref(rec)] = rec.mask_path;
    }
    return [paths](const std::string& ref) {
        const auto it = paths->find(ref);
        if (it == paths->end()) throw Error("unknown sample reference: " + ref);
        return pngio::read_mask_png(it->second);
    };
}

ContourSegmenterFactory make_contour_factory(const std::string& spec, const DatasetIndex& dataset,
                                             int timeout_ms) {
    if (spec == "oracle") {
        GroundTruthResolver resolver = make_resolver(dataset);
        return [resolver] { return std::make_unique<OracleSegmenter>(resolver); };
    }
    if (spec == "baseline") {
        return [] { return std::make_unique<FilledBaselineSegmenter>(); };
    }
    if (spec == "empty") {
        return [] { return std::make_unique<EmptySegmenter>(); };
    }
    if (spec.rfind("cmd:", 0) == 0) {
        wire::ExternalConfig config{spec.substr(4), timeout_ms};
        return [config] { return std::make_unique<ExternalContourSegmenter>(config); };
    }
    throw Error("unknown segmenter '" + spec + "' (expected oracle|baseline|empty|cmd:<command>)");
}

ClickSegmenterFactory make_click_factory(const std::string& spec, const DatasetIndex& dataset,
                                         int timeout_ms) {
    if (spec == "oracle") {
        GroundTruthResolver resolver = make_resolver(dataset);
        return [resolver] { return std::make_unique<OracleClickSegmenter>(resolver); };
    }
    if (spec == "empty") {
        return [] { return std::make_unique<EmptySegmenter>(); };
    }
    if (spec.rfind("cmd:", 0) == 0) {
        wire::ExternalConfig config{spec.substr(4), timeout_ms};
        return [config] { return std::make_unique<ExternalClickSegmenter>(config); };
    }
    throw Error("unknown click segmenter '" + spec + "' (expected oracle|empty|cmd:<command>)");
}

EncodingConfig make_encoding(const std::string& mode, double w) {
    if (mode == "filled") return {EncodingMode::filled, w};
    if (mode == "line") return {EncodingMode::line, w};
    throw Error("unknown encoding mode '" + mode + "'");
}

struct CommonEvalOpts {
    std::string dataset;
    std::string out;
    std::string segmenter = "oracle";
    std::string mode = "filled";
    double w = 0.02;
    double target_iou = 0.90;
    int max_clicks = 20;
    double threshold = 0.5;
    bool zoom = false;
    bool flip = false;
    double expansion = 1.4;
    int workers = 0;
    int timeout_ms = 30000;
};

EvalConfig to_eval_config(const CommonEvalOpts& o) {
    EvalConfig c;
    c.target_iou = o.target_iou;
    c.max_clicks = o.max_clicks;
    c.threshold = o.threshold;
    c.zoom_in = o.zoom;
    c.flip_average = o.flip;
    c.expansion = o.expansion;
    c.encoding = make_encoding(o.mode, o.w);
    c.workers = o.workers > 0 ? o.workers : default_worker_count();
    return c;
}

int run_generate(const std::string& dataset_dir, const std::string& out_dir, int n,
                 std::uint64_t seed, int workers) {
    const DatasetIndex dataset = load_dataset(dataset_dir);
    if (workers <= 0) workers = default_worker_count();
    echo_config("generate", {{"dataset", dataset_dir},
                             {"out", out_dir},
                             {"n", n},
                             {"seed", seed},
                             {"workers", workers}});

    std::vector<BinaryMask> gts;
    gts.reserve(dataset.records.size());
    for (const AnnotationRecord& rec : dataset.records) {
        gts.push_back(pngio::read_mask_png(rec.mask_path));
    }
    const int total = static_cast<int>(dataset.records.size()) * n;
    std::vector<GeneratedContour> results(total);
    parallel_for(total, workers, [&](int i) {
        results[i] = generate_contour(gts[i / n], derive_key(seed, static_cast<std::uint64_t>(i)));
    });

    const fs::path out_root(out_dir);
    fs::create_directories(out_root / "contours");
    std::string log;
    char suffix[16];
    for (int i = 0; i < total; ++i) {
        const AnnotationRecord& rec = dataset.records[i / n];
        std::snprintf(suffix, sizeof(suffix), "%04d", i % n);
        const std::string sample_id = record_ref(rec) + "__" + suffix;
        pngio::write_mask_png(out_root / "contours" / (sample_id + ".png"), results[i].filled);
        log += generation_log_line(sample_id, results[i].params, results[i].fallback_used,
                                   iou(results[i].filled, gts[i / n]));
        log += "\n";
    }
    write_text(out_root / "log.jsonl", log);
    std::cout << "generated " << total << " contours into " << out_dir << "\n";
    return 0;
}

int run_heatmap(const std::string& mask_path, const std::string& out_dir, int n,
                std::uint64_t seed, int line_width) {
    const BinaryMask gt = pngio::read_mask_png(mask_path);
    if (line_width <= 0) line_width = line_width_px(0.02, gt.width(), gt.height());
    echo_config("heatmap", {{"mask", mask_path},
                            {"out", out_dir},
                            {"n", n},
                            {"seed", seed},
                            {"line_width", line_width}});
    const std::vector<std::uint32_t> counts = generate_heatmap(gt, n, seed, line_width);
    fs::create_directories(out_dir);
    pngio::write_count_png(fs::path(out_dir) / "heatmap.png", counts, gt.width(), gt.height());
    std::cout << "heatmap of " << n << " contours written to " << out_dir << "\n";
    return 0;
}

int run_encode(const std::string& dataset_dir, const std::string& out_dir,
               const std::string& mode, double w) {
    const DatasetIndex dataset = load_dataset(dataset_dir);
    const EncodingConfig config = make_encoding(mode, w);
    echo_config("encode",
                {{"dataset", dataset_dir}, {"out", out_dir}, {"mode", mode}, {"w", w}});
    const fs::path enc_dir = fs::path(out_dir) / "encodings";
    fs::create_directories(enc_dir);
    for (const AnnotationRecord& rec : dataset.records) {
        const BinaryMask gt = pngio::read_mask_png(rec.mask_path);
        std::vector<ContourSource> pos(rec.pos_contours.begin(), rec.pos_contours.end());
        std::vector<ContourSource> neg(rec.neg_contours.begin(), rec.neg_contours.end());
        const InteractionEncoding enc =
            encode_interaction(pos, neg, std::nullopt, config, gt.width(), gt.height());
        write_encoding_pngs(enc, enc_dir, record_ref(rec));
    }
    std::cout << "encoded " << dataset.records.size() << " records into " << out_dir << "\n";
    return 0;
}

int run_validate(const std::string& dataset_dir) {
    echo_config("validate", {{"dataset", dataset_dir}});
    const DatasetIndex dataset = load_dataset(dataset_dir);
    for (const std::string& w : dataset.warnings) std::cout << "WARN dataset: " << w << "\n";
    const ValidationReport report = validate_dataset(dataset);
    for (const RecordValidation& rv : report.records) {
        const char* level = rv.level == FindingLevel::pass
                                ? "PASS"
                                : (rv.level == FindingLevel::warn ? "WARN" : "FAIL");
        std::cout << level << " " << rv.ref;
        if (rv.level != FindingLevel::pass) {
            for (const RecordFinding& f : rv.findings) {
                if (f.level != FindingLevel::pass) std::cout << " | " << f.message;
            }
        }
        std::cout << "\n";
    }
    std::cout << report.passed << " passed, " << report.warned << " warned, " << report.failed
              << " failed\n";
    if (report.records.empty() && !dataset.warnings.empty()) return 1;
    return report.exit_code();
}

int run_eval_contour(const CommonEvalOpts& o) {
    const DatasetIndex dataset = load_dataset(o.dataset);
    const EvalConfig config = to_eval_config(o);
    echo_config("eval-contour", {{"dataset", o.dataset},
                                 {"out", o.out},
                                 {"segmenter", o.segmenter},
                                 {"mode", o.mode},
                                 {"w", o.w},
                                 {"threshold", o.threshold},
                                 {"zoom_in", o.zoom},
                                 {"flip_average", o.flip},
                                 {"expansion", o.expansion},
                                 {"workers", config.workers},
                                 {"timeout_ms", o.timeout_ms}});
    const ContourSegmenterFactory factory =
        make_contour_factory(o.segmenter, dataset, o.timeout_ms);
    const EvalReport report = run_contour_eval(factory, dataset, config);
    const fs::path out_root(o.out);
    write_text(out_root / "report.csv", report_to_csv(report));
    write_text(out_root / "report.jsonl", report_to_jsonl(report));
    char mean[32];
    std::snprintf(mean, sizeof(mean), "%.2f", report.mean_iou1() * 100.0);
    std::cout << "mean IoU@1 = " << mean << " over " << report.rows.size() << " samples ("
              << report.error_count() << " errors)\n";
    return 0;
}

std::map<std::string, double> load_contour_ious(const fs::path& jsonl_path) {
    std::ifstream in(jsonl_path);
    if (!in) throw Error("cannot read contour report: " + jsonl_path.string());
    std::map<std::string, double> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        if (!j.contains("iou_at_1_contour")) continue;
        out[j["image_id"].get<std::string>() + "_" + j["annotation_number"].get<std::string>()] =
            j["iou_at_1_contour"].get<double>();
    }
    return out;
}

int run_eval_clicks(const CommonEvalOpts& o, const std::string& contour_report) {
    const DatasetIndex dataset = load_dataset(o.dataset);
    const EvalConfig config = to_eval_config(o);
    echo_config("eval-clicks", {{"dataset", o.dataset},
                                {"out", o.out},
                                {"segmenter", o.segmenter},
                                {"target_iou", o.target_iou},
                                {"max_clicks", o.max_clicks},
                                {"threshold", o.threshold},
                                {"workers", config.workers},
                                {"timeout_ms", o.timeout_ms},
                                {"contour_report", contour_report}});
    const ClickSegmenterFactory factory = make_click_factory(o.segmenter, dataset, o.timeout_ms);
    EvalReport report = run_click_eval(factory, dataset, config);
    std::optional<double> reference;
    if (!contour_report.empty()) {
        const auto ious = load_contour_ious(contour_report);
        attach_equivalent_clicks(report, ious);
        double sum = 0.0;
        if (!ious.empty()) {
            for (const auto& [ref, v] : ious) sum += v;
            reference = sum / static_cast<double>(ious.size());
        }
    }
    const fs::path out_root(o.out);
    write_text(out_root / "report.csv", report_to_csv(report));
    write_text(out_root / "report.jsonl", report_to_jsonl(report));
    const CurveExport curves = export_curves(report, reference);
    write_text(out_root / "curves.csv", curves.csv);
    write_text(out_root / "curves.svg", curves.svg);
    char noc[32];
    std::snprintf(noc, sizeof(noc), "%.2f", report.mean_noc());
    std::cout << "mean NoC@" << static_cast<int>(o.target_iou * 100 + 0.5) << " = " << noc
              << " over " << report.rows.size() << " samples (" << report.error_count()
              << " errors)\n";
    return 0;
}

int run_mine(const CommonEvalOpts& o, std::uint64_t seed, double iou_threshold) {
    const DatasetIndex dataset = load_dataset(o.dataset);
    const EvalConfig config = to_eval_config(o);
    echo_config("mine", {{"dataset", o.dataset},
                         {"out", o.out},
                         {"segmenter", o.segmenter},
                         {"seed", seed},
                         {"iou_threshold", iou_threshold},
                         {"workers", config.workers}});
    const ContourSegmenterFactory factory =
        make_contour_factory(o.segmenter, dataset, o.timeout_ms);
    std::vector<std::string> skipped;
    const std::vector<MinedSample> mined =
        mine_finetune_set(factory, dataset, seed, iou_threshold, config, &skipped);
    const fs::path out_root(o.out);
    fs::create_directories(out_root / "mined");
    std::string log;
    for (const MinedSample& m : mined) {
        const std::string sample_id = m.image_id + "_" + m.annotation_number;
        pngio::write_mask_png(out_root / "mined" / (sample_id + ".png"), m.contour.filled);
        log += generation_log_line(sample_id, m.contour.params, m.contour.fallback_used,
                                   m.iou_with_gt);
        log += "\n";
    }
    write_text(out_root / "mined.jsonl", log);
    for (const std::string& s : skipped) std::cerr << "skipped " << s << "\n";
    std::cout << "mined " << mined.size() << " of " << dataset.records.size() << " samples\n";
    return 0;
}

int run_export_samples(const std::string& dataset_dir, const std::string& out_dir,
                       std::uint64_t seed, int per_record, int workers) {
    const DatasetIndex dataset = load_dataset(dataset_dir);
    if (workers <= 0) workers = default_worker_count();
    echo_config("export-samples", {{"dataset", dataset_dir},
                                   {"out", out_dir},
                                   {"seed", seed},
                                   {"per_record", per_record},
                                   {"workers", workers}});
    std::vector<BinaryMask> gts;
    gts.reserve(dataset.records.size());
    for (const AnnotationRecord& rec : dataset.records) {
        gts.push_back(pngio::read_mask_png(rec.mask_path));
    }
    const int total = static_cast<int>(dataset.records.size()) * per_record;
    std::vector<TrainingSample> samples(total);
    parallel_for(total, workers, [&](int i) {
        samples[i] = synthesize_training_sample(gts[i / per_record],
                                                derive_key(seed, static_cast<std::uint64_t>(i)));
    });

    const fs::path samples_dir = fs::path(out_dir) / "samples";
    fs::create_directories(samples_dir);
    std::string manifest;
    char suffix[16];
    for (int i = 0; i < total; ++i) {
        const AnnotationRecord& rec = dataset.records[i / per_record];
        std::snprintf(suffix, sizeof(suffix), "%04d", i % per_record);
        const std::string sample_id = record_ref(rec) + "__" + suffix;
        const TrainingSample& s = samples[i];
        const bool positive = s.polarity == SamplePolarity::positive;
        const BinaryMask zeros(s.contour.width(), s.contour.height());
        InteractionEncoding enc{positive ? s.contour : zeros, positive ? zeros : s.contour,
                                ProbabilityMask::from_binary(s.previous_mask),
                                EncodingMode::filled};
        write_encoding_pngs(enc, samples_dir, sample_id);
        pngio::write_mask_png(samples_dir / (sample_id + "_target.png"), s.target);
        json j;
        j["sample_id"] = sample_id;
        j["polarity"] = positive ? "positive" : "negative";
        j["fallback_used"] = s.fallback_used;
        manifest += j.dump();
        manifest += "\n";
    }
    write_text(fs::path(out_dir) / "manifest.jsonl", manifest);
    std::cout << "exported " << total << " training samples into " << out_dir << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"contour-based interactive segmentation toolkit"};
    app.require_subcommand(1);
    app.set_config("--config");

    // generate
    std::string g_dataset, g_out;
    int g_n = 1, g_workers = 0;
    std::uint64_t g_seed = 0;
    CLI::App* gen = app.add_subcommand("generate", "simulate contours for every dataset record");
    gen->add_option("--dataset", g_dataset, "dataset root directory")->required();
    gen->add_option("--out", g_out, "output directory")->required();
    gen->add_option("--n", g_n, "contours per record");
    gen->add_option("--seed", g_seed, "master seed");
    gen->add_option("--workers", g_workers, "parallel workers (0 = logical CPUs)");

    // heatmap
    std::string h_mask, h_out;
    int h_n = 1000, h_lw = 0;
    std::uint64_t h_seed = 0;
    CLI::App* heat = app.add_subcommand("heatmap", "accumulate contour boundary lines for one mask");
    heat->add_option("--mask", h_mask, "ground-truth mask PNG")->required();
    heat->add_option("--out", h_out, "output directory")->required();
    heat->add_option("--n", h_n, "number of contours");
    heat->add_option("--seed", h_seed, "master seed");
    heat->add_option("--line-width", h_lw, "line width in pixels (0 = 2% of shorter side)");

    // encode
    std::string e_dataset, e_out, e_mode = "filled";
    double e_w = 0.02;
    CLI::App* enc = app.add_subcommand("encode", "render annotation encodings as PNG planes");
    enc->add_option("--dataset", e_dataset)->required();
    enc->add_option("--out", e_out)->required();
    enc->add_option("--mode", e_mode, "filled|line");
    enc->add_option("--w", e_w, "line width fraction of the shorter side");

    // validate
    std::string v_dataset;
    CLI::App* val = app.add_subcommand("validate", "check dataset layout and annotations");
    val->add_option("--dataset", v_dataset)->required();

    // eval-contour / eval-clicks / mine share options
    CommonEvalOpts ec;
    CLI::App* evc = app.add_subcommand("eval-contour", "single-contour IoU evaluation");
    evc->add_option("--dataset", ec.dataset)->required();
    evc->add_option("--out", ec.out)->required();
    evc->add_option("--segmenter", ec.segmenter, "oracle|baseline|empty|cmd:<command>");
    evc->add_option("--mode", ec.mode, "filled|line");
    evc->add_option("--w", ec.w, "line width fraction");
    evc->add_option("--threshold", ec.threshold, "binarization threshold");
    evc->add_flag("--zoom-in", ec.zoom, "crop to the contour bbox before inference");
    evc->add_flag("--flip-average", ec.flip, "average original and mirrored predictions");
    evc->add_option("--expansion", ec.expansion, "Zoom-In bbox growth factor");
    evc->add_option("--workers", ec.workers, "parallel workers (0 = logical CPUs)");
    evc->add_option("--timeout-ms", ec.timeout_ms, "external segmenter timeout");

    CommonEvalOpts ck;
    std::string ck_contour_report;
    CLI::App* evk = app.add_subcommand("eval-clicks", "NoC@k click evaluation");
    evk->add_option("--dataset", ck.dataset)->required();
    evk->add_option("--out", ck.out)->required();
    evk->add_option("--segmenter", ck.segmenter, "oracle|empty|cmd:<command>");
    evk->add_option("--target-iou", ck.target_iou, "the k of NoC@k, as a fraction");
    evk->add_option("--max-clicks", ck.max_clicks);
    evk->add_option("--threshold", ck.threshold);
    evk->add_flag("--zoom-in", ck.zoom, "accepted for parity; contour-protocol feature");
    evk->add_flag("--flip-average", ck.flip, "accepted for parity; contour-protocol feature");
    evk->add_option("--workers", ck.workers);
    evk->add_option("--timeout-ms", ck.timeout_ms);
    evk->add_option("--contour-report", ck_contour_report,
                    "report.jsonl from eval-contour; enables equivalent-clicks");

    CommonEvalOpts mn;
    std::uint64_t m_seed = 0;
    double m_threshold = 0.97;
    CLI::App* mine = app.add_subcommand("mine", "mine a fine-tuning set of easy contours");
    mine->add_option("--dataset", mn.dataset)->required();
    mine->add_option("--out", mn.out)->required();
    mine->add_option("--segmenter", mn.segmenter, "oracle|baseline|empty|cmd:<command>");
    mine->add_option("--seed", m_seed);
    mine->add_option("--iou-threshold", m_threshold, "keep samples with IoU above this");
    mine->add_option("--workers", mn.workers);
    mine->add_option("--timeout-ms", mn.timeout_ms);

    // export-samples
    std::string x_dataset, x_out;
    std::uint64_t x_seed = 0;
    int x_per = 1, x_workers = 0;
    CLI::App* exp = app.add_subcommand("export-samples", "synthesize training samples");
    exp->add_option("--dataset", x_dataset)->required();
    exp->add_option("--out", x_out)->required();
    exp->add_option("--seed", x_seed);
    exp->add_option("--per-record", x_per, "samples per record");
    exp->add_option("--workers", x_workers);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        nlohmann::json j;
        j["error"] = e.what();
        j["exit_code"] = 64;
        std::cerr << j.dump() << "\n";
        return 64;
    }

    try {
        if (gen->parsed()) return run_generate(g_dataset, g_out, g_n, g_seed, g_workers);
        if (heat->parsed()) return run_heatmap(h_mask, h_out, h_n, h_seed, h_lw);
        if (enc->parsed()) return run_encode(e_dataset, e_out, e_mode, e_w);
        if (val->parsed()) return run_validate(v_dataset);
        if (evc->parsed()) return run_eval_contour(ec);
        if (evk->parsed()) return run_eval_clicks(ck, ck_contour_report);
        if (mine->parsed()) return run_mine(mn, m_seed, m_threshold);
        if (exp->parsed()) return run_export_samples(x_dataset, x_out, x_seed, x_per, x_workers);
        return 64;
    } catch (const Error& e) {
        nlohmann::json j;
        j["error"] = e.what();
        j["exit_code"] = 2;
        std::cerr << j.dump() << "\n";
        return 2;
    } catch (const std::exception& e) {
        nlohmann::json j;
        j["error"] = e.what();
        j["exit_code"] = 70;
        std::cerr << j.dump() << "\n";
        return 70;
    }
}
