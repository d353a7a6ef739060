#include "flamedet/cli_app.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "flamedet/cost.hpp"
#include "flamedet/dataset.hpp"
#include "flamedet/losses.hpp"
#include "flamedet/metrics.hpp"
#include "flamedet/postprocess.hpp"
#include "flamedet/runtime.hpp"

namespace fs = std::filesystem;

namespace flamedet {

namespace {

std::vector<double> parse_csv(const std::string& s, std::size_t expect = 0) {
    std::vector<double> vals;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            vals.push_back(std::stod(tok));
        } catch (...) {
            throw ConfigError("bad number in list: '" + tok + "'");
        }
    }
    if (expect != 0 && vals.size() != expect)
        throw ConfigError("expected " + std::to_string(expect) + " comma-separated values, got " +
                          std::to_string(vals.size()));
    return vals;
}

Box parse_box(const std::string& s) {
    const std::vector<double> v = parse_csv(s, 4);
    return Box{v[0], v[1], v[2], v[3]};
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open: " + path.string());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open for writing: " + path.string());
    out << text;
    if (!out) throw FormatError("write failed: " + path.string());
}

std::string fmt(const char* format, ...) {
    char buf[256];
    va_list ap;
    va_start(ap, format);
    std::vsnprintf(buf, sizeof buf, format, ap);
    va_end(ap);
    return buf;
}

void draw_box_outline(Image& img, const Box& b, int thickness) {
    const int x1 = std::clamp(static_cast<int>(std::lround(b.x1)), 0, img.width - 1);
    const int y1 = std::clamp(static_cast<int>(std::lround(b.y1)), 0, img.height - 1);
    const int x2 = std::clamp(static_cast<int>(std::lround(b.x2)), 0, img.width - 1);
    const int y2 = std::clamp(static_cast<int>(std::lround(b.y2)), 0, img.height - 1);
    auto paint = [&img](int x, int y) {
        std::uint8_t* p = img.px(x, y);
        p[0] = 255;
        p[1] = 0;
        p[2] = 0;
    };
    for (int t = 0; t < thickness; ++t) {
        const int yt = std::min(y1 + t, img.height - 1);
        const int yb = std::max(y2 - t, 0);
        for (int x = x1; x <= x2; ++x) {
            paint(x, yt);
            paint(x, yb);
        }
        const int xl = std::min(x1 + t, img.width - 1);
        const int xr = std::max(x2 - t, 0);
        for (int y = y1; y <= y2; ++y) {
            paint(xl, y);
            paint(xr, y);
        }
    }
}

// --- analyze ----------------------------------------------------------

struct AnalyzeOpts {
    std::string model = "v8s";
    int nc = 1;
    int imgsz = 640;
    std::string report;
};

int cmd_analyze(const AnalyzeOpts& o, std::ostream& out) {
    out << "config: cmd=analyze model=" << o.model << " nc=" << o.nc << " imgsz=" << o.imgsz
        << "\n";
    const Variant variant = variant_from_string(o.model);
    const ModelGraph graph = build_model(variant, o.nc, o.imgsz);
    const CostReport report = cost_report(graph, o.imgsz);

    out << fmt("%-16s %14s %16s %16s\n", "layer", "params", "macs", "mem_access");
    for (const CostRow& row : report.rows)
        out << fmt("%-16s %14llu %16llu %16llu\n", row.name.c_str(),
                   static_cast<unsigned long long>(row.params),
                   static_cast<unsigned long long>(row.macs),
                   static_cast<unsigned long long>(row.mem_access));
    out << fmt("total params: %llu (%.2fM)\n",
               static_cast<unsigned long long>(report.total_params),
               static_cast<double>(report.total_params) / 1e6);
    out << fmt("total flops: %llu (%.2fG at %d)\n",
               static_cast<unsigned long long>(report.total_flops),
               static_cast<double>(report.total_flops) / 1e9, o.imgsz);
    out << fmt("total mem_access: %llu\n",
               static_cast<unsigned long long>(report.total_mem_access));

    std::string reduction_line;
    if (variant == Variant::Light) {
        const ModelGraph base = build_model(Variant::V8s, o.nc, o.imgsz);
        const CostReport base_report = cost_report(base, o.imgsz);
        const double dp = 100.0 * (1.0 - static_cast<double>(report.total_params) /
                                             static_cast<double>(base_report.total_params));
        const double df = 100.0 * (1.0 - static_cast<double>(report.total_flops) /
                                             static_cast<double>(base_report.total_flops));
        reduction_line = fmt("reduction vs v8s: params -%.2f%% flops -%.2f%%", dp, df);
        out << reduction_line << "\n";
    }

    if (!o.report.empty()) {
        std::string text;
        text += "model: " + o.model + "\n";
        text += "nc: " + std::to_string(o.nc) + "\n";
        text += "imgsz: " + std::to_string(o.imgsz) + "\n";
        text += "layers: " + std::to_string(report.rows.size()) + "\n";
        for (std::size_t i = 0; i < report.rows.size(); ++i) {
            const CostRow& row = report.rows[i];
            const std::string key = "layer." + std::to_string(i);
            text += key + ".name: " + row.name + "\n";
            text += key + ".params: " + std::to_string(row.params) + "\n";
            text += key + ".macs: " + std::to_string(row.macs) + "\n";
            text += key + ".mem_access: " + std::to_string(row.mem_access) + "\n";
        }
        text += "total.params: " + std::to_string(report.total_params) + "\n";
        text += "total.macs: " + std::to_string(report.total_macs) + "\n";
        text += "total.flops: " + std::to_string(report.total_flops) + "\n";
        text += "total.mem_access: " + std::to_string(report.total_mem_access) + "\n";
        if (!reduction_line.empty()) text += reduction_line + "\n";
        write_file(o.report, text);
    }
    return 0;
}

// --- weights init -----------------------------------------------------

struct WeightsOpts {
    std::string model = "v8s";
    int nc = 1;
    int imgsz = 640;
    std::uint64_t seed = 0;
    std::string out_path;
};

int cmd_weights_init(const WeightsOpts& o, std::ostream& out) {
    out << "config: cmd=weights-init model=" << o.model << " nc=" << o.nc
        << " imgsz=" << o.imgsz << " seed=" << o.seed << " out=" << o.out_path << "\n";
    const ModelGraph graph = build_model(variant_from_string(o.model), o.nc, o.imgsz);
    const WeightStore store = init_weights(graph, o.seed);
    save_weights(store, o.out_path);
    out << "wrote " << store.entries.size() << " tensors to " << o.out_path << "\n";
    return 0;
}

// --- infer ------------------------------------------------------------

struct InferOpts {
    std::string model = "v8s";
    std::string weights;
    std::string image;
    int nc = 1;
    int imgsz = 640;
    double conf = 0.25;
    double iou = 0.65;
    std::string out_path;
    std::string draw_path;
};

int cmd_infer(const InferOpts& o, std::ostream& out) {
    out << "config: cmd=infer model=" << o.model << " weights=" << o.weights
        << " image=" << o.image << " nc=" << o.nc << " imgsz=" << o.imgsz << " conf=" << o.conf
        << " iou=" << o.iou << "\n";
    const ModelGraph graph = build_model(variant_from_string(o.model), o.nc, o.imgsz);
    WeightStore store = load_weights(o.weights);
    const RuntimeModel model(graph, store);

    Image image = read_ppm(o.image);
    const Letterboxed boxed = letterbox(image, o.imgsz);
    const RawOutputs raw = model.forward(boxed.input);
    std::vector<Detection> dets = nms(decode(raw, graph.reg_max, graph.nc, o.conf), o.iou);
    for (Detection& d : dets) d.box = unletterbox(d.box, boxed, image.width, image.height);

    const std::string text = write_predictions(dets);
    if (!o.out_path.empty())
        write_file(o.out_path, text);
    else
        out << text;
    out << "detections: " << dets.size() << "\n";

    if (!o.draw_path.empty()) {
        for (const Detection& d : dets) draw_box_outline(image, d.box, 2);
        write_ppm(image, o.draw_path);
    }
    return 0;
}

// --- eval -------------------------------------------------------------

struct EvalOpts {
    std::string pred_dir;
    std::string gt_root;
    std::string split = "test";
    double iou = 0.5;
    std::string report;
};

int cmd_eval(const EvalOpts& o, std::ostream& out, std::ostream& err) {
    out << "config: cmd=eval pred=" << o.pred_dir << " gt=" << o.gt_root
        << " split=" << o.split << " iou=" << o.iou << "\n";

    const fs::path img_dir = fs::path(o.gt_root) / "images" / o.split;
    const fs::path lbl_dir = fs::path(o.gt_root) / "labels" / o.split;
    if (!fs::is_directory(img_dir)) throw FormatError("missing directory: " + img_dir.string());
    if (!fs::is_directory(lbl_dir)) throw FormatError("missing directory: " + lbl_dir.string());

    std::vector<std::string> stems;
    for (const auto& e : fs::directory_iterator(img_dir))
        if (e.path().extension() == ".ppm") stems.push_back(e.path().stem().string());
    std::sort(stems.begin(), stems.end());

    std::vector<ImageSample> samples;
    for (const std::string& stem : stems) {
        ImageSample sample;
        const Image image = read_ppm(img_dir / (stem + ".ppm"));
        const fs::path lbl = lbl_dir / (stem + ".txt");
        if (fs::exists(lbl))
            for (const Annotation& a : parse_labels(read_file(lbl)))
                sample.gts.push_back({cxcywh_to_xyxy(a, image.width, image.height), a.class_id});
        const fs::path pred = fs::path(o.pred_dir) / (stem + ".txt");
        if (fs::exists(pred))
            sample.preds = parse_predictions(read_file(pred));
        else
            err << "warning: no prediction file for " << stem << "\n";
        samples.push_back(std::move(sample));
    }

    const EvalReport r = evaluate(samples, o.iou);
    out << fmt("images: %zu\n", samples.size());
    out << fmt("tp: %d fp: %d fn: %d (iou %.2f)\n", r.tp, r.fp, r.fn, o.iou);
    out << fmt("precision: %.4f\n", r.precision);
    out << fmt("recall: %.4f\n", r.recall);
    out << fmt("f1: %.4f\n", r.f1);
    for (const auto& [t, ap] : r.ap_per_threshold) out << fmt("ap@%d: %.4f\n", t, ap);
    out << fmt("map50: %.4f\n", r.map50);
    out << fmt("map50_95: %.4f\n", r.map50_95);

    if (!o.report.empty()) {
        std::string text;
        text += fmt("images: %zu\n", samples.size());
        text += fmt("iou: %.2f\n", o.iou);
        text += fmt("tp: %d\nfp: %d\nfn: %d\n", r.tp, r.fp, r.fn);
        text += fmt("precision: %.6f\nrecall: %.6f\nf1: %.6f\n", r.precision, r.recall, r.f1);
        for (const auto& [t, ap] : r.ap_per_threshold) text += fmt("ap@%d: %.6f\n", t, ap);
        text += fmt("map50: %.6f\nmap50_95: %.6f\n", r.map50, r.map50_95);
        write_file(o.report, text);
    }
    return 0;
}

// --- bench ------------------------------------------------------------

struct BenchOpts {
    std::string model = "v8s";
    std::string weights;
    int nc = 1;
    int imgsz = 640;
    int runs = 100;
    int warmup = 10;
};

int cmd_bench(const BenchOpts& o, std::ostream& out) {
    out << "config: cmd=bench model=" << o.model << " weights=" << o.weights << " nc=" << o.nc
        << " imgsz=" << o.imgsz << " runs=" << o.runs << " warmup=" << o.warmup << "\n";
    if (o.runs < 1) throw ConfigError("bench: runs must be >= 1");
    const Variant variant = variant_from_string(o.model);
    const ModelGraph graph = build_model(variant, o.nc, o.imgsz);
    WeightStore store = load_weights(o.weights);

    const BenchReport r = fps_bench(graph, store, o.runs, o.warmup);
    out << fmt("forward: p50 %.2f ms, p90 %.2f ms, p99 %.2f ms\n", r.forward_p50_ms,
               r.forward_p90_ms, r.forward_p99_ms);
    out << fmt("fps_forward: %.2f\n", r.fps_forward);
    out << fmt("end_to_end: p50 %.2f ms, p90 %.2f ms, p99 %.2f ms\n", r.e2e_p50_ms, r.e2e_p90_ms,
               r.e2e_p99_ms);
    out << fmt("fps_end_to_end: %.2f\n", r.fps_end_to_end);

    const CostReport cost = cost_report(graph, o.imgsz);
    out << fmt("model flops: %.2fG at %d\n", static_cast<double>(cost.total_flops) / 1e9,
               o.imgsz);
    if (variant == Variant::Light) {
        const CostReport base = cost_report(build_model(Variant::V8s, o.nc, o.imgsz), o.imgsz);
        out << fmt("mac ratio vs v8s: %.4f\n", static_cast<double>(cost.total_macs) /
                                                   static_cast<double>(base.total_macs));
    }
    return 0;
}

// --- dataset ----------------------------------------------------------

struct DatasetSplitOpts {
    std::string list_path;
    std::string dir_path;
    std::string ratio = "10,1,1";
    std::uint64_t seed = 0;
    std::string out_path;
};

int cmd_dataset_split(const DatasetSplitOpts& o, std::ostream& out) {
    out << "config: cmd=dataset-split list=" << o.list_path << " dir=" << o.dir_path
        << " ratio=" << o.ratio << " seed=" << o.seed << "\n";
    if (o.list_path.empty() == o.dir_path.empty())
        throw ConfigError("dataset split: provide exactly one of --list or --dir");

    std::vector<std::string> files;
    if (!o.list_path.empty()) {
        std::istringstream in(read_file(o.list_path));
        std::string line;
        while (std::getline(in, line)) {
            while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
            if (!line.empty()) files.push_back(line);
        }
    } else {
        if (!fs::is_directory(o.dir_path))
            throw FormatError("not a directory: " + o.dir_path);
        for (const auto& e : fs::directory_iterator(o.dir_path))
            if (e.path().extension() == ".ppm") files.push_back(e.path().filename().string());
    }

    const std::vector<double> r = parse_csv(o.ratio, 3);
    const std::array<int, 3> ratio{static_cast<int>(r[0]), static_cast<int>(r[1]),
                                   static_cast<int>(r[2])};
    const SplitManifest manifest = split_dataset(files, ratio, o.seed);

    std::string text;
    text += "seed: " + std::to_string(manifest.seed) + "\n";
    text += "total: " + std::to_string(manifest.assignments.size()) + "\n";
    text += "train: " + std::to_string(manifest.train_count) + "\n";
    text += "val: " + std::to_string(manifest.val_count) + "\n";
    text += "test: " + std::to_string(manifest.test_count) + "\n";
    for (const auto& [name, split] : manifest.assignments)
        text += name + " " + to_string(split) + "\n";
    if (!o.out_path.empty())
        write_file(o.out_path, text);
    else
        out << text;
    return 0;
}

struct DatasetAugmentOpts {
    std::string image;
    std::string labels;
    std::string op = "hflip";
    std::uint64_t seed = 0;
    std::string out_image;
    std::string out_labels;
};

int cmd_dataset_augment(const DatasetAugmentOpts& o, std::ostream& out) {
    out << "config: cmd=dataset-augment image=" << o.image << " labels=" << o.labels
        << " op=" << o.op << " seed=" << o.seed << "\n";
    const Image image = read_ppm(o.image);
    std::vector<Annotation> anns;
    if (!o.labels.empty()) anns = parse_labels(read_file(o.labels));

    AugmentOp op;
    op.kind = aug_kind_from_string(o.op);
    op.seed = o.seed;
    auto [aug_img, aug_anns] = augment(image, anns, op);

    write_ppm(aug_img, o.out_image);
    if (!o.out_labels.empty()) write_file(o.out_labels, write_labels(aug_anns));
    out << "boxes: " << aug_anns.size() << "\n";
    return 0;
}

struct DatasetValidateOpts {
    std::string root;
    std::string data_config;
};

int cmd_dataset_validate(const DatasetValidateOpts& o, std::ostream& out) {
    std::string root = o.root;
    if (root.empty() && !o.data_config.empty()) root = parse_data_config(o.data_config).root;
    out << "config: cmd=dataset-validate root=" << root << "\n";
    if (root.empty()) throw ConfigError("dataset validate: provide --root or --data");

    const DatasetReport report = validate_dataset(root);
    for (const auto& [split, stats] : report.per_split) {
        out << fmt("%s: images=%d labels=%d boxes=%d\n", split.c_str(), stats.images,
                   stats.labels, stats.boxes);
        for (const auto& [cls, cs] : stats.per_class)
            out << fmt("  class %d: boxes=%d mean_w=%.4f mean_h=%.4f\n", cls, cs.boxes, cs.mean_w,
                       cs.mean_h);
    }
    if (!report.ok()) {
        out << "violations: " << report.violations.size() << "\n";
        for (const std::string& v : report.violations) out << "  " << v << "\n";
        return 3;
    }
    out << "violations: 0\n";
    return 0;
}

// --- loss -------------------------------------------------------------

struct LossOpts {
    std::string kind;
    std::string pred, gt;
    int y = 1;
    double yhat = 0.5;
    std::string dist;
    double target = 0.0;
};

int cmd_loss(const LossOpts& o, std::ostream& out) {
    out << "config: cmd=loss kind=" << o.kind << "\n";
    double value = 0.0;
    if (o.kind == "ce") {
        if (o.y != 0 && o.y != 1) throw ConfigError("loss ce: --y must be 0 or 1");
        value = ce_loss(o.y, o.yhat);
    } else if (o.kind == "iou") {
        value = iou(parse_box(o.pred), parse_box(o.gt));
    } else if (o.kind == "giou" || o.kind == "diou" || o.kind == "ciou" || o.kind == "eiou") {
        value = iou_variant(iou_kind_from_string(o.kind), parse_box(o.pred), parse_box(o.gt));
    } else if (o.kind == "dfl") {
        const std::vector<double> dist = parse_csv(o.dist);
        value = dfl_loss(dist, o.target);
    } else {
        throw ConfigError("loss: unknown kind '" + o.kind + "'");
    }
    out << fmt("%.6f\n", value);
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"lightweight flame-detection engine and analysis toolkit"};
    app.require_subcommand(1);

    AnalyzeOpts analyze_opts;
    CLI::App* analyze = app.add_subcommand("analyze", "per-layer parameter/FLOPs report");
    analyze->add_option("--model", analyze_opts.model, "v8n|v8s|v8m|light")->required();
    analyze->add_option("--nc", analyze_opts.nc, "class count");
    analyze->add_option("--imgsz", analyze_opts.imgsz, "input size");
    analyze->add_option("--report", analyze_opts.report, "machine-readable report path");

    WeightsOpts weights_opts;
    CLI::App* weights = app.add_subcommand("weights", "weight container tools");
    weights->require_subcommand(1);
    CLI::App* weights_init = weights->add_subcommand("init", "write seeded initial weights");
    weights_init->add_option("--model", weights_opts.model, "v8n|v8s|v8m|light")->required();
    weights_init->add_option("--nc", weights_opts.nc, "class count");
    weights_init->add_option("--imgsz", weights_opts.imgsz, "input size");
    weights_init->add_option("--seed", weights_opts.seed, "rng seed");
    weights_init->add_option("--out", weights_opts.out_path, "output path")->required();

    InferOpts infer_opts;
    CLI::App* infer = app.add_subcommand("infer", "run detection on one image");
    infer->add_option("--model", infer_opts.model, "v8n|v8s|v8m|light")->required();
    infer->add_option("--weights", infer_opts.weights, "weight container")->required();
    infer->add_option("--image", infer_opts.image, "input PPM")->required();
    infer->add_option("--nc", infer_opts.nc, "class count");
    infer->add_option("--imgsz", infer_opts.imgsz, "input size");
    infer->add_option("--conf", infer_opts.conf, "confidence threshold");
    infer->add_option("--iou", infer_opts.iou, "NMS IoU threshold");
    infer->add_option("--out", infer_opts.out_path, "prediction file");
    infer->add_option("--draw", infer_opts.draw_path, "annotated PPM output");

    EvalOpts eval_opts;
    CLI::App* eval = app.add_subcommand("eval", "evaluate predictions against a dataset split");
    eval->add_option("--pred", eval_opts.pred_dir, "prediction directory")->required();
    eval->add_option("--gt", eval_opts.gt_root, "dataset root")->required();
    eval->add_option("--split", eval_opts.split, "train|val|test");
    eval->add_option("--iou", eval_opts.iou, "operating IoU threshold");
    eval->add_option("--report", eval_opts.report, "report file path");

    BenchOpts bench_opts;
    CLI::App* bench = app.add_subcommand("bench", "FPS/latency benchmark");
    bench->add_option("--model", bench_opts.model, "v8n|v8s|v8m|light")->required();
    bench->add_option("--weights", bench_opts.weights, "weight container")->required();
    bench->add_option("--nc", bench_opts.nc, "class count");
    bench->add_option("--imgsz", bench_opts.imgsz, "input size");
    bench->add_option("--runs", bench_opts.runs, "timed runs");
    bench->add_option("--warmup", bench_opts.warmup, "discarded warmup runs");

    CLI::App* dataset = app.add_subcommand("dataset", "dataset tooling");
    dataset->require_subcommand(1);

    DatasetSplitOpts split_opts;
    CLI::App* dsplit = dataset->add_subcommand("split", "deterministic train/val/test split");
    dsplit->add_option("--list", split_opts.list_path, "file with one name per line");
    dsplit->add_option("--dir", split_opts.dir_path, "directory of .ppm files");
    dsplit->add_option("--ratio", split_opts.ratio, "train,val,test ratio");
    dsplit->add_option("--seed", split_opts.seed, "shuffle seed");
    dsplit->add_option("--out", split_opts.out_path, "manifest output path");

    DatasetAugmentOpts aug_opts;
    CLI::App* daug = dataset->add_subcommand("augment", "apply one augmentation");
    daug->add_option("--image", aug_opts.image, "input PPM")->required();
    daug->add_option("--labels", aug_opts.labels, "input label file");
    daug->add_option("--op", aug_opts.op, "hflip|crop|occlude|noise|brightness")->required();
    daug->add_option("--seed", aug_opts.seed, "rng seed");
    daug->add_option("--out-image", aug_opts.out_image, "output PPM")->required();
    daug->add_option("--out-labels", aug_opts.out_labels, "output label file");

    DatasetValidateOpts val_opts;
    CLI::App* dval = dataset->add_subcommand("validate", "check layout, pairing, and labels");
    dval->add_option("--root", val_opts.root, "dataset root");
    dval->add_option("--data", val_opts.data_config, "dataset config file");

    LossOpts loss_opts;
    CLI::App* loss = app.add_subcommand("loss", "evaluate one loss value");
    loss->add_option("--kind", loss_opts.kind, "ce|iou|giou|diou|ciou|eiou|dfl")->required();
    loss->add_option("--pred", loss_opts.pred, "predicted box x1,y1,x2,y2");
    loss->add_option("--gt", loss_opts.gt, "ground-truth box x1,y1,x2,y2");
    loss->add_option("--y", loss_opts.y, "ce label (0 or 1)");
    loss->add_option("--yhat", loss_opts.yhat, "ce predicted probability");
    loss->add_option("--dist", loss_opts.dist, "dfl distribution p0,p1,...");
    loss->add_option("--target", loss_opts.target, "dfl target");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (analyze->parsed()) return cmd_analyze(analyze_opts, out);
        if (weights_init->parsed()) return cmd_weights_init(weights_opts, out);
        if (infer->parsed()) return cmd_infer(infer_opts, out);
        if (eval->parsed()) return cmd_eval(eval_opts, out, err);
        if (bench->parsed()) return cmd_bench(bench_opts, out);
        if (dsplit->parsed()) return cmd_dataset_split(split_opts, out);
        if (daug->parsed()) return cmd_dataset_augment(aug_opts, out);
        if (dval->parsed()) return cmd_dataset_validate(val_opts, out);
        if (loss->parsed()) return cmd_loss(loss_opts, out);
        err << "error: no subcommand\n";
        return 1;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        // Shape, format, and load errors: bad inputs or files.
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace flamedet
