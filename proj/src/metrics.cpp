#include "flamedet/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "flamedet/dataset.hpp"

namespace flamedet {

namespace {

bool pred_order(const Detection& a, const Detection& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.class_id != b.class_id) return a.class_id < b.class_id;
    if (a.box.x1 != b.box.x1) return a.box.x1 < b.box.x1;
    if (a.box.y1 != b.box.y1) return a.box.y1 < b.box.y1;
    if (a.box.x2 != b.box.x2) return a.box.x2 < b.box.x2;
    return a.box.y2 < b.box.y2;
}

bool flag_order(const ScoredFlag& a, const ScoredFlag& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.class_id != b.class_id) return a.class_id < b.class_id;
    if (a.box.x1 != b.box.x1) return a.box.x1 < b.box.x1;
    if (a.box.y1 != b.box.y1) return a.box.y1 < b.box.y1;
    if (a.box.x2 != b.box.x2) return a.box.x2 < b.box.x2;
    if (a.box.y2 != b.box.y2) return a.box.y2 < b.box.y2;
    return a.tp && !b.tp;
}

double percentile(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return 0.0;
    const std::size_t idx = static_cast<std::size_t>(
        std::min<double>(sorted.size() - 1, std::ceil(q * sorted.size()) - 1));
    return sorted[std::max<std::size_t>(idx, 0)];
}

}  // namespace

MatchResult match(const std::vector<Detection>& preds, const std::vector<GroundTruth>& gts,
                  double iou_thresh) {
    std::vector<int> order(preds.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&preds](int a, int b) { return pred_order(preds[a], preds[b]); });

    MatchResult result;
    result.tp.assign(preds.size(), false);
    std::vector<bool> gt_used(gts.size(), false);

    for (int pi : order) {
        const Detection& p = preds[pi];
        int best_gt = -1;
        double best_iou = iou_thresh;
        for (std::size_t gi = 0; gi < gts.size(); ++gi) {
            if (gt_used[gi] || gts[gi].class_id != p.class_id) continue;
            const double v = iou(p.box, gts[gi].box);
            if (v > best_iou || (v == best_iou && v >= iou_thresh && best_gt == -1)) {
                best_iou = v;
                best_gt = static_cast<int>(gi);
            }
        }
        if (best_gt >= 0) {
            gt_used[best_gt] = true;
            result.tp[pi] = true;
        }
    }
    for (bool used : gt_used)
        if (!used) ++result.fn;
    return result;
}

double f1_score(double precision, double recall) {
    const double sum = precision + recall;
    return sum > 0.0 ? 2.0 * precision * recall / sum : 0.0;
}

PrF1 pr_f1(int tp, int fp, int fn) {
    PrF1 out;
    out.precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
    out.recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
    out.f1 = f1_score(out.precision, out.recall);
    return out;
}

PrF1 pr_f1(const std::vector<bool>& flags, int fn_count) {
    int tp = 0;
    for (bool f : flags) tp += f ? 1 : 0;
    return pr_f1(tp, static_cast<int>(flags.size()) - tp, fn_count);
}

double average_precision(std::vector<ScoredFlag> flags, int total_gt) {
    if (total_gt <= 0) return 0.0;
    std::sort(flags.begin(), flags.end(), flag_order);

    std::vector<double> precision(flags.size()), recall(flags.size());
    int tp = 0;
    for (std::size_t i = 0; i < flags.size(); ++i) {
        tp += flags[i].tp ? 1 : 0;
        precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
        recall[i] = static_cast<double>(tp) / total_gt;
    }

    // Precision envelope: running max from the right.
    for (std::size_t i = flags.size(); i-- > 1;)
        precision[i - 1] = std::max(precision[i - 1], precision[i]);

    double sum = 0.0;
    std::size_t j = 0;
    for (int r = 0; r <= 100; ++r) {
        const double target = r / 100.0;
        while (j < flags.size() && recall[j] < target - 1e-12) ++j;
        if (j < flags.size()) sum += precision[j];
    }
    return sum / 101.0;
}

namespace {

EvalReport evaluate_impl(const std::vector<ImageSample>& samples, double op_iou) {
    EvalReport report;
    int total_gt = 0;
    for (const ImageSample& s : samples) total_gt += static_cast<int>(s.gts.size());

    // Operating point.
    for (const ImageSample& s : samples) {
        const MatchResult m = match(s.preds, s.gts, op_iou);
        for (bool f : m.tp) (f ? report.tp : report.fp) += 1;
        report.fn += m.fn;
    }
    const PrF1 p = pr_f1(report.tp, report.fp, report.fn);
    report.precision = p.precision;
    report.recall = p.recall;
    report.f1 = p.f1;

    // AP across thresholds 0.50 .. 0.95.
    for (int t = 50; t <= 95; t += 5) {
        std::vector<ScoredFlag> flags;
        for (const ImageSample& s : samples) {
            const MatchResult m = match(s.preds, s.gts, t / 100.0);
            for (std::size_t i = 0; i < s.preds.size(); ++i)
                flags.push_back({s.preds[i].score, m.tp[i], s.preds[i].class_id, s.preds[i].box});
        }
        report.ap_per_threshold[t] = average_precision(std::move(flags), total_gt);
    }
    report.map50 = report.ap_per_threshold[50];
    double sum = 0.0;
    for (const auto& [t, ap] : report.ap_per_threshold) sum += ap;
    report.map50_95 = sum / static_cast<double>(report.ap_per_threshold.size());
    return report;
}

}  // namespace

EvalReport evaluate(const std::vector<ImageSample>& samples, double op_iou) {
    return evaluate_impl(samples, op_iou);
}

std::pair<double, double> map50_95(const std::vector<ImageSample>& samples) {
    const EvalReport r = evaluate_impl(samples, 0.5);
    return {r.map50, r.map50_95};
}

std::vector<Detection> parse_predictions(const std::string& text) {
    std::vector<Detection> out;
    std::istringstream stream(text);
    std::string line;
    int line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        std::istringstream fields(line);
        int cls;
        double score, x1, y1, x2, y2;
        if (!(fields >> cls)) continue;  // blank line
        if (!(fields >> score >> x1 >> y1 >> x2 >> y2))
            throw FormatError("prediction line " + std::to_string(line_no) +
                              ": expected 'class score x1 y1 x2 y2'");
        std::string extra;
        if (fields >> extra)
            throw FormatError("prediction line " + std::to_string(line_no) + ": trailing token '" +
                              extra + "'");
        out.push_back({Box{x1, y1, x2, y2}, score, cls});
    }
    return out;
}

std::string write_predictions(const std::vector<Detection>& dets) {
    std::string out;
    char buf[192];
    for (const Detection& d : dets) {
        std::snprintf(buf, sizeof buf, "%d %.6f %.4f %.4f %.4f %.4f\n", d.class_id, d.score,
                      d.box.x1, d.box.y1, d.box.x2, d.box.y2);
        out += buf;
    }
    return out;
}

std::vector<double> time_loop(const std::function<void()>& fn, int runs, int warmup,
                              const NowNs& now) {
    if (runs < 1) throw ConfigError("time_loop: runs must be >= 1");
    for (int i = 0; i < warmup; ++i) fn();
    std::vector<double> latencies_ms;
    latencies_ms.reserve(runs);
    for (int i = 0; i < runs; ++i) {
        const std::uint64_t t0 = now();
        fn();
        const std::uint64_t t1 = now();
        latencies_ms.push_back(static_cast<double>(t1 - t0) / 1e6);
    }
    return latencies_ms;
}

BenchReport fps_bench(const ModelGraph& graph, const WeightStore& store, int runs, int warmup,
                      NowNs now) {
    if (!now)
        now = [] {
            return static_cast<std::uint64_t>(
                std::chrono::duration_cast<std::chrono::nanoseconds>(
                    std::chrono::steady_clock::now().time_since_epoch())
                    .count());
        };

    const RuntimeModel model(graph, store);

    // Synthetic frame: deterministic pixel pattern at 4:3, exercising the
    // letterbox path.
    Image frame;
    frame.width = graph.imgsz;
    frame.height = graph.imgsz * 3 / 4;
    frame.pixels.resize(static_cast<std::size_t>(frame.width) * frame.height * 3);
    for (std::size_t i = 0; i < frame.pixels.size(); ++i)
        frame.pixels[i] = static_cast<std::uint8_t>((i * 31) & 0xff);

    const Letterboxed boxed = letterbox(frame, graph.imgsz);

    BenchReport report;
    report.runs = runs;
    report.warmup = warmup;

    auto fwd = [&] { (void)model.forward(boxed.input); };
    std::vector<double> f = time_loop(fwd, runs, warmup, now);
    std::sort(f.begin(), f.end());
    report.forward_p50_ms = percentile(f, 0.50);
    report.forward_p90_ms = percentile(f, 0.90);
    report.forward_p99_ms = percentile(f, 0.99);
    report.fps_forward = report.forward_p50_ms > 0 ? 1000.0 / report.forward_p50_ms : 0.0;

    auto e2e = [&] {
        const Letterboxed lb = letterbox(frame, graph.imgsz);
        const RawOutputs raw = model.forward(lb.input);
        const std::vector<Detection> dets = decode(raw, graph.reg_max, graph.nc, 0.25);
        (void)nms(dets, 0.65);
    };
    std::vector<double> e = time_loop(e2e, runs, warmup, now);
    std::sort(e.begin(), e.end());
    report.e2e_p50_ms = percentile(e, 0.50);
    report.e2e_p90_ms = percentile(e, 0.90);
    report.e2e_p99_ms = percentile(e, 0.99);
    report.fps_end_to_end = report.e2e_p50_ms > 0 ? 1000.0 / report.e2e_p50_ms : 0.0;
    return report;
}

}  // namespace flamedet
