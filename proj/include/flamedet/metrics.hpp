#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "flamedet/postprocess.hpp"
#include "flamedet/runtime.hpp"

namespace flamedet {

struct GroundTruth {
    Box box;
    int class_id = 0;
};

struct MatchResult {
    std::vector<bool> tp;  // aligned with the input prediction order
    int fn = 0;
};

/// Greedy per-class matching within one image: predictions scored high to
/// low, each taking the unmatched ground truth with the highest IoU >=
/// iou_thresh (ties broken toward the lower ground-truth index).
MatchResult match(const std::vector<Detection>& preds, const std::vector<GroundTruth>& gts,
                  double iou_thresh);

struct PrF1 {
    double precision = 0, recall = 0, f1 = 0;
};

PrF1 pr_f1(int tp, int fp, int fn);
PrF1 pr_f1(const std::vector<bool>& flags, int fn_count);

/// Harmonic mean of precision and recall; 0 when both are 0.
double f1_score(double precision, double recall);

struct ScoredFlag {
    double score = 0;
    bool tp = false;
    // Tie-break keys so equal-score orderings are permutation invariant.
    int class_id = 0;
    Box box;
};

/// 101-point interpolated AP from the globally score-sorted flags.
double average_precision(std::vector<ScoredFlag> flags, int total_gt);

struct ImageSample {
    std::vector<Detection> preds;
    std::vector<GroundTruth> gts;
};

struct EvalReport {
    double precision = 0, recall = 0, f1 = 0;
    std::map<int, double> ap_per_threshold;  // key = IoU threshold in percent
    double map50 = 0, map50_95 = 0;
    int tp = 0, fp = 0, fn = 0;
};

EvalReport evaluate(const std::vector<ImageSample>& samples, double op_iou = 0.5);
std::pair<double, double> map50_95(const std::vector<ImageSample>& samples);

/// Prediction file codec: one line per detection,
/// "class_id score x1 y1 x2 y2" in absolute pixels.
std::vector<Detection> parse_predictions(const std::string& text);
std::string write_predictions(const std::vector<Detection>& dets);

struct BenchReport {
    int runs = 0, warmup = 0;
    double fps_forward = 0, fps_end_to_end = 0;
    double forward_p50_ms = 0, forward_p90_ms = 0, forward_p99_ms = 0;
    double e2e_p50_ms = 0, e2e_p90_ms = 0, e2e_p99_ms = 0;
};

using NowNs = std::function<std::uint64_t()>;

/// Latencies in milliseconds for `runs` invocations after `warmup` discarded
/// ones. The clock is injectable for testing.
std::vector<double> time_loop(const std::function<void()>& fn, int runs, int warmup,
                              const NowNs& now);

/// Wall-clock benchmark: forward-only and preprocess+forward+postprocess,
/// single-threaded, median-based FPS. No golden values — hardware dependent.
BenchReport fps_bench(const ModelGraph& graph, const WeightStore& store, int runs, int warmup,
                      NowNs now = {});

}  // namespace flamedet
