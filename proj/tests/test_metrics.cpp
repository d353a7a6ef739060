#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "flamedet/metrics.hpp"
#include "flamedet/rng.hpp"

using namespace flamedet;

namespace {

Detection det(double x1, double y1, double x2, double y2, double score, int cls = 0) {
    return Detection{Box{x1, y1, x2, y2}, score, cls};
}

GroundTruth gt(double x1, double y1, double x2, double y2, int cls = 0) {
    return GroundTruth{Box{x1, y1, x2, y2}, cls};
}

// Independent re-implementation of the greedy matching protocol.
MatchResult reference_match(const std::vector<Detection>& preds,
                            const std::vector<GroundTruth>& gts, double thresh) {
    std::vector<int> order(preds.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const Detection &pa = preds[a], &pb = preds[b];
        if (pa.score != pb.score) return pa.score > pb.score;
        if (pa.class_id != pb.class_id) return pa.class_id < pb.class_id;
        const double ka[4] = {pa.box.x1, pa.box.y1, pa.box.x2, pa.box.y2};
        const double kb[4] = {pb.box.x1, pb.box.y1, pb.box.x2, pb.box.y2};
        for (int i = 0; i < 4; ++i)
            if (ka[i] != kb[i]) return ka[i] < kb[i];
        return false;
    });
    MatchResult r;
    r.tp.assign(preds.size(), false);
    std::vector<bool> taken(gts.size(), false);
    for (int pi : order) {
        double best = -1.0;
        int pick = -1;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (taken[g] || gts[g].class_id != preds[pi].class_id) continue;
            const double v = iou(preds[pi].box, gts[g].box);
            if (v >= thresh && v > best) {
                best = v;
                pick = static_cast<int>(g);
            }
        }
        if (pick >= 0) {
            taken[pick] = true;
            r.tp[pi] = true;
        }
    }
    for (bool t : taken)
        if (!t) ++r.fn;
    return r;
}

}  // namespace

TEST_CASE("match basic cases") {
    // One prediction exactly on one ground truth.
    {
        const std::vector<Detection> preds{det(0, 0, 10, 10, 0.9)};
        const std::vector<GroundTruth> gts{gt(0, 0, 10, 10)};
        const MatchResult m = match(preds, gts, 0.5);
        CHECK(m.tp == std::vector<bool>{true});
        CHECK(m.fn == 0);
    }
    // Two predictions on one ground truth: single-match rule.
    {
        const std::vector<Detection> preds{det(0, 0, 10, 10, 0.9), det(0, 0, 10, 10, 0.8)};
        const std::vector<GroundTruth> gts{gt(0, 0, 10, 10)};
        const MatchResult m = match(preds, gts, 0.5);
        CHECK(m.tp == std::vector<bool>{true, false});
        CHECK(m.fn == 0);
    }
    // Unmatched ground truths count as false negatives.
    {
        const std::vector<Detection> preds{det(0, 0, 10, 10, 0.9)};
        const std::vector<GroundTruth> gts{gt(0, 0, 10, 10), gt(50, 50, 60, 60)};
        const MatchResult m = match(preds, gts, 0.5);
        CHECK(m.fn == 1);
    }
    // Class-aware: wrong class never matches.
    {
        const std::vector<Detection> preds{det(0, 0, 10, 10, 0.9, 1)};
        const std::vector<GroundTruth> gts{gt(0, 0, 10, 10, 0)};
        const MatchResult m = match(preds, gts, 0.5);
        CHECK(m.tp == std::vector<bool>{false});
        CHECK(m.fn == 1);
    }
}

TEST_CASE("match equals the reference implementation on random instances") {
    Rng rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Detection> preds;
        std::vector<GroundTruth> gts;
        const int np = 1 + rng.bounded(20);
        const int ng = rng.bounded(10);
        for (int i = 0; i < np; ++i) {
            const double x = rng.uniform(0, 50), y = rng.uniform(0, 50);
            preds.push_back(det(x, y, x + rng.uniform(5, 25), y + rng.uniform(5, 25),
                                std::floor(rng.uniform(0, 1) * 10) / 10,
                                static_cast<int>(rng.bounded(2))));
        }
        for (int i = 0; i < ng; ++i) {
            const double x = rng.uniform(0, 50), y = rng.uniform(0, 50);
            gts.push_back(gt(x, y, x + rng.uniform(5, 25), y + rng.uniform(5, 25),
                             static_cast<int>(rng.bounded(2))));
        }
        const MatchResult got = match(preds, gts, 0.45);
        const MatchResult want = reference_match(preds, gts, 0.45);
        CHECK(got.tp == want.tp);
        CHECK(got.fn == want.fn);
    }
}

TEST_CASE("pr_f1 reproduces the published F1 cells from their P/R pairs") {
    struct Cell {
        double p, r, f1;
    };
    // Loss-function comparison rows: EIoU, SIoU, CIoU, GIoU, DIoU, WIoU.
    const Cell cells[] = {{0.7585, 0.6153, 0.68}, {0.7489, 0.6106, 0.67},
                          {0.7622, 0.6135, 0.68}, {0.7454, 0.6261, 0.68},
                          {0.7279, 0.632, 0.68},  {0.7266, 0.6241, 0.67}};
    for (const Cell& c : cells) {
        const double f1 = f1_score(c.p, c.r);
        CHECK(std::round(f1 * 100.0) / 100.0 == doctest::Approx(c.f1));
    }
}

TEST_CASE("pr_f1 counts and empty convention") {
    const PrF1 a = pr_f1(7, 3, 3);
    CHECK(a.precision == doctest::Approx(0.7));
    CHECK(a.recall == doctest::Approx(0.7));
    CHECK(a.f1 == doctest::Approx(0.7));

    const PrF1 z = pr_f1(0, 0, 0);
    CHECK(z.precision == 0.0);
    CHECK(z.recall == 0.0);
    CHECK(z.f1 == 0.0);

    const PrF1 from_flags = pr_f1(std::vector<bool>{true, false, true}, 2);
    CHECK(from_flags.precision == doctest::Approx(2.0 / 3.0));
    CHECK(from_flags.recall == doctest::Approx(0.5));
}

TEST_CASE("average_precision trivial and hand-computed fixtures") {
    // All true positives covering every ground truth.
    {
        std::vector<ScoredFlag> flags;
        for (int i = 0; i < 5; ++i)
            flags.push_back({0.9 - 0.1 * i, true, 0, Box{0, 0, 1, 1.0 + i}});
        CHECK(average_precision(flags, 5) == doctest::Approx(1.0));
    }
    // No true positives.
    {
        std::vector<ScoredFlag> flags;
        for (int i = 0; i < 5; ++i)
            flags.push_back({0.9 - 0.1 * i, false, 0, Box{0, 0, 1, 1.0 + i}});
        CHECK(average_precision(flags, 3) == 0.0);
    }
    // Flags [TP, FP, TP, FP, TP] over 3 ground truths. The PR points are
    // (1/3, 1), (1/3, 1/2), (2/3, 2/3), (2/3, 1/2), (1, 3/5); the envelope
    // is 1 up to recall 1/3, 2/3 up to 2/3, then 3/5, so the 101-point mean
    // is (34*1 + 33*(2/3) + 34*(3/5)) / 101.
    {
        const bool pattern[] = {true, false, true, false, true};
        std::vector<ScoredFlag> flags;
        for (int i = 0; i < 5; ++i)
            flags.push_back({0.9 - 0.1 * i, pattern[i], 0, Box{0, 0, 1, 1.0 + i}});
        const double want = (34.0 + 33.0 * (2.0 / 3.0) + 34.0 * 0.6) / 101.0;
        CHECK(average_precision(flags, 3) == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("average_precision is invariant to permutations of equal scores") {
    std::vector<ScoredFlag> flags;
    for (int i = 0; i < 8; ++i)
        flags.push_back({0.5, i % 2 == 0, i % 3, Box{0, 0, 1.0 + i, 2.0}});
    const double base = average_precision(flags, 6);
    Rng rng(9);
    for (int trial = 0; trial < 10; ++trial) {
        for (std::size_t i = flags.size() - 1; i > 0; --i)
            std::swap(flags[i], flags[rng.bounded(static_cast<std::uint32_t>(i + 1))]);
        CHECK(average_precision(flags, 6) == base);
    }
}

TEST_CASE("evaluate pins the IoU-0.53 fixture to the exact mAP values") {
    std::vector<ImageSample> samples(1);
    samples[0].gts.push_back(gt(0, 0, 10, 5.3));
    samples[0].preds.push_back(det(0, 0, 10, 10, 0.9));
    // Intersection 53, union 100: IoU 0.53 passes only the 0.50 threshold.
    const auto [map50, map5095] = map50_95(samples);
    CHECK(map50 == 1.0);
    CHECK(map5095 == 0.1);
}

TEST_CASE("evaluate on perfect and empty predictions") {
    std::vector<ImageSample> samples(2);
    samples[0].gts.push_back(gt(0, 0, 10, 10));
    samples[0].preds.push_back(det(0, 0, 10, 10, 0.9));
    samples[1].gts.push_back(gt(5, 5, 25, 25));
    samples[1].preds.push_back(det(5, 5, 25, 25, 0.8));

    const EvalReport r = evaluate(samples, 0.5);
    CHECK(r.precision == doctest::Approx(1.0));
    CHECK(r.recall == doctest::Approx(1.0));
    CHECK(r.f1 == doctest::Approx(1.0));
    CHECK(r.map50 == doctest::Approx(1.0));
    CHECK(r.map50_95 == doctest::Approx(1.0));

    std::vector<ImageSample> empty_preds(1);
    empty_preds[0].gts.push_back(gt(0, 0, 10, 10));
    const auto [m50, m5095] = map50_95(empty_preds);
    CHECK(m50 == 0.0);
    CHECK(m5095 == 0.0);
}

TEST_CASE("AP per threshold is monotonically non-increasing") {
    Rng rng(55);
    std::vector<ImageSample> samples(4);
    for (ImageSample& s : samples) {
        for (int i = 0; i < 6; ++i) {
            const double x = rng.uniform(0, 40), y = rng.uniform(0, 40);
            s.gts.push_back(gt(x, y, x + rng.uniform(8, 20), y + rng.uniform(8, 20)));
            const double jx = rng.uniform(-4, 4), jy = rng.uniform(-4, 4);
            s.preds.push_back(det(x + jx, y + jy, x + rng.uniform(8, 20) + jx,
                                  y + rng.uniform(8, 20) + jy, rng.uniform(0.1, 1.0)));
        }
    }
    const EvalReport r = evaluate(samples, 0.5);
    double prev = 1.0 + 1e-9;
    for (const auto& [t, ap] : r.ap_per_threshold) {
        CHECK(ap <= prev + 1e-12);
        prev = ap;
    }
}

TEST_CASE("prediction file codec round trip") {
    std::vector<Detection> dets{det(1.5, 2.25, 100.125, 200.0625, 0.875, 0),
                                det(0, 0, 5, 5, 0.25, 2)};
    const std::string text = write_predictions(dets);
    const std::vector<Detection> back = parse_predictions(text);
    REQUIRE(back.size() == 2);
    CHECK(back[0].class_id == 0);
    CHECK(back[0].score == doctest::Approx(0.875));
    CHECK(back[0].box.x2 == doctest::Approx(100.125).epsilon(1e-6));
    CHECK(back[1].class_id == 2);

    CHECK(parse_predictions("").empty());
    CHECK_THROWS_AS(parse_predictions("0 0.5 1 2 3\n"), FormatError);
    CHECK_THROWS_AS(parse_predictions("0 0.5 1 2 3 4 5\n"), FormatError);
}

TEST_CASE("time_loop with an injected clock yields exact latencies") {
    std::uint64_t fake_ns = 0;
    const NowNs clock = [&fake_ns] { return fake_ns += 2'000'000; };  // 2 ms per call
    int calls = 0;
    const std::vector<double> lat = time_loop([&calls] { ++calls; }, 5, 3, clock);
    CHECK(calls == 8);  // warmup runs execute but are not timed
    REQUIRE(lat.size() == 5);
    for (double ms : lat) CHECK(ms == doctest::Approx(2.0));
    // Median latency of 2 ms corresponds to exactly 500 FPS.
    CHECK(1000.0 / lat[2] == doctest::Approx(500.0));
}

TEST_CASE("fps_bench produces a structurally sane report") {
    const ModelGraph g = build_model(Variant::V8n, 1, 64);
    const WeightStore store = init_weights(g, 0);
    const BenchReport r = fps_bench(g, store, 3, 1);
    CHECK(r.runs == 3);
    CHECK(r.warmup == 1);
    CHECK(r.fps_forward > 0.0);
    CHECK(r.fps_end_to_end > 0.0);
    CHECK(r.forward_p99_ms >= r.forward_p50_ms);
    CHECK(r.e2e_p50_ms >= r.forward_p50_ms * 0.5);
}
