#include "flamedet/postprocess.hpp"

#include <algorithm>
#include <cmath>

namespace flamedet {

namespace {

bool det_order(const Detection& a, const Detection& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.class_id != b.class_id) return a.class_id < b.class_id;
    if (a.box.x1 != b.box.x1) return a.box.x1 < b.box.x1;
    if (a.box.y1 != b.box.y1) return a.box.y1 < b.box.y1;
    if (a.box.x2 != b.box.x2) return a.box.x2 < b.box.x2;
    return a.box.y2 < b.box.y2;
}

}  // namespace

std::vector<Detection> decode(const RawOutputs& raw, int reg_max, int nc, double conf_thresh) {
    std::vector<Detection> dets;
    std::vector<double> expect(4);

    for (int s = 0; s < 3; ++s) {
        const Tensor& map = raw.maps[s];
        const int stride = raw.strides[s];
        if (map.c() != 4 * reg_max + nc)
            throw ShapeError("decode: map has " + std::to_string(map.c()) +
                             " channels, expected " + std::to_string(4 * reg_max + nc));
        const double imgsz = static_cast<double>(map.h()) * stride;
        const std::size_t plane = static_cast<std::size_t>(map.h()) * map.w();
        const float* base = map.data();

        for (int iy = 0; iy < map.h(); ++iy) {
            for (int ix = 0; ix < map.w(); ++ix) {
                const std::size_t cell = static_cast<std::size_t>(iy) * map.w() + ix;

                // Class gate first: sigmoid is monotone, so the max logit
                // decides both the class and the score.
                int best_class = 0;
                float best_logit = base[(static_cast<std::size_t>(4 * reg_max)) * plane + cell];
                for (int k = 1; k < nc; ++k) {
                    const float logit = base[(static_cast<std::size_t>(4 * reg_max + k)) * plane + cell];
                    if (logit > best_logit) {
                        best_logit = logit;
                        best_class = k;
                    }
                }
                const double score = 1.0 / (1.0 + std::exp(-static_cast<double>(best_logit)));
                if (score < conf_thresh) continue;

                // Softmax expectation per side, in grid units.
                for (int side = 0; side < 4; ++side) {
                    const float* bins = base + static_cast<std::size_t>(side * reg_max) * plane;
                    double max_logit = bins[cell];
                    for (int j = 1; j < reg_max; ++j)
                        max_logit = std::max(max_logit,
                                             static_cast<double>(bins[static_cast<std::size_t>(j) * plane + cell]));
                    double denom = 0.0, num = 0.0;
                    for (int j = 0; j < reg_max; ++j) {
                        const double e =
                            std::exp(static_cast<double>(bins[static_cast<std::size_t>(j) * plane + cell]) -
                                     max_logit);
                        denom += e;
                        num += e * j;
                    }
                    expect[side] = num / denom;
                }

                const double ax = (ix + 0.5) * stride;
                const double ay = (iy + 0.5) * stride;
                Box box{ax - expect[0] * stride, ay - expect[1] * stride,
                        ax + expect[2] * stride, ay + expect[3] * stride};
                box.x1 = std::clamp(box.x1, 0.0, imgsz);
                box.y1 = std::clamp(box.y1, 0.0, imgsz);
                box.x2 = std::clamp(box.x2, 0.0, imgsz);
                box.y2 = std::clamp(box.y2, 0.0, imgsz);
                dets.push_back({box, score, best_class});
            }
        }
    }
    return dets;
}

std::vector<Detection> nms(const std::vector<Detection>& dets, double iou_thresh) {
    std::vector<Detection> sorted = dets;
    std::sort(sorted.begin(), sorted.end(), det_order);

    std::vector<Detection> kept;
    for (const Detection& cand : sorted) {
        bool suppressed = false;
        for (const Detection& keep : kept) {
            if (keep.class_id != cand.class_id) continue;
            if (iou(keep.box, cand.box) > iou_thresh) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) kept.push_back(cand);
    }
    return kept;
}

}  // namespace flamedet
