#include "flamedet/losses.hpp"

#include <algorithm>
#include <cmath>

namespace flamedet {

double ce_loss(int y, double y_hat) {
    constexpr double kEps = 1e-7;
    const double p = std::clamp(y_hat, kEps, 1.0 - kEps);
    return y == 1 ? -std::log(p) : -std::log(1.0 - p);
}

double iou(const Box& a, const Box& b) {
    const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
    const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
    const double inter = std::max(0.0, iw) * std::max(0.0, ih);
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

IoUKind iou_kind_from_string(const std::string& s) {
    if (s == "giou") return IoUKind::Giou;
    if (s == "diou") return IoUKind::Diou;
    if (s == "ciou") return IoUKind::Ciou;
    if (s == "eiou") return IoUKind::Eiou;
    throw ConfigError("unknown iou variant: " + s);
}

double iou_variant(IoUKind kind, const Box& pred, const Box& gt) {
    const double i = iou(pred, gt);

    const Box enc{std::min(pred.x1, gt.x1), std::min(pred.y1, gt.y1),
                  std::max(pred.x2, gt.x2), std::max(pred.y2, gt.y2)};
    const double cw = enc.width();
    const double ch = enc.height();
    const double c2 = cw * cw + ch * ch;
    if (c2 <= 0.0) return 0.0;  // coincident degenerate boxes

    const double dx = pred.cx() - gt.cx();
    const double dy = pred.cy() - gt.cy();
    const double rho2 = dx * dx + dy * dy;

    switch (kind) {
        case IoUKind::Giou: {
            const double enc_area = enc.area();
            if (enc_area <= 0.0) return i;
            const double inter_w = std::max(0.0, std::min(pred.x2, gt.x2) - std::max(pred.x1, gt.x1));
            const double inter_h = std::max(0.0, std::min(pred.y2, gt.y2) - std::max(pred.y1, gt.y1));
            const double uni = pred.area() + gt.area() - inter_w * inter_h;
            return i - (enc_area - uni) / enc_area;
        }
        case IoUKind::Diou:
            return i - rho2 / c2;
        case IoUKind::Ciou: {
            // atan2 keeps degenerate sides well-defined (atan2(0, 0) == 0).
            const double diff =
                std::atan2(gt.width(), gt.height()) - std::atan2(pred.width(), pred.height());
            const double v = 4.0 / (3.14159265358979323846 * 3.14159265358979323846) * diff * diff;
            const double alpha = v > 0.0 ? v / ((1.0 - i) + v) : 0.0;
            return i - (rho2 / c2 + alpha * v);
        }
        case IoUKind::Eiou: {
            const double dw = pred.width() - gt.width();
            const double dh = pred.height() - gt.height();
            double penalty = rho2 / c2;
            if (cw > 0.0) penalty += (dw * dw) / (cw * cw);
            if (ch > 0.0) penalty += (dh * dh) / (ch * ch);
            return i - penalty;
        }
    }
    return 0.0;
}

double dfl_loss(std::span<const double> dist, double target) {
    const int reg_max = static_cast<int>(dist.size());
    if (reg_max < 2) throw DomainError("dfl_loss: need at least 2 bins");
    double sum = 0.0;
    for (double p : dist) sum += p;
    if (std::abs(sum - 1.0) > 1e-6)
        throw DomainError("dfl_loss: distribution sums to " + std::to_string(sum));
    if (target < 0.0 || target > reg_max - 1)
        throw DomainError("dfl_loss: target " + std::to_string(target) + " outside [0, " +
                          std::to_string(reg_max - 1) + "]");

    const int lo = std::min(static_cast<int>(target), reg_max - 2);
    const int hi = lo + 1;
    const double w_hi = target - lo;
    const double w_lo = 1.0 - w_hi;
    double loss = 0.0;
    if (w_lo > 0.0) loss -= w_lo * std::log(dist[lo]);
    if (w_hi > 0.0) loss -= w_hi * std::log(dist[hi]);
    return loss;
}

}  // namespace flamedet
