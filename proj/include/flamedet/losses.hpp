#pragma once

#include <span>
#include <string>

#include "flamedet/errors.hpp"

namespace flamedet {

/// Axis-aligned box in absolute coordinates; degenerate (zero-area) boxes
/// are permitted.
struct Box {
    double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

    double width() const { return x2 - x1; }
    double height() const { return y2 - y1; }
    double area() const { return width() * height(); }
    double cx() const { return 0.5 * (x1 + x2); }
    double cy() const { return 0.5 * (y1 + y2); }
};

/// Binary cross entropy with the prediction clamped to [1e-7, 1-1e-7].
double ce_loss(int y, double y_hat);

/// Intersection over union; 0 when the union has zero area.
double iou(const Box& a, const Box& b);

enum class IoUKind { Giou, Diou, Ciou, Eiou };

IoUKind iou_kind_from_string(const std::string& s);

/// Penalized IoU value in (-1, 1]; the corresponding loss is 1 - value.
/// Degenerate enclosing geometry contributes no penalty; two coincident
/// degenerate boxes evaluate to 0.
double iou_variant(IoUKind kind, const Box& pred, const Box& gt);

/// Distribution focal loss: interpolated negative log-likelihood of the
/// target under a discrete distribution over reg_max bins.
double dfl_loss(std::span<const double> dist, double target);

}  // namespace flamedet
