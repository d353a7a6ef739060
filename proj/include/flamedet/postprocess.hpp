#pragma once

#include <vector>

#include "flamedet/losses.hpp"
#include "flamedet/model.hpp"

namespace flamedet {

/// One scored box in network-input pixel coordinates.
struct Detection {
    Box box;
    double score = 0.0;
    int class_id = 0;
};

/// Decodes raw head maps: per cell the four side distances are the softmax
/// expectations over reg_max bins scaled by the stride, anchored at the cell
/// center; class scores are sigmoids, gated at conf_thresh; boxes clipped to
/// the network input frame.
std::vector<Detection> decode(const RawOutputs& raw, int reg_max, int nc, double conf_thresh);

/// Class-aware greedy NMS. Candidates are ranked by (score desc, class_id
/// asc, box coords lex asc); a candidate is dropped when a kept detection of
/// the same class overlaps it with IoU > iou_thresh. Output keeps that order.
std::vector<Detection> nms(const std::vector<Detection>& dets, double iou_thresh);

}  // namespace flamedet
