#pragma once

#include <array>
#include <string>
#include <variant>
#include <vector>

#include "flamedet/blocks.hpp"

namespace flamedet {

enum class Variant { V8n, V8s, V8m, Light };

Variant variant_from_string(const std::string& s);
const char* to_string(Variant v);

struct UpsampleOp {};  // nearest 2x
struct ConcatOp {};    // channel concatenation of the listed inputs

using NodeOp = std::variant<BlockParams, UpsampleOp, ConcatOp>;

struct Node {
    int id = 0;
    std::string name;          // e.g. "backbone.2", "neck.12"
    NodeOp op;
    std::vector<int> inputs;   // node ids; -1 denotes the network input
};

/// Decoupled anchor-free detect head over three scales. Each scale runs a
/// box branch (two 3x3 ConvBNSiLU then 1x1 conv to 4*reg_max) and a class
/// branch (two 3x3 ConvBNSiLU then 1x1 conv to nc); outputs are concatenated
/// box-first into a (1, 4*reg_max+nc, H, W) map.
struct DetectHead {
    int nc = 1;
    int reg_max = 16;
    std::array<int, 3> ch{};    // input channels per scale (P3, P4, P5)
    std::array<int, 3> strides{8, 16, 32};
    int mid_box = 0;            // hidden width of the box branch
    int mid_cls = 0;            // hidden width of the class branch
};

struct ModelGraph {
    Variant variant = Variant::V8s;
    int nc = 1;
    int imgsz = 640;
    int reg_max = 16;
    std::vector<Node> nodes;
    std::array<int, 3> outputs{};  // node ids feeding the head (P3, P4, P5)
    DetectHead head;
};

/// Assembles the canonical YOLOv8 topology for the requested variant.
/// `light` is v8s with every C2f (backbone and neck) replaced by FasterC2f
/// of identical (c_in, c_out, n). imgsz must be divisible by 32.
ModelGraph build_model(Variant variant, int nc, int imgsz);

struct RawOutputs {
    std::array<Tensor, 3> maps;
    std::array<int, 3> strides{8, 16, 32};
};

}  // namespace flamedet
