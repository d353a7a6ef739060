#include "flamedet/model.hpp"

#include <algorithm>
#include <cmath>

namespace flamedet {

Variant variant_from_string(const std::string& s) {
    if (s == "v8n") return Variant::V8n;
    if (s == "v8s") return Variant::V8s;
    if (s == "v8m") return Variant::V8m;
    if (s == "light") return Variant::Light;
    throw ConfigError("unknown model variant: " + s + " (expected v8n|v8s|v8m|light)");
}

const char* to_string(Variant v) {
    switch (v) {
        case Variant::V8n: return "v8n";
        case Variant::V8s: return "v8s";
        case Variant::V8m: return "v8m";
        case Variant::Light: return "light";
    }
    return "?";
}

namespace {

struct ScaleSpec {
    double depth;
    double width;
    int max_ch;
    bool faster;
};

ScaleSpec scale_spec(Variant v) {
    switch (v) {
        case Variant::V8n: return {0.33, 0.25, 1024, false};
        case Variant::V8s: return {0.33, 0.50, 1024, false};
        case Variant::V8m: return {0.67, 0.75, 768, false};
        case Variant::Light: return {0.33, 0.50, 1024, true};
    }
    return {0.33, 0.50, 1024, false};
}

// Channel scaling: clamp to max_ch, apply width multiple, round up to 8.
int scale_ch(int base, const ScaleSpec& s) {
    const double scaled = std::min(base, s.max_ch) * s.width;
    return static_cast<int>(std::ceil(scaled / 8.0 - 1e-9)) * 8;
}

int scale_depth(int base, const ScaleSpec& s) {
    return std::max(1, static_cast<int>(std::lround(base * s.depth)));
}

BlockParams conv_p(int c_in, int c_out, int k, int stride) {
    BlockParams p;
    p.kind = BlockKind::ConvBNAct;
    p.c_in = c_in;
    p.c_out = c_out;
    p.k = k;
    p.stride = stride;
    return p;
}

BlockParams c2f_p(int c_in, int c_out, int n, bool shortcut, bool faster) {
    BlockParams p;
    p.kind = faster ? BlockKind::FasterC2f : BlockKind::C2f;
    p.c_in = c_in;
    p.c_out = c_out;
    p.n = n;
    p.shortcut = shortcut;
    return p;
}

BlockParams sppf_p(int c) {
    BlockParams p;
    p.kind = BlockKind::SPPF;
    p.c_in = c;
    p.c_out = c;
    return p;
}

}  // namespace

ModelGraph build_model(Variant variant, int nc, int imgsz) {
    if (nc < 1) throw ConfigError("build_model: nc must be >= 1");
    if (imgsz % 32 != 0)
        throw ConfigError("build_model: imgsz must be divisible by 32, got " +
                          std::to_string(imgsz));

    const ScaleSpec s = scale_spec(variant);
    const int c1 = scale_ch(64, s);
    const int c2 = scale_ch(128, s);
    const int c3 = scale_ch(256, s);
    const int c4 = scale_ch(512, s);
    const int c5 = scale_ch(1024, s);
    const int d3 = scale_depth(3, s);
    const int d6 = scale_depth(6, s);

    ModelGraph g;
    g.variant = variant;
    g.nc = nc;
    g.imgsz = imgsz;

    auto push = [&g](const std::string& section, NodeOp op, std::vector<int> inputs) {
        Node node;
        node.id = static_cast<int>(g.nodes.size());
        node.name = section + "." + std::to_string(node.id);
        node.op = std::move(op);
        node.inputs = std::move(inputs);
        if (const auto* bp = std::get_if<BlockParams>(&node.op)) validate(*bp);
        g.nodes.push_back(std::move(node));
        return g.nodes.back().id;
    };

    // Backbone.
    push("backbone", conv_p(3, c1, 3, 2), {-1});                       // 0  P1/2
    push("backbone", conv_p(c1, c2, 3, 2), {0});                       // 1  P2/4
    push("backbone", c2f_p(c2, c2, d3, true, s.faster), {1});          // 2
    push("backbone", conv_p(c2, c3, 3, 2), {2});                       // 3  P3/8
    const int b4 = push("backbone", c2f_p(c3, c3, d6, true, s.faster), {3});
    push("backbone", conv_p(c3, c4, 3, 2), {4});                       // 5  P4/16
    const int b6 = push("backbone", c2f_p(c4, c4, d6, true, s.faster), {5});
    push("backbone", conv_p(c4, c5, 3, 2), {6});                       // 7  P5/32
    push("backbone", c2f_p(c5, c5, d3, true, s.faster), {7});          // 8
    const int b9 = push("backbone", sppf_p(c5), {8});                  // 9

    // Neck (FPN top-down, then PAN bottom-up).
    push("neck", UpsampleOp{}, {b9});                                  // 10
    push("neck", ConcatOp{}, {10, b6});                                // 11
    const int n12 = push("neck", c2f_p(c5 + c4, c4, d3, false, s.faster), {11});
    push("neck", UpsampleOp{}, {n12});                                 // 13
    push("neck", ConcatOp{}, {13, b4});                                // 14
    const int n15 = push("neck", c2f_p(c4 + c3, c3, d3, false, s.faster), {14});  // P3 out
    push("neck", conv_p(c3, c3, 3, 2), {n15});                         // 16
    push("neck", ConcatOp{}, {16, n12});                               // 17
    const int n18 = push("neck", c2f_p(c3 + c4, c4, d3, false, s.faster), {17});  // P4 out
    push("neck", conv_p(c4, c4, 3, 2), {n18});                         // 19
    push("neck", ConcatOp{}, {19, b9});                                // 20
    const int n21 = push("neck", c2f_p(c4 + c5, c5, d3, false, s.faster), {20});  // P5 out

    g.outputs = {n15, n18, n21};

    g.head.nc = nc;
    g.head.reg_max = g.reg_max;
    g.head.ch = {c3, c4, c5};
    g.head.mid_box = std::max({16, c3 / 4, 4 * g.reg_max});
    g.head.mid_cls = std::max(c3, std::min(nc, 100));
    return g;
}

}  // namespace flamedet
