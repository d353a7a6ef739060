#include "flamedet/cost.hpp"

namespace flamedet {

PConvCost pconv_cost(std::uint64_t h, std::uint64_t w, std::uint64_t k, std::uint64_t c,
                     std::uint64_t c_p) {
    if (c_p == 0 || c_p > c) throw ConfigError("pconv_cost: require 0 < c_p <= c");
    PConvCost out;
    out.flops_pconv = h * w * k * k * c_p * c_p;
    out.mem_access_pconv = h * w * 2 * c_p + k * k * c_p * c_p;
    out.flops_tshape = h * w * (k * k * c_p * c + c * (c - c_p));
    out.flops_two_step = h * w * (k * k * c_p * c_p + c * c);
    return out;
}

namespace {

struct Dims {
    std::uint64_t c = 0, h = 0, w = 0;
};

struct Acc {
    std::uint64_t params = 0, macs = 0, mem = 0;

    // One convolution (optionally with BN and/or bias) applied at the given
    // input size. Memory access counts feature elements read and written
    // plus the weight elements, matching the PConv memory model.
    void conv(std::uint64_t c_in, std::uint64_t c_out, std::uint64_t k, std::uint64_t stride,
              const Dims& in, bool bn, bool bias) {
        const std::uint64_t oh = in.h / stride;
        const std::uint64_t ow = in.w / stride;
        const std::uint64_t weights = c_out * c_in * k * k;
        params += weights + (bn ? 2 * c_out : 0) + (bias ? c_out : 0);
        macs += oh * ow * weights;
        mem += in.h * in.w * c_in + oh * ow * c_out + weights;
    }

    void pconv(std::uint64_t c_p, const Dims& in) {
        const std::uint64_t weights = 9 * c_p * c_p;
        params += weights;
        macs += in.h * in.w * weights;
        mem += in.h * in.w * 2 * c_p + weights;
    }
};

Acc block_cost(const BlockParams& p, const Dims& in) {
    Acc a;
    switch (p.kind) {
        case BlockKind::ConvBNAct:
            a.conv(p.c_in, p.c_out, p.k, p.stride, in, true, false);
            break;
        case BlockKind::Bottleneck1:
        case BlockKind::Bottleneck2:
            a.conv(p.c_in, p.c_in, 3, 1, in, true, false);
            a.conv(p.c_in, p.c_out, 3, 1, in, true, false);
            break;
        case BlockKind::FasterNetBlock: {
            const std::uint64_t c = p.c_in;
            const std::uint64_t c_p = c * p.partial_ratio.num / p.partial_ratio.den;
            const std::uint64_t e = p.expansion;
            a.pconv(c_p, in);
            a.conv(c, e * c, 1, 1, in, true, false);
            a.conv(e * c, c, 1, 1, in, false, true);
            break;
        }
        case BlockKind::C2f:
        case BlockKind::FasterC2f: {
            const int c_h = p.c_out / 2;
            a.conv(p.c_in, 2 * c_h, 1, 1, in, true, false);
            BlockParams inner;
            inner.c_in = c_h;
            inner.c_out = c_h;
            inner.partial_ratio = p.partial_ratio;
            inner.expansion = p.expansion;
            inner.kind = p.kind == BlockKind::C2f ? BlockKind::Bottleneck1
                                                  : BlockKind::FasterNetBlock;
            for (int i = 0; i < p.n; ++i) {
                const Acc sub = block_cost(inner, in);
                a.params += sub.params;
                a.macs += sub.macs;
                a.mem += sub.mem;
            }
            a.conv((2 + p.n) * static_cast<std::uint64_t>(c_h), p.c_out, 1, 1, in, true, false);
            break;
        }
        case BlockKind::SPPF:
            a.conv(p.c_in, p.c_in / 2, 1, 1, in, true, false);
            a.conv(2 * static_cast<std::uint64_t>(p.c_in), p.c_out, 1, 1, in, true, false);
            break;
    }
    return a;
}

}  // namespace

CostReport cost_report(const ModelGraph& graph, int imgsz) {
    if (imgsz % 32 != 0)
        throw ConfigError("cost_report: imgsz must be divisible by 32, got " +
                          std::to_string(imgsz));

    CostReport report;
    std::vector<Dims> dims(graph.nodes.size());
    const Dims input{3, static_cast<std::uint64_t>(imgsz), static_cast<std::uint64_t>(imgsz)};

    for (const Node& node : graph.nodes) {
        auto in_dims = [&](int idx) {
            const int id = node.inputs[idx];
            return id < 0 ? input : dims[id];
        };
        CostRow row;
        row.name = node.name;
        Dims out = in_dims(0);
        if (std::holds_alternative<UpsampleOp>(node.op)) {
            out.h *= 2;
            out.w *= 2;
        } else if (std::holds_alternative<ConcatOp>(node.op)) {
            out.c = 0;
            for (std::size_t j = 0; j < node.inputs.size(); ++j) out.c += in_dims(j).c;
        } else {
            const auto& p = std::get<BlockParams>(node.op);
            const Acc a = block_cost(p, in_dims(0));
            row.params = a.params;
            row.macs = a.macs;
            row.mem_access = a.mem;
            out.c = p.c_out;
            if (p.kind == BlockKind::ConvBNAct) {
                out.h /= p.stride;
                out.w /= p.stride;
            }
        }
        dims[node.id] = out;
        report.rows.push_back(std::move(row));
    }

    const DetectHead& h = graph.head;
    for (int s = 0; s < 3; ++s) {
        const Dims in = dims[graph.outputs[s]];
        Acc box;
        box.conv(h.ch[s], h.mid_box, 3, 1, in, true, false);
        box.conv(h.mid_box, h.mid_box, 3, 1, in, true, false);
        box.conv(h.mid_box, 4 * static_cast<std::uint64_t>(h.reg_max), 1, 1, in, false, true);
        report.rows.push_back({"head.cv2." + std::to_string(s), box.params, box.macs, box.mem});
        Acc cls;
        cls.conv(h.ch[s], h.mid_cls, 3, 1, in, true, false);
        cls.conv(h.mid_cls, h.mid_cls, 3, 1, in, true, false);
        cls.conv(h.mid_cls, h.nc, 1, 1, in, false, true);
        report.rows.push_back({"head.cv3." + std::to_string(s), cls.params, cls.macs, cls.mem});
    }

    for (const CostRow& row : report.rows) {
        report.total_params += row.params;
        report.total_macs += row.macs;
        report.total_mem_access += row.mem_access;
    }
    report.total_flops = 2 * report.total_macs;
    return report;
}

CostReport count_params(const ModelGraph& graph) { return cost_report(graph, graph.imgsz); }

CostReport count_flops(const ModelGraph& graph, int imgsz) { return cost_report(graph, imgsz); }

ParamBreakdown param_breakdown(const BlockParams& p) {
    ParamBreakdown b;
    switch (p.kind) {
        case BlockKind::ConvBNAct:
            b.conv_weights = static_cast<std::uint64_t>(p.c_out) * p.c_in * p.k * p.k;
            b.bn_params = 2 * static_cast<std::uint64_t>(p.c_out);
            break;
        case BlockKind::Bottleneck1:
        case BlockKind::Bottleneck2: {
            const std::uint64_t c = p.c_in;
            b.conv_weights = 2 * 9 * c * c;
            b.bn_params = 4 * c;
            break;
        }
        case BlockKind::FasterNetBlock: {
            const std::uint64_t c = p.c_in;
            const std::uint64_t c_p = c * p.partial_ratio.num / p.partial_ratio.den;
            const std::uint64_t e = p.expansion;
            b.conv_weights = 9 * c_p * c_p + 2 * e * c * c;
            b.bn_params = 2 * e * c;
            b.biases = c;
            break;
        }
        case BlockKind::C2f:
        case BlockKind::FasterC2f: {
            const std::uint64_t c_h = p.c_out / 2;
            b.conv_weights = static_cast<std::uint64_t>(p.c_in) * 2 * c_h +
                             (2 + p.n) * c_h * static_cast<std::uint64_t>(p.c_out);
            b.bn_params = 2 * (2 * c_h) + 2 * static_cast<std::uint64_t>(p.c_out);
            BlockParams inner;
            inner.c_in = static_cast<int>(c_h);
            inner.c_out = static_cast<int>(c_h);
            inner.partial_ratio = p.partial_ratio;
            inner.expansion = p.expansion;
            inner.kind = p.kind == BlockKind::C2f ? BlockKind::Bottleneck1
                                                  : BlockKind::FasterNetBlock;
            const ParamBreakdown sub = param_breakdown(inner);
            b.conv_weights += p.n * sub.conv_weights;
            b.bn_params += p.n * sub.bn_params;
            b.biases += p.n * sub.biases;
            break;
        }
        case BlockKind::SPPF: {
            const std::uint64_t c = p.c_in;
            b.conv_weights = c * (c / 2) + 2 * c * static_cast<std::uint64_t>(p.c_out);
            b.bn_params = 2 * (c / 2) + 2 * static_cast<std::uint64_t>(p.c_out);
            break;
        }
    }
    return b;
}

}  // namespace flamedet
