#include "flamedet/runtime.hpp"

#include <cmath>

#include "flamedet/rng.hpp"

namespace flamedet {

namespace {

using Visit = std::function<void(const TensorSpec&)>;

std::uint32_t u32(int v) { return static_cast<std::uint32_t>(v); }

void visit_conv_bn(const Visit& cb, const std::string& prefix, int c_in, int c_out, int k) {
    cb({prefix + ".conv.weight", {u32(c_out), u32(c_in), u32(k), u32(k)}, WeightRole::ConvWeight});
    cb({prefix + ".bn.gamma", {u32(c_out)}, WeightRole::Gamma});
    cb({prefix + ".bn.beta", {u32(c_out)}, WeightRole::Beta});
    cb({prefix + ".bn.mean", {u32(c_out)}, WeightRole::Mean});
    cb({prefix + ".bn.var", {u32(c_out)}, WeightRole::Var});
}

void visit_plain_conv(const Visit& cb, const std::string& prefix, int c_in, int c_out, int k) {
    cb({prefix + ".conv.weight", {u32(c_out), u32(c_in), u32(k), u32(k)}, WeightRole::ConvWeight});
    cb({prefix + ".conv.bias", {u32(c_out)}, WeightRole::Bias});
}

void visit_bottleneck(const Visit& cb, const std::string& prefix, int c) {
    visit_conv_bn(cb, prefix + ".cv1", c, c, 3);
    visit_conv_bn(cb, prefix + ".cv2", c, c, 3);
}

void visit_fasternet(const Visit& cb, const std::string& prefix, int c, Ratio r, int e) {
    const int c_p = c * r.num / r.den;
    cb({prefix + ".pconv.weight", {u32(c_p), u32(c_p), 3, 3}, WeightRole::ConvWeight});
    visit_conv_bn(cb, prefix + ".pw1", c, e * c, 1);
    visit_plain_conv(cb, prefix + ".pw2", e * c, c, 1);
}

void visit_block(const Visit& cb, const std::string& prefix, const BlockParams& p) {
    switch (p.kind) {
        case BlockKind::ConvBNAct:
            visit_conv_bn(cb, prefix, p.c_in, p.c_out, p.k);
            break;
        case BlockKind::C2f:
        case BlockKind::FasterC2f: {
            const int c_h = p.c_out / 2;
            visit_conv_bn(cb, prefix + ".cv1", p.c_in, 2 * c_h, 1);
            visit_conv_bn(cb, prefix + ".cv2", (2 + p.n) * c_h, p.c_out, 1);
            for (int i = 0; i < p.n; ++i) {
                const std::string sub = prefix + ".m." + std::to_string(i);
                if (p.kind == BlockKind::C2f)
                    visit_bottleneck(cb, sub, c_h);
                else
                    visit_fasternet(cb, sub, c_h, p.partial_ratio, p.expansion);
            }
            break;
        }
        case BlockKind::SPPF:
            visit_conv_bn(cb, prefix + ".cv1", p.c_in, p.c_in / 2, 1);
            visit_conv_bn(cb, prefix + ".cv2", 2 * p.c_in, p.c_out, 1);
            break;
        case BlockKind::Bottleneck1:
        case BlockKind::Bottleneck2:
            visit_bottleneck(cb, prefix, p.c_in);
            break;
        case BlockKind::FasterNetBlock:
            visit_fasternet(cb, prefix, p.c_in, p.partial_ratio, p.expansion);
            break;
    }
}

}  // namespace

void for_each_weight(const ModelGraph& graph, const Visit& visit) {
    for (const Node& node : graph.nodes) {
        if (const auto* bp = std::get_if<BlockParams>(&node.op)) visit_block(visit, node.name, *bp);
    }
    const DetectHead& h = graph.head;
    for (int s = 0; s < 3; ++s) {
        const std::string box = "head.cv2." + std::to_string(s);
        visit_conv_bn(visit, box + ".0", h.ch[s], h.mid_box, 3);
        visit_conv_bn(visit, box + ".1", h.mid_box, h.mid_box, 3);
        visit_plain_conv(visit, box + ".2", h.mid_box, 4 * h.reg_max, 1);
        const std::string cls = "head.cv3." + std::to_string(s);
        visit_conv_bn(visit, cls + ".0", h.ch[s], h.mid_cls, 3);
        visit_conv_bn(visit, cls + ".1", h.mid_cls, h.mid_cls, 3);
        visit_plain_conv(visit, cls + ".2", h.mid_cls, h.nc, 1);
    }
}

std::vector<TensorSpec> required_weights(const ModelGraph& graph) {
    std::vector<TensorSpec> specs;
    for_each_weight(graph, [&specs](const TensorSpec& s) { specs.push_back(s); });
    return specs;
}

WeightStore init_weights(const ModelGraph& graph, std::uint64_t seed) {
    WeightStore store;
    store.variant_name = to_string(graph.variant);
    store.nc = graph.nc;
    for_each_weight(graph, [&](const TensorSpec& spec) {
        StoredTensor t;
        t.dims = spec.dims;
        t.data.resize(t.numel());
        switch (spec.role) {
            case WeightRole::ConvWeight: {
                const std::uint64_t fan_in =
                    static_cast<std::uint64_t>(spec.dims[1]) * spec.dims[2] * spec.dims[3];
                const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
                Rng rng(derive_seed(seed, spec.name));
                for (float& v : t.data)
                    v = static_cast<float>(rng.uniform(-bound, bound));
                break;
            }
            case WeightRole::Bias:
            case WeightRole::Beta:
            case WeightRole::Mean:
                break;  // zeros
            case WeightRole::Gamma:
            case WeightRole::Var:
                std::fill(t.data.begin(), t.data.end(), 1.0f);
                break;
        }
        store.entries.emplace(spec.name, std::move(t));
    });
    return store;
}

void verify_weights(const ModelGraph& graph, const WeightStore& store, bool strict) {
    std::map<std::string, std::vector<std::uint32_t>> required;
    for_each_weight(graph, [&required](const TensorSpec& s) { required.emplace(s.name, s.dims); });

    for (const auto& [name, dims] : required) {
        auto it = store.entries.find(name);
        if (it == store.entries.end()) throw LoadError("missing weight tensor: " + name);
        if (it->second.dims != dims) {
            std::string want, got;
            for (auto d : dims) want += std::to_string(d) + " ";
            for (auto d : it->second.dims) got += std::to_string(d) + " ";
            throw LoadError("shape mismatch for " + name + ": expected [ " + want +
                            "], found [ " + got + "]");
        }
    }
    if (strict) {
        std::string extras;
        for (const auto& [name, t] : store.entries)
            if (!required.count(name)) extras += (extras.empty() ? "" : ", ") + name;
        if (!extras.empty()) throw LoadError("unexpected weight tensors: " + extras);
    }
}

namespace {

Tensor to_tensor4(const StoredTensor& t, const std::string& name) {
    if (t.dims.size() != 4) throw LoadError("tensor " + name + " must be rank 4");
    return Tensor::from_data(Shape{static_cast<int>(t.dims[0]), static_cast<int>(t.dims[1]),
                                   static_cast<int>(t.dims[2]), static_cast<int>(t.dims[3])},
                             t.data);
}

std::vector<float> to_vector(const StoredTensor& t, const std::string& name) {
    if (t.dims.size() != 1) throw LoadError("tensor " + name + " must be rank 1");
    return t.data;
}

constexpr float kBnEps = 1e-3f;

ConvBNAct bind_conv_bn(const WeightStore& store, const std::string& prefix, int stride, Act act) {
    ConvBNAct conv;
    conv.weight = to_tensor4(store.get(prefix + ".conv.weight"), prefix + ".conv.weight");
    conv.bn.gamma = to_vector(store.get(prefix + ".bn.gamma"), prefix + ".bn.gamma");
    conv.bn.beta = to_vector(store.get(prefix + ".bn.beta"), prefix + ".bn.beta");
    conv.bn.mean = to_vector(store.get(prefix + ".bn.mean"), prefix + ".bn.mean");
    conv.bn.var = to_vector(store.get(prefix + ".bn.var"), prefix + ".bn.var");
    conv.bn.eps = kBnEps;
    conv.stride = stride;
    conv.act = act;
    return conv;
}

PlainConv bind_plain_conv(const WeightStore& store, const std::string& prefix, int stride = 1) {
    PlainConv conv;
    conv.weight = to_tensor4(store.get(prefix + ".conv.weight"), prefix + ".conv.weight");
    conv.bias = to_vector(store.get(prefix + ".conv.bias"), prefix + ".conv.bias");
    conv.stride = stride;
    return conv;
}

Bottleneck bind_bottleneck(const WeightStore& store, const std::string& prefix, bool shortcut) {
    Bottleneck b;
    b.cv1 = bind_conv_bn(store, prefix + ".cv1", 1, Act::Silu);
    b.cv2 = bind_conv_bn(store, prefix + ".cv2", 1, Act::Silu);
    b.shortcut = shortcut;
    return b;
}

FasterNetBlock bind_fasternet(const WeightStore& store, const std::string& prefix) {
    FasterNetBlock f;
    f.pconv_weight = to_tensor4(store.get(prefix + ".pconv.weight"), prefix + ".pconv.weight");
    const std::string pw1 = prefix + ".pw1";
    f.pw1_weight = to_tensor4(store.get(pw1 + ".conv.weight"), pw1 + ".conv.weight");
    f.bn.gamma = to_vector(store.get(pw1 + ".bn.gamma"), pw1 + ".bn.gamma");
    f.bn.beta = to_vector(store.get(pw1 + ".bn.beta"), pw1 + ".bn.beta");
    f.bn.mean = to_vector(store.get(pw1 + ".bn.mean"), pw1 + ".bn.mean");
    f.bn.var = to_vector(store.get(pw1 + ".bn.var"), pw1 + ".bn.var");
    f.bn.eps = kBnEps;
    f.pw2_weight = to_tensor4(store.get(prefix + ".pw2.conv.weight"), prefix + ".pw2.conv.weight");
    f.pw2_bias = to_vector(store.get(prefix + ".pw2.conv.bias"), prefix + ".pw2.conv.bias");
    f.act = Act::Gelu;
    return f;
}

}  // namespace

RuntimeModel::RuntimeModel(const ModelGraph& graph, const WeightStore& store) : graph_(graph) {
    verify_weights(graph, store, /*strict=*/true);

    ops_.reserve(graph.nodes.size());
    for (const Node& node : graph.nodes) {
        if (std::holds_alternative<UpsampleOp>(node.op)) {
            ops_.emplace_back(UpsampleOp{});
        } else if (std::holds_alternative<ConcatOp>(node.op)) {
            ops_.emplace_back(ConcatOp{});
        } else {
            const auto& p = std::get<BlockParams>(node.op);
            switch (p.kind) {
                case BlockKind::ConvBNAct:
                    ops_.emplace_back(bind_conv_bn(store, node.name, p.stride, Act::Silu));
                    break;
                case BlockKind::C2f: {
                    C2f block;
                    block.cv1 = bind_conv_bn(store, node.name + ".cv1", 1, Act::Silu);
                    block.cv2 = bind_conv_bn(store, node.name + ".cv2", 1, Act::Silu);
                    for (int i = 0; i < p.n; ++i)
                        block.m.push_back(bind_bottleneck(
                            store, node.name + ".m." + std::to_string(i), p.shortcut));
                    ops_.emplace_back(std::move(block));
                    break;
                }
                case BlockKind::FasterC2f: {
                    FasterC2f block;
                    block.cv1 = bind_conv_bn(store, node.name + ".cv1", 1, Act::Silu);
                    block.cv2 = bind_conv_bn(store, node.name + ".cv2", 1, Act::Silu);
                    for (int i = 0; i < p.n; ++i)
                        block.m.push_back(
                            bind_fasternet(store, node.name + ".m." + std::to_string(i)));
                    ops_.emplace_back(std::move(block));
                    break;
                }
                case BlockKind::SPPF: {
                    SPPF block;
                    block.cv1 = bind_conv_bn(store, node.name + ".cv1", 1, Act::Silu);
                    block.cv2 = bind_conv_bn(store, node.name + ".cv2", 1, Act::Silu);
                    ops_.emplace_back(std::move(block));
                    break;
                }
                default:
                    throw ConfigError("unsupported block kind in graph node " + node.name);
            }
        }
    }

    for (int s = 0; s < 3; ++s) {
        const std::string box = "head.cv2." + std::to_string(s);
        box_[s].l0 = bind_conv_bn(store, box + ".0", 1, Act::Silu);
        box_[s].l1 = bind_conv_bn(store, box + ".1", 1, Act::Silu);
        box_[s].l2 = bind_plain_conv(store, box + ".2");
        const std::string cls = "head.cv3." + std::to_string(s);
        cls_[s].l0 = bind_conv_bn(store, cls + ".0", 1, Act::Silu);
        cls_[s].l1 = bind_conv_bn(store, cls + ".1", 1, Act::Silu);
        cls_[s].l2 = bind_plain_conv(store, cls + ".2");
    }
}

RawOutputs RuntimeModel::forward(const Tensor& input) const {
    const Shape expect{1, 3, graph_.imgsz, graph_.imgsz};
    if (!(input.shape() == expect))
        throw ShapeError("forward: input must be " + expect.str() + ", got " +
                         input.shape().str());

    std::vector<Tensor> vals(ops_.size());
    for (std::size_t i = 0; i < ops_.size(); ++i) {
        const Node& node = graph_.nodes[i];
        auto arg = [&](int idx) -> const Tensor& {
            return node.inputs[idx] < 0 ? input : vals[node.inputs[idx]];
        };
        std::visit(
            [&](const auto& op) {
                using T = std::decay_t<decltype(op)>;
                if constexpr (std::is_same_v<T, UpsampleOp>) {
                    vals[i] = upsample_nearest2x(arg(0));
                } else if constexpr (std::is_same_v<T, ConcatOp>) {
                    std::vector<Tensor> parts;
                    parts.reserve(node.inputs.size());
                    for (std::size_t j = 0; j < node.inputs.size(); ++j) parts.push_back(arg(j));
                    vals[i] = concat_channels(parts);
                } else {
                    vals[i] = op.forward(arg(0));
                }
            },
            ops_[i]);
    }

    RawOutputs out;
    out.strides = graph_.head.strides;
    for (int s = 0; s < 3; ++s) {
        const Tensor& x = vals[graph_.outputs[s]];
        Tensor box = box_[s].l2.forward(box_[s].l1.forward(box_[s].l0.forward(x)));
        Tensor cls = cls_[s].l2.forward(cls_[s].l1.forward(cls_[s].l0.forward(x)));
        std::vector<Tensor> pair;
        pair.push_back(std::move(box));
        pair.push_back(std::move(cls));
        out.maps[s] = concat_channels(pair);
    }
    return out;
}

RawOutputs forward(const ModelGraph& graph, const WeightStore& store, const Tensor& input) {
    return RuntimeModel(graph, store).forward(input);
}

}  // namespace flamedet
