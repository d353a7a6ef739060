#include "flamedet/blocks.hpp"

#include <cstring>
#include <string>

namespace flamedet {

void validate(const BlockParams& p) {
    if (p.c_in <= 0 || p.c_out <= 0)
        throw ConfigError("block: channel counts must be positive");
    switch (p.kind) {
        case BlockKind::ConvBNAct:
            if (p.k < 1 || p.stride < 1) throw ConfigError("conv block: bad kernel/stride");
            break;
        case BlockKind::Bottleneck1:
            if (p.c_in != p.c_out)
                throw ConfigError("bottleneck with shortcut requires c_in == c_out, got " +
                                  std::to_string(p.c_in) + " vs " + std::to_string(p.c_out));
            break;
        case BlockKind::Bottleneck2:
            break;
        case BlockKind::C2f:
        case BlockKind::FasterC2f:
            if (p.c_out % 2 != 0)
                throw ConfigError("c2f: c_out must be even, got " + std::to_string(p.c_out));
            if (p.n < 0) throw ConfigError("c2f: negative repeat count");
            if (p.kind == BlockKind::FasterC2f) {
                const int c_h = p.c_out / 2;
                if (p.partial_ratio.num <= 0 || p.partial_ratio.den <= 0 ||
                    p.partial_ratio.num > p.partial_ratio.den)
                    throw ConfigError("fasternet: partial ratio must be in (0, 1]");
                if ((c_h * p.partial_ratio.num) % p.partial_ratio.den != 0)
                    throw ConfigError("fasternet: c*r is not an integer for c=" +
                                      std::to_string(c_h));
            }
            break;
        case BlockKind::FasterNetBlock: {
            if (p.c_in != p.c_out)
                throw ConfigError("fasternet block requires c_in == c_out");
            if (p.partial_ratio.num <= 0 || p.partial_ratio.den <= 0 ||
                p.partial_ratio.num > p.partial_ratio.den)
                throw ConfigError("fasternet: partial ratio must be in (0, 1]");
            if ((p.c_in * p.partial_ratio.num) % p.partial_ratio.den != 0)
                throw ConfigError("fasternet: c*r is not an integer for c=" +
                                  std::to_string(p.c_in));
            if (p.expansion < 1) throw ConfigError("fasternet: expansion must be >= 1");
            break;
        }
        case BlockKind::SPPF:
            if (p.c_in % 2 != 0)
                throw ConfigError("sppf: c_in must be even, got " + std::to_string(p.c_in));
            break;
    }
}

Tensor ConvBNAct::forward(const Tensor& x) const {
    Tensor y = conv2d(x, weight, {}, stride, weight.h() / 2);
    y = batch_norm(y, bn.gamma, bn.beta, bn.mean, bn.var, bn.eps);
    return activation(y, act);
}

Tensor PlainConv::forward(const Tensor& x) const {
    return conv2d(x, weight, bias, stride, weight.h() / 2);
}

Tensor pconv(const Tensor& x, const Tensor& weight, int c_p) {
    if (c_p > x.c())
        throw ShapeError("pconv: c_p " + std::to_string(c_p) + " exceeds channels " +
                         std::to_string(x.c()));
    if (weight.n() != c_p || weight.c() != c_p)
        throw ShapeError("pconv: weight must be (c_p, c_p, k, k), got " + weight.shape().str());

    if (c_p == x.c()) return conv2d(x, weight, {}, 1, weight.h() / 2);

    std::vector<int> sizes{c_p, x.c() - c_p};
    std::vector<Tensor> parts = split_channels(x, sizes);
    parts[0] = conv2d(parts[0], weight, {}, 1, weight.h() / 2);
    return concat_channels(parts);
}

Tensor FasterNetBlock::forward(const Tensor& x) const {
    Tensor y = pconv(x, pconv_weight, pconv_weight.n());
    y = conv2d(y, pw1_weight, {}, 1, 0);
    y = batch_norm(y, bn.gamma, bn.beta, bn.mean, bn.var, bn.eps);
    y = activation(y, act);
    y = conv2d(y, pw2_weight, pw2_bias, 1, 0);
    return add(x, y);
}

Tensor Bottleneck::forward(const Tensor& x) const {
    Tensor y = cv2.forward(cv1.forward(x));
    return shortcut ? add(x, y) : y;
}

namespace {

template <typename Block>
Tensor c2f_forward(const ConvBNAct& cv1, const ConvBNAct& cv2, const std::vector<Block>& m,
                   const Tensor& x) {
    Tensor y = cv1.forward(x);
    if (y.c() % 2 != 0) throw ConfigError("c2f: hidden width must be even");
    const int c_h = y.c() / 2;
    std::vector<int> sizes{c_h, c_h};
    std::vector<Tensor> parts = split_channels(y, sizes);
    for (const Block& block : m) parts.push_back(block.forward(parts.back()));
    return cv2.forward(concat_channels(parts));
}

}  // namespace

Tensor C2f::forward(const Tensor& x) const { return c2f_forward(cv1, cv2, m, x); }

Tensor FasterC2f::forward(const Tensor& x) const { return c2f_forward(cv1, cv2, m, x); }

Tensor SPPF::forward(const Tensor& x) const {
    std::vector<Tensor> ys;
    ys.push_back(cv1.forward(x));
    for (int i = 0; i < 3; ++i) ys.push_back(max_pool2d(ys.back(), 5, 1, 2));
    return cv2.forward(concat_channels(ys));
}

}  // namespace flamedet
