#pragma once

#include <vector>

#include "flamedet/tensor.hpp"

namespace flamedet {

struct Ratio {
    int num = 1;
    int den = 4;
    double value() const { return static_cast<double>(num) / den; }
};

enum class BlockKind { ConvBNAct, Bottleneck1, Bottleneck2, C2f, FasterC2f, FasterNetBlock, SPPF };

/// Structural description of one composite layer; enough to derive every
/// weight shape and cost figure without instantiating tensors.
struct BlockParams {
    BlockKind kind = BlockKind::ConvBNAct;
    int c_in = 0;
    int c_out = 0;
    int n = 1;              // repeat count for the C2f family
    int k = 1;              // kernel size (ConvBNAct)
    int stride = 1;         // stride (ConvBNAct)
    bool shortcut = false;  // residual add inside C2f bottlenecks
    Ratio partial_ratio{1, 4};  // FasterNet c_p / c
    int expansion = 2;          // FasterNet middle PWConv width multiplier
};

/// Throws ConfigError when the parameters are internally inconsistent
/// (non-integer c*r, residual with c_in != c_out, odd C2f output width).
void validate(const BlockParams& p);

struct BnParams {
    std::vector<float> gamma, beta, mean, var;
    float eps = 1e-3f;
};

/// Conv (no bias) -> batch norm -> activation; padding fixed at k/2.
struct ConvBNAct {
    Tensor weight;  // (c_out, c_in, k, k)
    BnParams bn;
    int stride = 1;
    Act act = Act::Silu;

    Tensor forward(const Tensor& x) const;
};

/// Conv with bias, no norm or activation; padding k/2.
struct PlainConv {
    Tensor weight;
    std::vector<float> bias;
    int stride = 1;

    Tensor forward(const Tensor& x) const;
};

/// Dense 3x3 convolution over the first c_p channels only; the remaining
/// channels pass through untouched. Output channel count equals input.
Tensor pconv(const Tensor& x, const Tensor& weight, int c_p);

/// PConv -> expand PWConv -> BN+GELU -> project PWConv(+bias) -> +input.
struct FasterNetBlock {
    Tensor pconv_weight;  // (c_p, c_p, 3, 3)
    Tensor pw1_weight;    // (e*c, c, 1, 1), no bias
    BnParams bn;          // over e*c channels
    Tensor pw2_weight;    // (c, e*c, 1, 1)
    std::vector<float> pw2_bias;
    Act act = Act::Gelu;

    Tensor forward(const Tensor& x) const;
};

/// Two 3x3 ConvBNSiLU layers; backbone variant adds the input back.
struct Bottleneck {
    ConvBNAct cv1, cv2;
    bool shortcut = true;

    Tensor forward(const Tensor& x) const;
};

struct C2f {
    ConvBNAct cv1;  // c_in -> 2*c_h, k=1
    ConvBNAct cv2;  // (2+n)*c_h -> c_out, k=1
    std::vector<Bottleneck> m;

    Tensor forward(const Tensor& x) const;
};

struct FasterC2f {
    ConvBNAct cv1;
    ConvBNAct cv2;
    std::vector<FasterNetBlock> m;

    Tensor forward(const Tensor& x) const;
};

/// cv1 halves channels, three chained 5x5 stride-1 max pools, cv2 restores.
struct SPPF {
    ConvBNAct cv1;
    ConvBNAct cv2;

    Tensor forward(const Tensor& x) const;
};

}  // namespace flamedet
