#include "flamedet/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

namespace flamedet {

std::string Shape::str() const {
    return std::to_string(n) + "x" + std::to_string(c) + "x" + std::to_string(h) + "x" +
           std::to_string(w);
}

Tensor::Tensor(int n, int c, int h, int w) : Tensor(Shape{n, c, h, w}) {}

Tensor::Tensor(Shape s) : shape_(s) {
    if (s.n < 0 || s.c < 0 || s.h < 0 || s.w < 0)
        throw ShapeError("tensor: negative dimension in " + s.str());
    data_.assign(s.numel(), 0.0f);
}

Tensor Tensor::full(Shape s, float value) {
    Tensor t(s);
    std::fill(t.data_.begin(), t.data_.end(), value);
    return t;
}

Tensor Tensor::from_data(Shape s, std::vector<float> data) {
    if (data.size() != s.numel())
        throw ShapeError("tensor: data length " + std::to_string(data.size()) +
                         " does not match shape " + s.str());
    Tensor t;
    t.shape_ = s;
    t.data_ = std::move(data);
    return t;
}

bool Tensor::all_finite() const {
    for (float v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

Act act_from_string(const std::string& s) {
    if (s == "silu") return Act::Silu;
    if (s == "gelu") return Act::Gelu;
    if (s == "relu") return Act::Relu;
    if (s == "sigmoid") return Act::Sigmoid;
    throw ConfigError("unknown activation: " + s);
}

const char* to_string(Act a) {
    switch (a) {
        case Act::Silu: return "silu";
        case Act::Gelu: return "gelu";
        case Act::Relu: return "relu";
        case Act::Sigmoid: return "sigmoid";
    }
    return "?";
}

float sigmoid_scalar(float x) { return 1.0f / (1.0f + std::exp(-x)); }
float silu_scalar(float x) { return x * sigmoid_scalar(x); }
float gelu_scalar(float x) {
    // Exact Gaussian-CDF form.
    return 0.5f * x * (1.0f + std::erf(x * 0.70710678118654752440f));
}
float relu_scalar(float x) { return x > 0.0f ? x : 0.0f; }

namespace {

// C (M x N) += A (M x K) * B (K x N), all row-major. The k loop is strictly
// sequential per output element, so results are deterministic for any tile
// sizes.
void gemm_acc(const float* a, const float* b, float* c, int m_count, int k_count, int n_count) {
    constexpr int kNT = 1024;
    constexpr int kKT = 128;
    for (int n0 = 0; n0 < n_count; n0 += kNT) {
        const int n1 = std::min(n_count, n0 + kNT);
        for (int k0 = 0; k0 < k_count; k0 += kKT) {
            const int k1 = std::min(k_count, k0 + kKT);
            for (int m = 0; m < m_count; ++m) {
                float* __restrict crow = c + static_cast<std::size_t>(m) * n_count;
                const float* arow = a + static_cast<std::size_t>(m) * k_count;
                for (int k = k0; k < k1; ++k) {
                    const float av = arow[k];
                    const float* __restrict brow = b + static_cast<std::size_t>(k) * n_count;
                    for (int n = n0; n < n1; ++n) crow[n] += av * brow[n];
                }
            }
        }
    }
}

// Unpack one image plane (c,h,w) into the (c*k*k, oh*ow) patch matrix.
void im2col(const float* src, int c, int h, int w, int k, int stride, int pad, int oh, int ow,
            float* dst) {
    for (int ci = 0; ci < c; ++ci) {
        const float* chan = src + static_cast<std::size_t>(ci) * h * w;
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                float* row =
                    dst + (static_cast<std::size_t>(ci) * k * k + ky * k + kx) *
                              (static_cast<std::size_t>(oh) * ow);
                // Valid ox range: 0 <= ox*stride - pad + kx < w.
                const int num_lo = pad - kx;
                const int ox_lo = num_lo <= 0 ? 0 : (num_lo + stride - 1) / stride;
                const int num_hi = w + pad - kx;
                const int ox_hi = num_hi <= 0 ? 0 : std::min(ow, (num_hi + stride - 1) / stride);
                for (int oy = 0; oy < oh; ++oy) {
                    float* out = row + static_cast<std::size_t>(oy) * ow;
                    const int iy = oy * stride - pad + ky;
                    if (iy < 0 || iy >= h) {
                        std::memset(out, 0, sizeof(float) * ow);
                        continue;
                    }
                    const float* in = chan + static_cast<std::size_t>(iy) * w;
                    if (ox_lo > 0) std::memset(out, 0, sizeof(float) * std::min(ox_lo, ow));
                    if (stride == 1) {
                        if (ox_hi > ox_lo)
                            std::memcpy(out + ox_lo, in + (ox_lo - pad + kx),
                                        sizeof(float) * (ox_hi - ox_lo));
                    } else {
                        for (int ox = ox_lo; ox < ox_hi; ++ox)
                            out[ox] = in[ox * stride - pad + kx];
                    }
                    if (ox_hi < ow) std::memset(out + ox_hi, 0, sizeof(float) * (ow - ox_hi));
                }
            }
        }
    }
}

int out_extent(int in, int k, int stride, int pad) {
    return (in + 2 * pad - k) / stride + 1;
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weight, std::span<const float> bias,
              int stride, int padding) {
    if (stride < 1) throw ConfigError("conv2d: stride must be >= 1");
    if (padding < 0) throw ConfigError("conv2d: padding must be >= 0");
    if (weight.h() != weight.w()) throw ShapeError("conv2d: kernel must be square");
    if (input.c() != weight.c())
        throw ShapeError("conv2d: input channels (" + std::to_string(input.c()) +
                         ") != weight input channels (" + std::to_string(weight.c()) + ")");
    const int k = weight.h();
    if (k > input.h() + 2 * padding || k > input.w() + 2 * padding)
        throw ShapeError("conv2d: kernel " + std::to_string(k) + " exceeds padded input " +
                         input.shape().str());
    const int c_out = weight.n();
    if (!bias.empty() && static_cast<int>(bias.size()) != c_out)
        throw ShapeError("conv2d: bias length " + std::to_string(bias.size()) +
                         " != output channels " + std::to_string(c_out));

    const int oh = out_extent(input.h(), k, stride, padding);
    const int ow = out_extent(input.w(), k, stride, padding);
    Tensor out(input.n(), c_out, oh, ow);

    const int k_dim = input.c() * k * k;
    const std::size_t n_dim = static_cast<std::size_t>(oh) * ow;
    const bool pointwise = (k == 1 && stride == 1 && padding == 0);
    std::vector<float> col;
    if (!pointwise) col.resize(static_cast<std::size_t>(k_dim) * n_dim);

    for (int b = 0; b < input.n(); ++b) {
        const float* src = input.data() + static_cast<std::size_t>(b) * input.c() * input.h() * input.w();
        const float* mat = src;
        if (!pointwise) {
            im2col(src, input.c(), input.h(), input.w(), k, stride, padding, oh, ow, col.data());
            mat = col.data();
        }
        float* dst = out.data() + static_cast<std::size_t>(b) * c_out * n_dim;
        gemm_acc(weight.data(), mat, dst, c_out, k_dim, static_cast<int>(n_dim));
        if (!bias.empty()) {
            for (int co = 0; co < c_out; ++co) {
                float* row = dst + static_cast<std::size_t>(co) * n_dim;
                const float bv = bias[co];
                for (std::size_t i = 0; i < n_dim; ++i) row[i] += bv;
            }
        }
    }
    return out;
}

Tensor batch_norm(const Tensor& input, std::span<const float> gamma, std::span<const float> beta,
                  std::span<const float> running_mean, std::span<const float> running_var,
                  float eps) {
    const std::size_t c = static_cast<std::size_t>(input.c());
    if (gamma.size() != c || beta.size() != c || running_mean.size() != c ||
        running_var.size() != c)
        throw ShapeError("batch_norm: parameter length != channel count " + std::to_string(c));

    std::vector<float> scale(c), shift(c);
    for (std::size_t i = 0; i < c; ++i) {
        const float s = gamma[i] / std::sqrt(running_var[i] + eps);
        scale[i] = s;
        shift[i] = beta[i] - running_mean[i] * s;
    }

    Tensor out(input.shape());
    const std::size_t plane = static_cast<std::size_t>(input.h()) * input.w();
    for (int b = 0; b < input.n(); ++b) {
        for (std::size_t ci = 0; ci < c; ++ci) {
            const float* src = input.data() + (b * c + ci) * plane;
            float* dst = out.data() + (b * c + ci) * plane;
            const float s = scale[ci], t = shift[ci];
            for (std::size_t i = 0; i < plane; ++i) dst[i] = src[i] * s + t;
        }
    }
    return out;
}

Tensor activation(const Tensor& input, Act kind) {
    Tensor out(input.shape());
    const float* src = input.data();
    float* dst = out.data();
    const std::size_t n = input.size();
    switch (kind) {
        case Act::Silu:
            for (std::size_t i = 0; i < n; ++i) dst[i] = silu_scalar(src[i]);
            break;
        case Act::Gelu:
            for (std::size_t i = 0; i < n; ++i) dst[i] = gelu_scalar(src[i]);
            break;
        case Act::Relu:
            for (std::size_t i = 0; i < n; ++i) dst[i] = relu_scalar(src[i]);
            break;
        case Act::Sigmoid:
            for (std::size_t i = 0; i < n; ++i) dst[i] = sigmoid_scalar(src[i]);
            break;
    }
    return out;
}

Tensor max_pool2d(const Tensor& input, int k, int stride, int padding) {
    if (k < 1) throw ConfigError("max_pool2d: kernel must be >= 1");
    if (stride < 1) throw ConfigError("max_pool2d: stride must be >= 1");
    if (padding < 0 || padding >= k)
        throw ConfigError("max_pool2d: padding must satisfy 0 <= p < k");
    if (k > input.h() + 2 * padding || k > input.w() + 2 * padding)
        throw ShapeError("max_pool2d: window exceeds padded input " + input.shape().str());

    const int oh = out_extent(input.h(), k, stride, padding);
    const int ow = out_extent(input.w(), k, stride, padding);
    Tensor out(input.n(), input.c(), oh, ow);
    const std::size_t plane = static_cast<std::size_t>(input.h()) * input.w();
    const std::size_t oplane = static_cast<std::size_t>(oh) * ow;
    for (int b = 0; b < input.n(); ++b) {
        for (int ci = 0; ci < input.c(); ++ci) {
            const float* src = input.data() + (static_cast<std::size_t>(b) * input.c() + ci) * plane;
            float* dst = out.data() + (static_cast<std::size_t>(b) * input.c() + ci) * oplane;
            for (int oy = 0; oy < oh; ++oy) {
                const int y0 = std::max(0, oy * stride - padding);
                const int y1 = std::min(input.h(), oy * stride - padding + k);
                for (int ox = 0; ox < ow; ++ox) {
                    const int x0 = std::max(0, ox * stride - padding);
                    const int x1 = std::min(input.w(), ox * stride - padding + k);
                    float best = -std::numeric_limits<float>::infinity();
                    for (int y = y0; y < y1; ++y) {
                        const float* row = src + static_cast<std::size_t>(y) * input.w();
                        for (int x = x0; x < x1; ++x) best = std::max(best, row[x]);
                    }
                    dst[static_cast<std::size_t>(oy) * ow + ox] = best;
                }
            }
        }
    }
    return out;
}

Tensor upsample_nearest2x(const Tensor& input) {
    Tensor out(input.n(), input.c(), input.h() * 2, input.w() * 2);
    for (int b = 0; b < input.n(); ++b)
        for (int ci = 0; ci < input.c(); ++ci)
            for (int y = 0; y < input.h(); ++y) {
                const float* src =
                    input.data() + ((static_cast<std::size_t>(b) * input.c() + ci) * input.h() + y) *
                                       input.w();
                for (int r = 0; r < 2; ++r) {
                    float* dst = out.data() +
                                 ((static_cast<std::size_t>(b) * input.c() + ci) * out.h() + 2 * y + r) *
                                     out.w();
                    for (int x = 0; x < input.w(); ++x) {
                        dst[2 * x] = src[x];
                        dst[2 * x + 1] = src[x];
                    }
                }
            }
    return out;
}

Tensor concat_channels(std::span<const Tensor> parts) {
    if (parts.empty()) throw ShapeError("concat_channels: no inputs");
    const Tensor& first = parts[0];
    int c_total = 0;
    for (const Tensor& p : parts) {
        if (p.n() != first.n() || p.h() != first.h() || p.w() != first.w())
            throw ShapeError("concat_channels: spatial mismatch " + p.shape().str() + " vs " +
                             first.shape().str());
        c_total += p.c();
    }
    Tensor out(first.n(), c_total, first.h(), first.w());
    const std::size_t plane = static_cast<std::size_t>(first.h()) * first.w();
    for (int b = 0; b < first.n(); ++b) {
        std::size_t co = 0;
        for (const Tensor& p : parts) {
            const float* src = p.data() + static_cast<std::size_t>(b) * p.c() * plane;
            float* dst = out.data() + (static_cast<std::size_t>(b) * c_total + co) * plane;
            std::memcpy(dst, src, sizeof(float) * p.c() * plane);
            co += p.c();
        }
    }
    return out;
}

std::vector<Tensor> split_channels(const Tensor& input, std::span<const int> sizes) {
    int sum = 0;
    for (int s : sizes) {
        if (s <= 0) throw ShapeError("split_channels: non-positive size");
        sum += s;
    }
    if (sum != input.c())
        throw ShapeError("split_channels: sizes sum " + std::to_string(sum) +
                         " != channel count " + std::to_string(input.c()));
    std::vector<Tensor> out;
    out.reserve(sizes.size());
    const std::size_t plane = static_cast<std::size_t>(input.h()) * input.w();
    int c0 = 0;
    for (int s : sizes) {
        Tensor part(input.n(), s, input.h(), input.w());
        for (int b = 0; b < input.n(); ++b) {
            const float* src = input.data() + (static_cast<std::size_t>(b) * input.c() + c0) * plane;
            float* dst = part.data() + static_cast<std::size_t>(b) * s * plane;
            std::memcpy(dst, src, sizeof(float) * s * plane);
        }
        out.push_back(std::move(part));
        c0 += s;
    }
    return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
    if (!(a.shape() == b.shape()))
        throw ShapeError("add: shape mismatch " + a.shape().str() + " vs " + b.shape().str());
    Tensor out(a.shape());
    const float* pa = a.data();
    const float* pb = b.data();
    float* pc = out.data();
    for (std::size_t i = 0; i < a.size(); ++i) pc[i] = pa[i] + pb[i];
    return out;
}

}  // namespace flamedet
