#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "flamedet/errors.hpp"

namespace flamedet {

struct Shape {
    int n = 0, c = 0, h = 0, w = 0;

    bool operator==(const Shape&) const = default;
    std::size_t numel() const {
        return static_cast<std::size_t>(n) * c * h * w;
    }
    std::string str() const;
};

/// Rank-4 NCHW float tensor, row-major with w fastest.
class Tensor {
public:
    Tensor() = default;
    Tensor(int n, int c, int h, int w);
    explicit Tensor(Shape s);
    static Tensor full(Shape s, float value);
    static Tensor from_data(Shape s, std::vector<float> data);

    const Shape& shape() const { return shape_; }
    int n() const { return shape_.n; }
    int c() const { return shape_.c; }
    int h() const { return shape_.h; }
    int w() const { return shape_.w; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    float* data() { return data_.data(); }
    const float* data() const { return data_.data(); }

    float& at(int n, int c, int y, int x) {
        return data_[((static_cast<std::size_t>(n) * shape_.c + c) * shape_.h + y) * shape_.w + x];
    }
    float at(int n, int c, int y, int x) const {
        return data_[((static_cast<std::size_t>(n) * shape_.c + c) * shape_.h + y) * shape_.w + x];
    }

    bool all_finite() const;

private:
    Shape shape_;
    std::vector<float> data_;
};

enum class Act { Silu, Gelu, Relu, Sigmoid };

Act act_from_string(const std::string& s);
const char* to_string(Act a);

// Scalar activation kernels (shared by the tensor op and by tests).
float sigmoid_scalar(float x);
float silu_scalar(float x);
float gelu_scalar(float x);
float relu_scalar(float x);

/// Cross-correlation with zero padding. weight is (c_out, c_in, k, k);
/// bias may be empty. Output spatial size floor((d + 2p - k)/s) + 1.
Tensor conv2d(const Tensor& input, const Tensor& weight, std::span<const float> bias,
              int stride, int padding);

/// Inference-mode batch norm from running statistics.
Tensor batch_norm(const Tensor& input, std::span<const float> gamma,
                  std::span<const float> beta, std::span<const float> running_mean,
                  std::span<const float> running_var, float eps);

Tensor activation(const Tensor& input, Act kind);

/// Sliding-window max with -inf padding semantics (padding never wins).
Tensor max_pool2d(const Tensor& input, int k, int stride, int padding);

/// Each source pixel becomes a 2x2 block.
Tensor upsample_nearest2x(const Tensor& input);

Tensor concat_channels(std::span<const Tensor> parts);
std::vector<Tensor> split_channels(const Tensor& input, std::span<const int> sizes);

/// Elementwise sum; shapes must match.
Tensor add(const Tensor& a, const Tensor& b);

}  // namespace flamedet
