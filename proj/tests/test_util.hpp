#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "flamedet/rng.hpp"
#include "flamedet/tensor.hpp"

namespace testutil {

inline flamedet::Tensor random_tensor(flamedet::Shape shape, flamedet::Rng& rng,
                                      double lo = -1.0, double hi = 1.0) {
    flamedet::Tensor t(shape);
    for (std::size_t i = 0; i < t.size(); ++i)
        t.data()[i] = static_cast<float>(rng.uniform(lo, hi));
    return t;
}

inline double max_abs_diff(const flamedet::Tensor& a, const flamedet::Tensor& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::abs(static_cast<double>(a.data()[i]) - b.data()[i]));
    return worst;
}

// Relative where values are large, absolute near zero (denominator floor 1).
inline double max_rel_diff(const flamedet::Tensor& a, const flamedet::Tensor& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double x = a.data()[i], y = b.data()[i];
        const double scale = std::max({std::abs(x), std::abs(y), 1.0});
        worst = std::max(worst, std::abs(x - y) / scale);
    }
    return worst;
}

inline bool bit_equal(const flamedet::Tensor& a, const flamedet::Tensor& b) {
    if (!(a.shape() == b.shape())) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a.data()[i] != b.data()[i]) return false;
    return true;
}

// Reference convolution: plain six nested loops, double accumulation.
inline flamedet::Tensor naive_conv2d(const flamedet::Tensor& in, const flamedet::Tensor& w,
                                     const float* bias, int stride, int pad) {
    const int k = w.h();
    const int oh = (in.h() + 2 * pad - k) / stride + 1;
    const int ow = (in.w() + 2 * pad - k) / stride + 1;
    flamedet::Tensor out(in.n(), w.n(), oh, ow);
    for (int b = 0; b < in.n(); ++b)
        for (int co = 0; co < w.n(); ++co)
            for (int oy = 0; oy < oh; ++oy)
                for (int ox = 0; ox < ow; ++ox) {
                    double acc = bias ? bias[co] : 0.0;
                    for (int ci = 0; ci < in.c(); ++ci)
                        for (int ky = 0; ky < k; ++ky)
                            for (int kx = 0; kx < k; ++kx) {
                                const int iy = oy * stride - pad + ky;
                                const int ix = ox * stride - pad + kx;
                                if (iy < 0 || iy >= in.h() || ix < 0 || ix >= in.w()) continue;
                                acc += static_cast<double>(in.at(b, ci, iy, ix)) *
                                       w.at(co, ci, ky, kx);
                            }
                    out.at(b, co, oy, ox) = static_cast<float>(acc);
                }
    return out;
}

// Reference max pool with -inf padding.
inline flamedet::Tensor naive_max_pool(const flamedet::Tensor& in, int k, int stride, int pad) {
    const int oh = (in.h() + 2 * pad - k) / stride + 1;
    const int ow = (in.w() + 2 * pad - k) / stride + 1;
    flamedet::Tensor out(in.n(), in.c(), oh, ow);
    for (int b = 0; b < in.n(); ++b)
        for (int c = 0; c < in.c(); ++c)
            for (int oy = 0; oy < oh; ++oy)
                for (int ox = 0; ox < ow; ++ox) {
                    float best = -std::numeric_limits<float>::infinity();
                    for (int ky = 0; ky < k; ++ky)
                        for (int kx = 0; kx < k; ++kx) {
                            const int iy = oy * stride - pad + ky;
                            const int ix = ox * stride - pad + kx;
                            if (iy < 0 || iy >= in.h() || ix < 0 || ix >= in.w()) continue;
                            best = std::max(best, in.at(b, c, iy, ix));
                        }
                    out.at(b, c, oy, ox) = best;
                }
    return out;
}

// Unique scratch directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        dir_ = std::filesystem::temp_directory_path() /
               ("flamedet_test_" + tag + "_" + std::to_string(counter++));
        std::filesystem::create_directories(dir_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(dir_, ec);
    }
    const std::filesystem::path& path() const { return dir_; }

private:
    std::filesystem::path dir_;
};

}  // namespace testutil
