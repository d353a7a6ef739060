#include <doctest.h>

#include <cmath>

#include "flamedet/tensor.hpp"
#include "test_util.hpp"

using namespace flamedet;
using testutil::bit_equal;
using testutil::max_rel_diff;
using testutil::naive_conv2d;
using testutil::naive_max_pool;
using testutil::random_tensor;

TEST_CASE("conv2d pointwise scaling on ones") {
    Tensor in = Tensor::full(Shape{1, 1, 3, 3}, 1.0f);
    Tensor w = Tensor::from_data(Shape{1, 1, 1, 1}, {2.0f});
    Tensor out = conv2d(in, w, {}, 1, 0);
    CHECK(out.shape() == Shape{1, 1, 3, 3});
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out.data()[i] == doctest::Approx(2.0));
}

TEST_CASE("conv2d full-window sum") {
    Tensor in = Tensor::from_data(Shape{1, 1, 2, 2}, {1, 2, 3, 4});
    Tensor w = Tensor::full(Shape{1, 1, 2, 2}, 1.0f);
    Tensor out = conv2d(in, w, {}, 1, 0);
    CHECK(out.shape() == Shape{1, 1, 1, 1});
    CHECK(out.data()[0] == doctest::Approx(10.0));
}

TEST_CASE("conv2d strided output shape and oracle") {
    Rng rng(7);
    Tensor in = random_tensor(Shape{1, 3, 8, 8}, rng);
    Tensor w = random_tensor(Shape{4, 3, 3, 3}, rng);
    Tensor out = conv2d(in, w, {}, 2, 1);
    CHECK(out.shape() == Shape{1, 4, 4, 4});
    CHECK(max_rel_diff(out, naive_conv2d(in, w, nullptr, 2, 1)) < 1e-6);
}

TEST_CASE("conv2d matches the naive reference over random configurations") {
    Rng rng(1234);
    for (int rep = 0; rep < 100; ++rep) {
        const int k = rng.bounded(2) ? 3 : 1;
        const int stride = rng.bounded(2) ? 2 : 1;
        const int pad = k == 3 ? static_cast<int>(rng.bounded(2)) : 0;
        const int c_in = 1 + rng.bounded(5);
        const int c_out = 1 + rng.bounded(6);
        const int h = k + static_cast<int>(rng.bounded(10));
        const int w = k + static_cast<int>(rng.bounded(10));
        Tensor in = random_tensor(Shape{1 + static_cast<int>(rng.bounded(2)), c_in, h, w}, rng);
        Tensor weight = random_tensor(Shape{c_out, c_in, k, k}, rng);
        std::vector<float> bias(c_out);
        for (float& b : bias) b = static_cast<float>(rng.uniform(-0.5, 0.5));

        Tensor got = conv2d(in, weight, bias, stride, pad);
        Tensor want = naive_conv2d(in, weight, bias.data(), stride, pad);
        CHECK(max_rel_diff(got, want) < 1e-5);
    }
}

TEST_CASE("conv2d k=1 equals per-pixel matrix-vector product") {
    Rng rng(5);
    Tensor in = random_tensor(Shape{1, 6, 5, 4}, rng);
    Tensor w = random_tensor(Shape{3, 6, 1, 1}, rng);
    Tensor out = conv2d(in, w, {}, 1, 0);
    for (int y = 0; y < in.h(); ++y)
        for (int x = 0; x < in.w(); ++x)
            for (int co = 0; co < 3; ++co) {
                float acc = 0.0f;
                for (int ci = 0; ci < 6; ++ci) acc += w.at(co, ci, 0, 0) * in.at(0, ci, y, x);
                CHECK(out.at(0, co, y, x) == doctest::Approx(acc).epsilon(1e-5));
            }
}

TEST_CASE("conv2d rejects mismatched shapes") {
    Tensor in(1, 3, 8, 8);
    CHECK_THROWS_AS(conv2d(in, Tensor(4, 4, 3, 3), {}, 1, 1), ShapeError);
    CHECK_THROWS_AS(conv2d(in, Tensor(4, 3, 9, 9), {}, 1, 0), ShapeError);
    CHECK_THROWS_AS(conv2d(in, Tensor(4, 3, 3, 3), {}, 0, 0), ConfigError);
}

TEST_CASE("batch_norm identity parameters") {
    Rng rng(2);
    Tensor in = random_tensor(Shape{1, 3, 4, 4}, rng);
    std::vector<float> ones(3, 1.0f), zeros(3, 0.0f);
    Tensor out = batch_norm(in, ones, zeros, zeros, ones, 0.0f);
    CHECK(bit_equal(in, out));
}

TEST_CASE("batch_norm scalar hand value") {
    Tensor in = Tensor::full(Shape{1, 1, 1, 1}, 2.0f);
    std::vector<float> gamma{3.0f}, beta{1.0f}, mean{0.0f}, var{4.0f};
    Tensor out = batch_norm(in, gamma, beta, mean, var, 0.0f);
    CHECK(out.data()[0] == doctest::Approx(4.0));
}

TEST_CASE("batch_norm centers a constant channel to beta") {
    Tensor in = Tensor::full(Shape{2, 1, 3, 3}, 5.0f);
    std::vector<float> gamma{2.0f}, beta{-7.0f}, mean{5.0f}, var{13.0f};
    Tensor out = batch_norm(in, gamma, beta, mean, var, 1e-5f);
    for (std::size_t i = 0; i < out.size(); ++i)
        CHECK(out.data()[i] == doctest::Approx(-7.0));
}

TEST_CASE("batch_norm analytic inverse recovers the input") {
    Rng rng(3);
    Tensor in = random_tensor(Shape{1, 4, 5, 5}, rng);
    std::vector<float> gamma(4), beta(4), mean(4), var(4);
    for (int i = 0; i < 4; ++i) {
        gamma[i] = static_cast<float>(rng.uniform(0.5, 2.0));
        beta[i] = static_cast<float>(rng.uniform(-1.0, 1.0));
        mean[i] = static_cast<float>(rng.uniform(-1.0, 1.0));
        var[i] = static_cast<float>(rng.uniform(0.1, 2.0));
    }
    const float eps = 1e-4f;
    Tensor y = batch_norm(in, gamma, beta, mean, var, eps);
    Tensor back(in.shape());
    const std::size_t plane = 25;
    for (int c = 0; c < 4; ++c) {
        const float s = std::sqrt(var[c] + eps);
        for (std::size_t i = 0; i < plane; ++i) {
            const std::size_t idx = c * plane + i;
            back.data()[idx] = (y.data()[idx] - beta[c]) / gamma[c] * s + mean[c];
        }
    }
    CHECK(testutil::max_abs_diff(in, back) < 1e-5);
}

TEST_CASE("batch_norm rejects wrong vector lengths") {
    Tensor in(1, 3, 2, 2);
    std::vector<float> two(2, 1.0f), three(3, 1.0f);
    CHECK_THROWS_AS(batch_norm(in, two, three, three, three, 0.0f), ShapeError);
}

TEST_CASE("activation golden values") {
    Tensor in = Tensor::from_data(Shape{1, 1, 1, 4}, {0.0f, 1.0f, -3.0f, 0.5f});
    Tensor silu = activation(in, Act::Silu);
    CHECK(silu.data()[0] == 0.0f);
    CHECK(silu.data()[1] == doctest::Approx(0.731059).epsilon(1e-5));
    Tensor relu = activation(in, Act::Relu);
    CHECK(relu.data()[2] == 0.0f);
    CHECK(relu.data()[1] == 1.0f);
    Tensor sig = activation(in, Act::Sigmoid);
    CHECK(sig.data()[0] == doctest::Approx(0.5));
    // GELU exact CDF form: 0.5 * 1 * (1 + erf(1/sqrt(2))).
    Tensor gelu = activation(in, Act::Gelu);
    CHECK(gelu.data()[1] == doctest::Approx(0.8413447461).epsilon(1e-6));
    CHECK(gelu.data()[0] == 0.0f);
}

TEST_CASE("silu equals x times sigmoid exactly") {
    Rng rng(11);
    for (int i = 0; i < 1000; ++i) {
        const float x = static_cast<float>(rng.uniform(-20.0, 20.0));
        CHECK(silu_scalar(x) == x * sigmoid_scalar(x));
    }
}

TEST_CASE("max_pool2d basics") {
    Tensor c = Tensor::full(Shape{1, 2, 6, 6}, 3.5f);
    Tensor pooled = max_pool2d(c, 5, 1, 2);
    CHECK(pooled.shape() == c.shape());
    for (std::size_t i = 0; i < pooled.size(); ++i) CHECK(pooled.data()[i] == 3.5f);

    Tensor in = Tensor::from_data(Shape{1, 1, 2, 2}, {1, 2, 3, 4});
    Tensor m = max_pool2d(in, 2, 1, 0);
    CHECK(m.shape() == Shape{1, 1, 1, 1});
    CHECK(m.data()[0] == 4.0f);
}

TEST_CASE("max_pool2d matches the naive oracle and preserves SPPF shape") {
    Rng rng(17);
    Tensor in = random_tensor(Shape{1, 2, 6, 6}, rng);
    Tensor out = max_pool2d(in, 5, 1, 2);
    CHECK(out.shape() == in.shape());
    CHECK(bit_equal(out, naive_max_pool(in, 5, 1, 2)));
}

TEST_CASE("max_pool2d rejects oversized windows") {
    Tensor in(1, 1, 3, 3);
    CHECK_THROWS_AS(max_pool2d(in, 7, 1, 1), ShapeError);
    CHECK_THROWS_AS(max_pool2d(in, 3, 1, 3), ConfigError);
}

TEST_CASE("upsample_nearest2x structure") {
    Tensor one = Tensor::full(Shape{1, 1, 1, 1}, 5.0f);
    Tensor up = upsample_nearest2x(one);
    CHECK(up.shape() == Shape{1, 1, 2, 2});
    for (std::size_t i = 0; i < 4; ++i) CHECK(up.data()[i] == 5.0f);

    Tensor in = Tensor::from_data(Shape{1, 1, 2, 2}, {1, 2, 3, 4});
    Tensor big = upsample_nearest2x(in);
    CHECK(big.shape() == Shape{1, 1, 4, 4});
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) CHECK(big.at(0, 0, y, x) == in.at(0, 0, y / 2, x / 2));
}

TEST_CASE("upsample then stride-2 subsample is the identity") {
    Rng rng(23);
    Tensor in = random_tensor(Shape{2, 3, 5, 7}, rng);
    Tensor up = upsample_nearest2x(in);
    for (int b = 0; b < in.n(); ++b)
        for (int c = 0; c < in.c(); ++c)
            for (int y = 0; y < in.h(); ++y)
                for (int x = 0; x < in.w(); ++x)
                    CHECK(up.at(b, c, 2 * y, 2 * x) == in.at(b, c, y, x));
}

TEST_CASE("concat and split round trips are bit exact") {
    Rng rng(31);
    Tensor a = random_tensor(Shape{1, 2, 4, 5}, rng);
    Tensor b = random_tensor(Shape{1, 3, 4, 5}, rng);

    std::vector<Tensor> parts;
    parts.push_back(a);
    Tensor single = concat_channels(parts);
    CHECK(bit_equal(single, a));

    parts.push_back(b);
    Tensor merged = concat_channels(parts);
    CHECK(merged.shape() == Shape{1, 5, 4, 5});
    for (int c = 0; c < 2; ++c)
        for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 5; ++x) CHECK(merged.at(0, c, y, x) == a.at(0, c, y, x));
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 5; ++x) CHECK(merged.at(0, 2 + c, y, x) == b.at(0, c, y, x));

    std::vector<int> sizes{2, 3};
    std::vector<Tensor> split = split_channels(merged, sizes);
    REQUIRE(split.size() == 2);
    CHECK(bit_equal(split[0], a));
    CHECK(bit_equal(split[1], b));
    CHECK(bit_equal(concat_channels(split), merged));
}

TEST_CASE("split/concat reject inconsistent shapes") {
    Tensor a(1, 2, 4, 4), b(1, 2, 5, 4);
    std::vector<Tensor> parts{a, b};
    CHECK_THROWS_AS(concat_channels(parts), ShapeError);
    std::vector<int> bad{1, 2};
    CHECK_THROWS_AS(split_channels(a, bad), ShapeError);
}

TEST_CASE("kernels produce finite values") {
    Rng rng(41);
    Tensor in = random_tensor(Shape{1, 3, 9, 9}, rng, -50.0, 50.0);
    Tensor w = random_tensor(Shape{8, 3, 3, 3}, rng, -2.0, 2.0);
    CHECK(conv2d(in, w, {}, 2, 1).all_finite());
    CHECK(activation(in, Act::Silu).all_finite());
    CHECK(activation(in, Act::Gelu).all_finite());
    CHECK(max_pool2d(in, 3, 2, 1).all_finite());
}
