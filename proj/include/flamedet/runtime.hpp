#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "flamedet/model.hpp"
#include "flamedet/weights.hpp"

namespace flamedet {

enum class WeightRole { ConvWeight, Bias, Gamma, Beta, Mean, Var };

struct TensorSpec {
    std::string name;
    std::vector<std::uint32_t> dims;
    WeightRole role;
};

/// Enumerates every tensor the graph needs, in a fixed order. All weight
/// naming lives here; the binder, the initializer, and the verifier share it.
void for_each_weight(const ModelGraph& graph,
                     const std::function<void(const TensorSpec&)>& visit);

std::vector<TensorSpec> required_weights(const ModelGraph& graph);

/// Deterministic initialization: conv weights uniform in [-b, b] with
/// b = sqrt(1 / (c_in * k * k)); biases 0; BN gamma=1, beta=0, mean=0, var=1.
/// Per-tensor streams are derived from (seed, name), so identical seeds give
/// identical stores regardless of traversal order.
WeightStore init_weights(const ModelGraph& graph, std::uint64_t seed);

/// Checks that the store carries every required tensor with the exact shape.
/// In strict mode any extra tensor is an error listing the offending names.
void verify_weights(const ModelGraph& graph, const WeightStore& store, bool strict = true);

/// A graph with its weights bound into runnable blocks. Immutable after
/// construction; forward is const and safe to call concurrently.
class RuntimeModel {
public:
    RuntimeModel(const ModelGraph& graph, const WeightStore& store);

    RawOutputs forward(const Tensor& input) const;
    const ModelGraph& graph() const { return graph_; }

private:
    using BoundOp = std::variant<ConvBNAct, C2f, FasterC2f, SPPF, UpsampleOp, ConcatOp>;
    struct Branch {
        ConvBNAct l0, l1;
        PlainConv l2;
    };

    ModelGraph graph_;
    std::vector<BoundOp> ops_;
    std::array<Branch, 3> box_;
    std::array<Branch, 3> cls_;
};

/// Convenience wrapper: bind weights and run a single forward pass.
RawOutputs forward(const ModelGraph& graph, const WeightStore& store, const Tensor& input);

}  // namespace flamedet
