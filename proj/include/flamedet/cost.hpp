#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flamedet/model.hpp"

namespace flamedet {

/// Cost figures for a partial convolution and its pointwise companions.
/// All terms are exact closed forms:
///   flops_pconv      = h*w*k^2*c_p^2
///   mem_access_pconv = h*w*2*c_p + k^2*c_p^2
///   flops_tshape     = h*w*(k^2*c_p*c + c*(c - c_p))
///   flops_two_step   = h*w*(k^2*c_p^2 + c^2)
struct PConvCost {
    std::uint64_t flops_pconv = 0;
    std::uint64_t mem_access_pconv = 0;
    std::uint64_t flops_tshape = 0;
    std::uint64_t flops_two_step = 0;
};

PConvCost pconv_cost(std::uint64_t h, std::uint64_t w, std::uint64_t k, std::uint64_t c,
                     std::uint64_t c_p);

struct CostRow {
    std::string name;
    std::uint64_t params = 0;
    std::uint64_t macs = 0;
    std::uint64_t mem_access = 0;
};

/// Per-layer accounting. params counts conv weights, biases, and BN
/// gamma/beta (running statistics are buffers and excluded). macs and
/// mem_access cover convolution layers only; FLOPs = 2 * MACs.
struct CostReport {
    std::vector<CostRow> rows;
    std::uint64_t total_params = 0;
    std::uint64_t total_macs = 0;
    std::uint64_t total_flops = 0;
    std::uint64_t total_mem_access = 0;
};

CostReport cost_report(const ModelGraph& graph, int imgsz);
CostReport count_params(const ModelGraph& graph);
CostReport count_flops(const ModelGraph& graph, int imgsz);

/// Parameter composition of a single block, for closed-form checks.
struct ParamBreakdown {
    std::uint64_t conv_weights = 0;
    std::uint64_t bn_params = 0;
    std::uint64_t biases = 0;
    std::uint64_t total() const { return conv_weights + bn_params + biases; }
};

ParamBreakdown param_breakdown(const BlockParams& p);

}  // namespace flamedet
