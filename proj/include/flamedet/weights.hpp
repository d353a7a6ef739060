#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "flamedet/errors.hpp"

namespace flamedet {

/// A named tensor as stored in the weight container: rank 1..4, f32 payload.
struct StoredTensor {
    std::vector<std::uint32_t> dims;
    std::vector<float> data;

    std::size_t numel() const {
        std::size_t n = 1;
        for (std::uint32_t d : dims) n *= d;
        return n;
    }
};

struct WeightStore {
    std::map<std::string, StoredTensor> entries;
    // In-memory metadata, filled by init_weights / graph verification.
    std::string variant_name;
    int nc = 0;

    const StoredTensor& get(const std::string& name) const;
    bool contains(const std::string& name) const { return entries.count(name) != 0; }
};

/// Container format (little-endian):
///   magic "LYF1" | u32 version=1 | u32 tensor_count
///   directory: { u16 name_len, name bytes, u8 dtype (0=f32), u8 rank,
///                u32 dims[rank], u64 byte_offset }
///   payload: contiguous f32 tensors; offsets relative to payload start,
///   each 64-byte aligned.
void save_weights(const WeightStore& store, const std::filesystem::path& path);
WeightStore load_weights(const std::filesystem::path& path);

}  // namespace flamedet
