#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sfec/layers.hpp"
#include "sfec/tensor.hpp"

namespace sfec {

/// On-disk layout: "SFEC" magic, u32 format version, u64 header length, JSON
/// header (preset, hyperparameters, tensor manifest with byte offsets), then
/// the float32 payload in manifest order. All integers and floats little-endian.
constexpr std::uint32_t kCheckpointVersion = 1;

struct TensorEntry {
    std::string name;
    Shape shape;
    std::uint64_t offset = 0;  // bytes from payload start
};

struct CheckpointInfo {
    std::uint32_t version = 0;
    std::string preset;
    std::map<std::string, std::string> meta;
    std::vector<TensorEntry> tensors;
};

void save_checkpoint(const std::string& path, const std::string& preset,
                     const std::map<std::string, std::string>& meta,
                     const ParamList<float>& params);

/// Header only; no payload validation beyond the total length.
CheckpointInfo read_checkpoint_info(const std::string& path);

/// Fills `params` in place. The manifest must list exactly the same names and
/// shapes; the preset must match the requested architecture.
std::map<std::string, std::string> load_checkpoint(const std::string& path,
                                                   const std::string& expected_preset,
                                                   const ParamList<float>& params);

}  // namespace sfec
