#pragma once

#include <map>
#include <string>
#include <vector>

#include "hyperlat/tensor.hpp"

namespace hyperlat {

// Flat parameter archive: a manifest of (name, shape, payload offset)
// entries followed by raw little-endian float64 payloads. Round-trips are
// bit-exact. Shared by checkpointing and pretrain→finetune transfer.
struct CheckpointEntry {
    std::vector<int64_t> shape;
    std::vector<double> values;

    bool operator==(const CheckpointEntry&) const = default;
};

using CheckpointData = std::map<std::string, CheckpointEntry>;

void save_checkpoint(const ParamStore& params, const std::string& path);
void save_checkpoint(const CheckpointData& data, const std::string& path);
CheckpointData load_checkpoint(const std::string& path);

CheckpointData snapshot(const ParamStore& params);

// Copies every archive entry whose name exists in the store (shape must
// agree). Returns the number of parameters loaded.
size_t load_matching(const CheckpointData& data, const ParamStore& params);

} // namespace hyperlat
