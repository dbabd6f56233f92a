#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ceph3d/adadelta.hpp"
#include "ceph3d/tensor.hpp"

namespace ceph3d {

/// One serialized array: name, dims, f32 values.
struct CheckpointBlock {
    std::string name;
    std::vector<int> shape;
    std::vector<float> values;
};

/// Weight container "CW3D0001" (little-endian): u32 block count, then per
/// block u32 name length + UTF-8 name, u32 rank, rank x u32 dims, f32 values.
/// Optimizer accumulators ride along as blocks named `<param>.Eg2` / `.Edx2`.
void save_checkpoint(const std::vector<CheckpointBlock>& blocks,
                     const std::filesystem::path& path);
std::vector<CheckpointBlock> load_checkpoint(const std::filesystem::path& path);

/// Assemble blocks from parameter pointers, appending optimizer state when
/// given. Block order follows the input order.
std::vector<CheckpointBlock> blocks_from_params(const std::vector<const ParamBlock<float>*>& params,
                                                const Adadelta<float>* opt = nullptr);

/// Copy loaded values into matching parameter blocks (by name; sizes must
/// agree) and, when `opt` is given, restore its accumulators.
void restore_params(const std::vector<CheckpointBlock>& blocks,
                    const std::vector<ParamBlock<float>*>& params,
                    Adadelta<float>* opt = nullptr);

} // namespace ceph3d
