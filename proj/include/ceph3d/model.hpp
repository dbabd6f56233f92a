#pragma once

#include <array>
#include <map>
#include <memory>
#include <vector>

#include "ceph3d/landmarks.hpp"
#include "ceph3d/layers.hpp"
#include "ceph3d/volume.hpp"

namespace ceph3d {

/// Network topology and preprocessing grid. `block_channels` are post-maxout
/// widths of the four conv blocks; each block runs three same-size
/// convolutions with kernels (1,3,3), (3,1,3), (3,3,1) -- the last stage
/// widens to maxout_k * channels -- then maxout and a 2x2x2 max-pool.
struct ModelConfig {
    Vec3i input_dims{128, 128, 152};
    std::vector<int> block_channels{8, 16, 32, 64};
    int maxout_k = 2;
    int dense_hidden = 512;
    double dropout_rate = 0.5;
    double sigma = 3.0;
    double target_spacing = 2.0;
    double pad_value_hu = -1000.0;
    std::uint64_t seed = 0;
    /// Head order; permuting it permutes outputs identically.
    std::array<LandmarkId, kNumLandmarks> landmark_order = kAllLandmarks;

    /// Desk-scale profile: 64x64x76 input, narrow channels.
    static ModelConfig toy();
    /// Published-scale profile (the default values above).
    static ModelConfig full();
};

/// Per-landmark axis probability vectors produced by forward().
template <typename T>
struct HeadOutput {
    std::vector<T> x, y, z;
};

/// Activation tape for one forward pass. Training keeps one alive for the
/// backward pass; inference uses a throwaway local so a shared const model
/// can serve multiple threads.
template <typename T>
struct Workspace {
    struct BlockTape {
        Tensor4<T> input, s1, s2, s3, activated;
        std::vector<std::uint8_t> maxout_winners;
        std::vector<std::int32_t> pool_argmax;
    };
    std::vector<BlockTape> blocks;
    std::vector<T> flat, dropped, fc_pre, hidden;
    std::vector<T> dropout_mask;
    std::vector<std::uint8_t> fc_winners;
    std::map<LandmarkId, HeadOutput<T>> probs;
    bool forward_done = false;
};

/// One conv block: three staged convolutions, maxout, max-pool.
template <typename T>
struct ConvBlock {
    Conv3d<T> stage1, stage2, stage3;
    int k = 2;
};

/// Four-block 3D CNN with per-landmark, per-axis softmax heads.
template <typename T>
class Model {
public:
    explicit Model(const ModelConfig& cfg);

    const ModelConfig& config() const { return cfg_; }

    /// Spatial dims after the four pooling halvings.
    Vec3i conv_output_dims() const;
    std::size_t flat_size() const;
    std::size_t total_logits() const;

    /// Run the network on a normalized volume matching input_dims.
    /// `training` enables dropout, drawing the mask from `dropout_rng`.
    void forward(const Volume& input, bool training, Rng* dropout_rng,
                 Workspace<T>& ws) const;

    /// Forward from a raw channel tensor (used by gradient checks).
    void forward_tensor(const Tensor4<T>& input, bool training, Rng* dropout_rng,
                        Workspace<T>& ws) const;

    /// Cross-entropy of the workspace's head outputs against targets.
    double loss(const Workspace<T>& ws, const std::map<LandmarkId, AxisTarget>& targets) const;

    /// Backpropagate the loss; accumulates parameter gradients.
    /// Throws StateError if the workspace holds no forward pass.
    void backward(Workspace<T>& ws, const std::map<LandmarkId, AxisTarget>& targets);

    void zero_grads();
    std::vector<ParamBlock<T>*> param_blocks();
    std::vector<const ParamBlock<T>*> param_blocks() const;

    /// Argmax-decoded voxel indices for every landmark in the workspace.
    LandmarkSet decode(const Workspace<T>& ws) const;

private:
    ModelConfig cfg_;
    std::vector<ConvBlock<T>> blocks_;
    Dense<T> fc_;
    std::map<LandmarkId, std::array<Dense<T>, 3>> heads_;
};

using ModelF = Model<float>;
using ModelD = Model<double>;

/// Full inference path: resample -> pad -> normalize -> forward -> argmax
/// decode -> world coordinates on the resampled grid.
LandmarkSet predict(const ModelF& model, const Volume& raw);

/// The preprocessing chain on its own: raw volume to network-grid input.
Volume preprocess_volume(const Volume& raw, const ModelConfig& cfg);

} // namespace ceph3d
