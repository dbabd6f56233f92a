#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ceph3d/adadelta.hpp"
#include "ceph3d/augment.hpp"
#include "ceph3d/model.hpp"

namespace ceph3d {

/// One training example: a raw HU volume with world-frame landmarks, or an
/// already preprocessed (normalized, network-grid) volume with voxel-frame
/// landmarks.
struct TrainSample {
    Volume volume;
    LandmarkSet landmarks;
};

struct TrainConfig {
    int epochs = 100;
    int batch_size = 1;
    int augment_per_sample = 1;
    std::uint64_t seed = 0; // root of the shuffle/dropout/augment streams
    AugmentConfig aug;
    std::filesystem::path checkpoint_path; // empty = no checkpoints written
};

struct EpochStats {
    int epoch = 0;              // 1-based
    double mean_loss = 0.0;     // mean per-sample total cross-entropy
    double mean_err_mm = 0.0;   // mean 3D decode error against targets
    double mean_target_entropy = 0.0;
};

struct TrainLog {
    std::vector<EpochStats> epochs;
    int best_epoch = 0;
    double best_loss = 0.0;
};

/// Adadelta training of the per-axis cross-entropy loss. Writes a checkpoint
/// (with optimizer state) at the best-loss epoch and at the end when
/// `checkpoint_path` is set. Throws DivergedError naming the epoch on a
/// non-finite loss.
TrainLog train(ModelF& model, const std::vector<TrainSample>& dataset,
               const TrainConfig& tc);

/// Path of the best-epoch checkpoint for a given final checkpoint path.
std::filesystem::path best_checkpoint_path(const std::filesystem::path& final_path);

/// Tab-separated log: one `epoch<TAB>mean_loss<TAB>mean_3d_err_mm` line per epoch.
void write_train_log(const TrainLog& log, const std::filesystem::path& path);

} // namespace ceph3d
