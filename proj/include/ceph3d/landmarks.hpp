#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ceph3d/errors.hpp"
#include "ceph3d/geometry.hpp"
#include "ceph3d/volume.hpp"

namespace ceph3d {

/// The 12-point craniofacial catalog. Bilateral points carry R_/L_ prefixes.
enum class LandmarkId {
    Na,
    Bregma,
    CFM,
    R_Or,
    L_Or,
    R_Po,
    L_Po,
    Me,
    R_Cor,
    L_Cor,
    R_F,
    L_F,
};

inline constexpr int kNumLandmarks = 12;

enum class LandmarkGroup { Midsagittal, Horizontal, Mandible };

inline constexpr std::array<LandmarkId, kNumLandmarks> kAllLandmarks = {
    LandmarkId::Na,    LandmarkId::Bregma, LandmarkId::CFM,
    LandmarkId::R_Or,  LandmarkId::L_Or,   LandmarkId::R_Po,  LandmarkId::L_Po,
    LandmarkId::Me,    LandmarkId::R_Cor,  LandmarkId::L_Cor, LandmarkId::R_F,
    LandmarkId::L_F,
};

std::string_view landmark_name(LandmarkId id);
LandmarkId landmark_from_name(std::string_view name);
LandmarkGroup landmark_group(LandmarkId id);
std::string_view group_name(LandmarkGroup g);
std::vector<LandmarkId> landmarks_in_group(LandmarkGroup g);

/// Coordinate frame a LandmarkSet lives in.
enum class Frame { World, Voxel };

/// Named 3D points, all in one frame. A complete set holds all 12 ids;
/// partial sets are tolerated only where evaluation reports missing data.
class LandmarkSet {
public:
    explicit LandmarkSet(Frame frame) : frame_(frame) {}

    Frame frame() const { return frame_; }
    void set(LandmarkId id, Vec3 p) { points_[id] = p; }
    bool has(LandmarkId id) const { return points_.count(id) != 0; }
    Vec3 get(LandmarkId id) const;
    std::size_t size() const { return points_.size(); }
    bool complete() const { return points_.size() == kNumLandmarks; }
    const std::map<LandmarkId, Vec3>& points() const { return points_; }

private:
    Frame frame_;
    std::map<LandmarkId, Vec3> points_;
};

/// Per-axis soft supervision for one landmark: three probability vectors,
/// each summing to 1 with its peak at the landmark's voxel index.
struct AxisTarget {
    std::vector<double> x, y, z;
    double sigma = 0.0;
};

/// Normalized Gaussian bump over each axis, centered on the landmark's voxel
/// index: t[i] = exp(-(i-mu)^2 / (2 sigma^2)) / Z.
AxisTarget encode_axis_target(Vec3i landmark_voxel, Vec3i dims, double sigma);

/// encode_axis_target for every landmark in a complete voxel-frame set.
std::map<LandmarkId, AxisTarget> encode_targets(const LandmarkSet& lm, Vec3i dims,
                                                double sigma);

/// Per-axis argmax, ties broken toward the lowest index.
Vec3i decode_prediction(const std::vector<double>& px, const std::vector<double>& py,
                        const std::vector<double>& pz);

/// Expected-value (probability-weighted mean index) decoding. Off by default
/// in the pipeline; provided as an alternative decode rule.
Vec3 decode_expectation(const std::vector<double>& px, const std::vector<double>& py,
                        const std::vector<double>& pz);

/// World -> voxel conversion of every point, rounded to the nearest integer
/// index (half away from zero). Throws OutOfBounds naming the landmark if a
/// rounded index leaves the grid.
LandmarkSet landmarks_world_to_voxel(const LandmarkSet& lm, const Volume& v);

/// Voxel -> world conversion (voxel centers).
LandmarkSet landmarks_voxel_to_world(const LandmarkSet& lm, const Volume& v);

/// Text format: first line `#frame=world` or `#frame=voxel`, then one line
/// per landmark: `<id> <x> <y> <z>`.
void save_landmarks(const LandmarkSet& lm, const std::filesystem::path& path);
LandmarkSet load_landmarks(const std::filesystem::path& path);

} // namespace ceph3d
