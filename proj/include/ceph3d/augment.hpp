#pragma once

#include <optional>

#include "ceph3d/landmarks.hpp"
#include "ceph3d/rng.hpp"
#include "ceph3d/volume.hpp"

namespace ceph3d {

/// Envelope for rigid augmentation draws. Translation is a fraction of each
/// axis extent in voxels; rotation is in degrees about each axis.
struct AugmentConfig {
    bool enabled = true;
    double translate_frac = 0.15;
    double rotate_deg = 15.0;
};

/// One rigid transform: rotation about the grid center (x, then y, then z),
/// followed by translation, both in voxel units.
struct AugmentParams {
    Vec3 translation;  // voxels
    Vec3 rotation_deg; // degrees about x, y, z
};

/// Uniform draw from the envelope. Deterministic for a fixed stream state.
AugmentParams sample_params(Vec3i dims, const AugmentConfig& cfg, Rng& rng);

struct AugmentedSample {
    Volume volume;
    LandmarkSet landmarks;
};

/// Apply the same rigid transform to image and labels. The volume is pulled
/// through the inverse transform with trilinear interpolation (out-of-domain
/// fill = pad value in the volume's intensity scale); landmarks go through
/// the forward transform and are rounded. Returns nullopt if any landmark
/// leaves the grid -- the caller should redraw parameters.
std::optional<AugmentedSample> apply_augmentation(const Volume& v, const LandmarkSet& lm,
                                                  const AugmentParams& p,
                                                  double pad_value_hu = -1000.0);

/// Rotation matrix for the params: Rz * Ry * Rx (x applied first).
Mat3 rotation_matrix(const AugmentParams& p);

} // namespace ceph3d
