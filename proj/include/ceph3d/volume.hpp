#pragma once

#include <filesystem>
#include <vector>

#include "ceph3d/errors.hpp"
#include "ceph3d/geometry.hpp"

namespace ceph3d {

/// Hounsfield range used for intensity normalization: air floor and the
/// upper bone cutoff. Values outside are clamped before scaling.
inline constexpr double kHuLow = -1000.0;
inline constexpr double kHuHigh = 400.0;

/// Target grid for the network input: isotropic spacing, fixed dims,
/// air-valued padding.
struct GridSpec {
    double target_spacing = 2.0;          // mm per voxel, all axes
    Vec3i target_dims{128, 128, 152};
    double pad_value_hu = -1000.0;
};

/// 3D scalar grid with spacing/origin metadata. Data is stored x-fastest:
/// flat index = x + nx*(y + ny*z). Raw volumes carry Hounsfield units;
/// normalized volumes carry [0,1] intensities and set the normalized flag.
/// Immutable after construction; all operations return new volumes.
class Volume {
public:
    Volume(Vec3i dims, Vec3 spacing, Vec3 origin, std::vector<double> data,
           bool normalized = false);

    /// Constant-filled volume.
    static Volume filled(Vec3i dims, Vec3 spacing, Vec3 origin, double value,
                         bool normalized = false);

    const Vec3i& dims() const { return dims_; }
    const Vec3& spacing() const { return spacing_; }
    const Vec3& origin() const { return origin_; }
    bool normalized() const { return normalized_; }
    const std::vector<double>& data() const { return data_; }

    double at(int x, int y, int z) const {
        return data_[std::size_t(x) + std::size_t(dims_.x) * (std::size_t(y) + std::size_t(dims_.y) * std::size_t(z))];
    }

    /// Trilinear interpolation at a fractional voxel coordinate. Samples
    /// outside the hull of voxel centers [0, n-1] return `fill`.
    double sample_trilinear(Vec3 voxel_coord, double fill) const;

    /// World position of a (possibly fractional) voxel index.
    Vec3 voxel_to_world(Vec3 idx) const {
        return {origin_.x + idx.x * spacing_.x,
                origin_.y + idx.y * spacing_.y,
                origin_.z + idx.z * spacing_.z};
    }

    /// Exact inverse of voxel_to_world.
    Vec3 world_to_voxel(Vec3 world) const {
        return {(world.x - origin_.x) / spacing_.x,
                (world.y - origin_.y) / spacing_.y,
                (world.z - origin_.z) / spacing_.z};
    }

    bool contains_index(Vec3i idx) const {
        return idx.x >= 0 && idx.x < dims_.x && idx.y >= 0 && idx.y < dims_.y &&
               idx.z >= 0 && idx.z < dims_.z;
    }

    /// Fill value for out-of-domain samples, in this volume's intensity scale.
    double pad_value(double pad_hu) const;

private:
    Vec3i dims_;
    Vec3 spacing_;
    Vec3 origin_;
    std::vector<double> data_;
    bool normalized_;
};

/// Output dims of resampling: floor(n * spacing / target) per axis, min 1.
Vec3i resampled_dims(Vec3i dims, Vec3 spacing, double target_spacing);

/// Resample to an isotropic grid by trilinear interpolation at the new voxel
/// centers. Origin is preserved; out-of-domain samples take pad_value_hu.
Volume resample(const Volume& v, double target_spacing, double pad_value_hu = -1000.0);

/// Grow to spec.target_dims, anchoring the input at the low corner so voxel
/// indices are unchanged. Appended voxels hold the pad value.
Volume pad_to(const Volume& v, const GridSpec& spec);

/// Map HU to [0,1]: clamp to [-1000, 400], then scale affinely.
Volume normalize(const Volume& v);

/// CVOL container (little-endian): magic "CVOL0001", u32 dims, f64 spacing,
/// f64 origin, u8 normalized flag, then i16 HU (flag=0) or f32 (flag=1),
/// x-fastest. Raw HU values are rounded to the nearest integer on write.
void save_cvol(const Volume& v, const std::filesystem::path& path);
Volume load_cvol(const std::filesystem::path& path);

} // namespace ceph3d
