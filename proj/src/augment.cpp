#include "ceph3d/augment.hpp"

#include <cmath>

namespace ceph3d {

AugmentParams sample_params(Vec3i dims, const AugmentConfig& cfg, Rng& rng) {
    auto draw = [&](double bound) {
        return bound == 0.0 ? 0.0 : rng.uniform(-bound, bound);
    };
    AugmentParams p;
    p.translation = {draw(cfg.translate_frac * dims.x),
                     draw(cfg.translate_frac * dims.y),
                     draw(cfg.translate_frac * dims.z)};
    p.rotation_deg = {draw(cfg.rotate_deg), draw(cfg.rotate_deg), draw(cfg.rotate_deg)};
    return p;
}

Mat3 rotation_matrix(const AugmentParams& p) {
    return Mat3::rotation_z(deg_to_rad(p.rotation_deg.z)) *
           Mat3::rotation_y(deg_to_rad(p.rotation_deg.y)) *
           Mat3::rotation_x(deg_to_rad(p.rotation_deg.x));
}

std::optional<AugmentedSample> apply_augmentation(const Volume& v, const LandmarkSet& lm,
                                                  const AugmentParams& p,
                                                  double pad_value_hu) {
    if (lm.frame() != Frame::Voxel)
        throw StateError("augmentation expects voxel-frame landmarks");

    const Vec3i dims = v.dims();
    const Vec3 center{(dims.x - 1) / 2.0, (dims.y - 1) / 2.0, (dims.z - 1) / 2.0};
    const Mat3 rot = rotation_matrix(p);
    const Mat3 inv = rot.transposed();

    // Labels first: a rejected draw skips the volume resampling entirely.
    LandmarkSet moved(Frame::Voxel);
    for (const auto& [id, q] : lm.points()) {
        const Vec3 t = rot.apply(q - center) + center + p.translation;
        const Vec3i idx{int(std::lround(t.x)), int(std::lround(t.y)),
                        int(std::lround(t.z))};
        if (!v.contains_index(idx)) return std::nullopt;
        moved.set(id, {double(idx.x), double(idx.y), double(idx.z)});
    }

    const double fill = v.pad_value(pad_value_hu);
    std::vector<double> out(v.data().size());
    std::size_t o = 0;
    for (int z = 0; z < dims.z; ++z)
        for (int y = 0; y < dims.y; ++y)
            for (int x = 0; x < dims.x; ++x) {
                const Vec3 q{double(x), double(y), double(z)};
                const Vec3 src = inv.apply(q - center - p.translation) + center;
                out[o++] = v.sample_trilinear(src, fill);
            }

    return AugmentedSample{
        Volume(dims, v.spacing(), v.origin(), std::move(out), v.normalized()),
        std::move(moved)};
}

} // namespace ceph3d
