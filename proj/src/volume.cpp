#include "ceph3d/volume.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace ceph3d {

namespace {

constexpr char kCvolMagic[8] = {'C', 'V', 'O', 'L', '0', '0', '0', '1'};

void require_positive_spacing(const Vec3& s) {
    if (!(s.x > 0.0 && s.y > 0.0 && s.z > 0.0))
        throw InvalidArgument("volume spacing must be positive on every axis");
}

template <typename T>
void write_le(std::ostream& os, T value) {
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    // Host is little-endian on all supported targets; keep the copy explicit
    // so the on-disk layout is pinned by this function alone.
    os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
    unsigned char buf[sizeof(T)];
    is.read(reinterpret_cast<char*>(buf), sizeof(T));
    T value;
    std::memcpy(&value, buf, sizeof(T));
    return value;
}

} // namespace

Volume::Volume(Vec3i dims, Vec3 spacing, Vec3 origin, std::vector<double> data,
               bool normalized)
    : dims_(dims), spacing_(spacing), origin_(origin), data_(std::move(data)),
      normalized_(normalized) {
    if (dims_.x < 1 || dims_.y < 1 || dims_.z < 1)
        throw InvalidArgument("volume dims must be >= 1 on every axis");
    require_positive_spacing(spacing_);
    if (std::int64_t(data_.size()) != dims_.count())
        throw ShapeError("volume data length does not match dims");
}

Volume Volume::filled(Vec3i dims, Vec3 spacing, Vec3 origin, double value,
                      bool normalized) {
    if (dims.x < 1 || dims.y < 1 || dims.z < 1)
        throw InvalidArgument("volume dims must be >= 1 on every axis");
    return Volume(dims, spacing, origin,
                  std::vector<double>(std::size_t(dims.count()), value), normalized);
}

double Volume::pad_value(double pad_hu) const {
    if (!normalized_) return pad_hu;
    return std::clamp((pad_hu - kHuLow) / (kHuHigh - kHuLow), 0.0, 1.0);
}

double Volume::sample_trilinear(Vec3 p, double fill) const {
    if (p.x < 0.0 || p.y < 0.0 || p.z < 0.0 || p.x > double(dims_.x - 1) ||
        p.y > double(dims_.y - 1) || p.z > double(dims_.z - 1))
        return fill;

    // Sampling exactly on the high face yields fx == 0 with a duplicated
    // corner, so integer coordinates reproduce stored values exactly.
    const int x0 = int(p.x), y0 = int(p.y), z0 = int(p.z);
    const double fx = p.x - x0, fy = p.y - y0, fz = p.z - z0;
    const int x1 = std::min(x0 + 1, dims_.x - 1);
    const int y1 = std::min(y0 + 1, dims_.y - 1);
    const int z1 = std::min(z0 + 1, dims_.z - 1);

    const double c000 = at(x0, y0, z0), c100 = at(x1, y0, z0);
    const double c010 = at(x0, y1, z0), c110 = at(x1, y1, z0);
    const double c001 = at(x0, y0, z1), c101 = at(x1, y0, z1);
    const double c011 = at(x0, y1, z1), c111 = at(x1, y1, z1);

    const double c00 = c000 + fx * (c100 - c000);
    const double c10 = c010 + fx * (c110 - c010);
    const double c01 = c001 + fx * (c101 - c001);
    const double c11 = c011 + fx * (c111 - c011);
    const double c0 = c00 + fy * (c10 - c00);
    const double c1 = c01 + fy * (c11 - c01);
    return c0 + fz * (c1 - c0);
}

Vec3i resampled_dims(Vec3i dims, Vec3 spacing, double target_spacing) {
    if (!(target_spacing > 0.0))
        throw InvalidArgument("target spacing must be positive");
    require_positive_spacing(spacing);
    auto one = [&](int n, double s) {
        return std::max(1, int(std::floor(double(n) * s / target_spacing)));
    };
    return {one(dims.x, spacing.x), one(dims.y, spacing.y), one(dims.z, spacing.z)};
}

Volume resample(const Volume& v, double target_spacing, double pad_value_hu) {
    if (v.normalized())
        throw StateError("resample expects a raw (unnormalized) volume");
    const Vec3i out_dims = resampled_dims(v.dims(), v.spacing(), target_spacing);
    std::vector<double> out(std::size_t(out_dims.count()));
    const double fill = v.pad_value(pad_value_hu);

    // New voxel centers in input index space: i * target / spacing per axis.
    const double rx = target_spacing / v.spacing().x;
    const double ry = target_spacing / v.spacing().y;
    const double rz = target_spacing / v.spacing().z;

    std::size_t o = 0;
    for (int z = 0; z < out_dims.z; ++z)
        for (int y = 0; y < out_dims.y; ++y)
            for (int x = 0; x < out_dims.x; ++x)
                out[o++] = v.sample_trilinear({x * rx, y * ry, z * rz}, fill);

    return Volume(out_dims,
                  {target_spacing, target_spacing, target_spacing},
                  v.origin(), std::move(out), false);
}

Volume pad_to(const Volume& v, const GridSpec& spec) {
    const Vec3i in = v.dims(), t = spec.target_dims;
    if (in.x > t.x || in.y > t.y || in.z > t.z)
        throw ShapeError("input dims exceed pad target; resample first");

    std::vector<double> out(std::size_t(t.count()), v.pad_value(spec.pad_value_hu));
    for (int z = 0; z < in.z; ++z)
        for (int y = 0; y < in.y; ++y) {
            const double* src = &v.data()[std::size_t(in.x) * (y + std::size_t(in.y) * z)];
            double* dst = &out[std::size_t(t.x) * (y + std::size_t(t.y) * z)];
            std::copy(src, src + in.x, dst);
        }
    return Volume(t, v.spacing(), v.origin(), std::move(out), v.normalized());
}

Volume normalize(const Volume& v) {
    if (v.normalized())
        throw StateError("volume is already normalized");
    std::vector<double> out(v.data().size());
    const double scale = 1.0 / (kHuHigh - kHuLow);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = std::clamp((v.data()[i] - kHuLow) * scale, 0.0, 1.0);
    return Volume(v.dims(), v.spacing(), v.origin(), std::move(out), true);
}

void save_cvol(const Volume& v, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path.string());

    os.write(kCvolMagic, sizeof(kCvolMagic));
    write_le<std::uint32_t>(os, std::uint32_t(v.dims().x));
    write_le<std::uint32_t>(os, std::uint32_t(v.dims().y));
    write_le<std::uint32_t>(os, std::uint32_t(v.dims().z));
    write_le<double>(os, v.spacing().x);
    write_le<double>(os, v.spacing().y);
    write_le<double>(os, v.spacing().z);
    write_le<double>(os, v.origin().x);
    write_le<double>(os, v.origin().y);
    write_le<double>(os, v.origin().z);
    write_le<std::uint8_t>(os, v.normalized() ? 1 : 0);

    if (v.normalized()) {
        for (double d : v.data()) write_le<float>(os, float(d));
    } else {
        for (double d : v.data()) {
            const double r = std::clamp(std::round(d), -32768.0, 32767.0);
            write_le<std::int16_t>(os, std::int16_t(r));
        }
    }
    if (!os) throw IoError("short write: " + path.string());
}

Volume load_cvol(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open for reading: " + path.string());

    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kCvolMagic, sizeof(magic)) != 0)
        throw IoError("not a CVOL file: " + path.string());

    Vec3i dims;
    dims.x = int(read_le<std::uint32_t>(is));
    dims.y = int(read_le<std::uint32_t>(is));
    dims.z = int(read_le<std::uint32_t>(is));
    Vec3 spacing, origin;
    spacing.x = read_le<double>(is);
    spacing.y = read_le<double>(is);
    spacing.z = read_le<double>(is);
    origin.x = read_le<double>(is);
    origin.y = read_le<double>(is);
    origin.z = read_le<double>(is);
    const std::uint8_t flag = read_le<std::uint8_t>(is);
    if (!is) throw IoError("truncated CVOL header: " + path.string());
    if (dims.x < 1 || dims.y < 1 || dims.z < 1 || dims.count() > (std::int64_t(1) << 31))
        throw IoError("implausible CVOL dims: " + path.string());

    std::vector<double> data(std::size_t(dims.count()));
    if (flag == 1) {
        for (double& d : data) d = double(read_le<float>(is));
    } else if (flag == 0) {
        for (double& d : data) d = double(read_le<std::int16_t>(is));
    } else {
        throw IoError("bad CVOL normalized flag: " + path.string());
    }
    if (!is) throw IoError("truncated CVOL data: " + path.string());
    return Volume(dims, spacing, origin, std::move(data), flag == 1);
}

} // namespace ceph3d
