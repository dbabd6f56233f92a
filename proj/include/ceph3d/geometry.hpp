#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace ceph3d {

/// Point or displacement in world millimetres (or fractional voxel units).
struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(Vec3 a, double s) { return {a.x * s, a.y * s, a.z * s}; }
    friend Vec3 operator*(double s, Vec3 a) { return a * s; }
    friend bool operator==(const Vec3& a, const Vec3& b) = default;

    double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

/// Integer voxel index or grid dimensions.
struct Vec3i {
    int x = 0;
    int y = 0;
    int z = 0;

    friend bool operator==(const Vec3i& a, const Vec3i& b) = default;

    std::int64_t count() const {
        return std::int64_t(x) * std::int64_t(y) * std::int64_t(z);
    }
};

/// Row-major 3x3 matrix, used for rigid rotations.
struct Mat3 {
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    Vec3 apply(Vec3 v) const {
        return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
                m[3] * v.x + m[4] * v.y + m[5] * v.z,
                m[6] * v.x + m[7] * v.y + m[8] * v.z};
    }

    Mat3 transposed() const {
        return Mat3{{m[0], m[3], m[6], m[1], m[4], m[7], m[2], m[5], m[8]}};
    }

    friend Mat3 operator*(const Mat3& a, const Mat3& b) {
        Mat3 r{};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double s = 0.0;
                for (int k = 0; k < 3; ++k) s += a.m[i * 3 + k] * b.m[k * 3 + j];
                r.m[i * 3 + j] = s;
            }
        return r;
    }

    static Mat3 rotation_x(double radians) {
        const double c = std::cos(radians), s = std::sin(radians);
        return Mat3{{1, 0, 0, 0, c, -s, 0, s, c}};
    }
    static Mat3 rotation_y(double radians) {
        const double c = std::cos(radians), s = std::sin(radians);
        return Mat3{{c, 0, s, 0, 1, 0, -s, 0, c}};
    }
    static Mat3 rotation_z(double radians) {
        const double c = std::cos(radians), s = std::sin(radians);
        return Mat3{{c, -s, 0, s, c, 0, 0, 0, 1}};
    }
};

inline double deg_to_rad(double deg) {
    return deg * 3.14159265358979323846 / 180.0;
}

} // namespace ceph3d
