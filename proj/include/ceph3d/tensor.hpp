#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "ceph3d/errors.hpp"
#include "ceph3d/geometry.hpp"

namespace ceph3d {

/// Channel-major 4D array, x-fastest within a channel:
/// flat index = x + nx*(y + ny*(z + nz*c)).
template <typename T>
class Tensor4 {
public:
    Tensor4() = default;
    Tensor4(int channels, Vec3i dims)
        : ch_(channels), dims_(dims),
          v_(std::size_t(channels) * std::size_t(dims.count()), T(0)) {
        if (channels < 1 || dims.x < 1 || dims.y < 1 || dims.z < 1)
            throw InvalidArgument("tensor shape components must be >= 1");
    }

    int channels() const { return ch_; }
    const Vec3i& dims() const { return dims_; }
    std::size_t spatial_size() const { return std::size_t(dims_.count()); }
    std::size_t size() const { return v_.size(); }

    std::size_t index(int c, int x, int y, int z) const {
        return std::size_t(x) +
               std::size_t(dims_.x) *
                   (std::size_t(y) +
                    std::size_t(dims_.y) * (std::size_t(z) + std::size_t(dims_.z) * std::size_t(c)));
    }

    T& operator()(int c, int x, int y, int z) { return v_[index(c, x, y, z)]; }
    T operator()(int c, int x, int y, int z) const { return v_[index(c, x, y, z)]; }

    T* data() { return v_.data(); }
    const T* data() const { return v_.data(); }
    std::vector<T>& values() { return v_; }
    const std::vector<T>& values() const { return v_; }

    T* channel(int c) { return v_.data() + std::size_t(c) * spatial_size(); }
    const T* channel(int c) const { return v_.data() + std::size_t(c) * spatial_size(); }

    bool same_shape(const Tensor4& o) const { return ch_ == o.ch_ && dims_ == o.dims_; }

private:
    int ch_ = 0;
    Vec3i dims_{0, 0, 0};
    std::vector<T> v_;
};

/// One named parameter array with paired gradient storage. The gradient is
/// allocated on first use so inference-only models stay lean.
template <typename T>
struct ParamBlock {
    std::string name;
    std::vector<int> shape;
    std::vector<T> w;
    std::vector<T> g;

    ParamBlock() = default;
    ParamBlock(std::string n, std::vector<int> s) : name(std::move(n)), shape(std::move(s)) {
        std::size_t total = 1;
        for (int d : shape) total *= std::size_t(d);
        w.assign(total, T(0));
    }

    std::size_t size() const { return w.size(); }

    std::vector<T>& grad() {
        if (g.size() != w.size()) g.assign(w.size(), T(0));
        return g;
    }

    void zero_grad() {
        if (!g.empty()) std::fill(g.begin(), g.end(), T(0));
    }
};

} // namespace ceph3d
