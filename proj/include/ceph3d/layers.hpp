#pragma once

#include <cstdint>
#include <vector>

#include "ceph3d/rng.hpp"
#include "ceph3d/tensor.hpp"

namespace ceph3d {

/// 3D convolution parameters. Kernel layout (out_ch, in_ch, kx, ky, kz);
/// odd kernel dims, zero padding of (k-1)/2 per axis, same-size output,
/// cross-correlation semantics.
template <typename T>
struct Conv3d {
    ParamBlock<T> W; // [out_ch, in_ch, kx, ky, kz]
    ParamBlock<T> b; // [out_ch]
    int in_ch = 0, out_ch = 0;
    int kx = 0, ky = 0, kz = 0;

    Conv3d() = default;
    Conv3d(std::string name, int in_channels, int out_channels, Vec3i kernel);

    void init_weights(Rng rng);
    Tensor4<T> forward(const Tensor4<T>& x) const;
    /// Accumulates into W.grad/b.grad and returns the input gradient.
    Tensor4<T> backward(const Tensor4<T>& x, const Tensor4<T>& grad_out);
};

/// Maxout over groups of k adjacent channels: out[c] = max_p in[c*k + p].
/// Winner indices are cached for the backward routing.
template <typename T>
Tensor4<T> maxout_forward(const Tensor4<T>& x, int k, std::vector<std::uint8_t>& winners);

template <typename T>
Tensor4<T> maxout_backward(const Tensor4<T>& grad_out, int k,
                           const std::vector<std::uint8_t>& winners);

/// 2x2x2 max-pool, stride 2, floor mode (trailing odd slices dropped).
/// argmax holds the flat input index of each pooled maximum.
template <typename T>
Tensor4<T> maxpool2_forward(const Tensor4<T>& x, std::vector<std::int32_t>& argmax);

template <typename T>
Tensor4<T> maxpool2_backward(const Tensor4<T>& grad_out, const std::vector<std::int32_t>& argmax,
                             int in_channels, Vec3i in_dims);

/// Fully connected layer over flat vectors. W layout [out, in], row-major.
template <typename T>
struct Dense {
    ParamBlock<T> W;
    ParamBlock<T> b;
    int in = 0, out = 0;

    Dense() = default;
    Dense(std::string name, int in_size, int out_size);

    void init_weights(Rng rng);
    std::vector<T> forward(const std::vector<T>& x) const;
    std::vector<T> backward(const std::vector<T>& x, const std::vector<T>& grad_out);
};

/// Maxout over a flat vector, pieces k adjacent entries.
template <typename T>
std::vector<T> maxout_vec_forward(const std::vector<T>& x, int k,
                                  std::vector<std::uint8_t>& winners);

template <typename T>
std::vector<T> maxout_vec_backward(const std::vector<T>& grad_out, int k,
                                   const std::vector<std::uint8_t>& winners);

/// Numerically stabilized softmax (max subtraction, double-accumulated sum).
template <typename T>
std::vector<T> softmax(const std::vector<T>& logits);

/// -sum t_i ln(p_i) with p clamped at 1e-12.
template <typename T>
T cross_entropy(const std::vector<T>& p, const std::vector<T>& t);

/// Gradient of cross_entropy(softmax(logits), t) w.r.t. logits: p - t.
template <typename T>
std::vector<T> softmax_cross_entropy_grad(const std::vector<T>& p, const std::vector<T>& t);

/// Inverted dropout. Training: zero with probability `rate`, scale survivors
/// by 1/(1-rate), record the multiplier per element. Inference: identity.
template <typename T>
std::vector<T> dropout_forward(const std::vector<T>& x, double rate, bool training,
                               Rng& rng, std::vector<T>& mask);

template <typename T>
std::vector<T> dropout_backward(const std::vector<T>& grad_out, const std::vector<T>& mask);

/// Uniform init in +-sqrt(6 / (fan_in + fan_out)).
template <typename T>
void glorot_uniform(std::vector<T>& w, int fan_in, int fan_out, Rng& rng);

} // namespace ceph3d
