#include "ceph3d/layers.hpp"

#include <algorithm>
#include <cmath>

namespace ceph3d {

namespace {

// Valid output range [lo, hi) along one axis for an input offset `off`
// under same-size zero padding.
inline void tap_range(int n, int off, int& lo, int& hi) {
    lo = std::max(0, -off);
    hi = std::min(n, n - off);
}

} // namespace

template <typename T>
Conv3d<T>::Conv3d(std::string name, int in_channels, int out_channels, Vec3i kernel)
    : W(name + ".W", {out_channels, in_channels, kernel.x, kernel.y, kernel.z}),
      b(name + ".b", {out_channels}),
      in_ch(in_channels), out_ch(out_channels),
      kx(kernel.x), ky(kernel.y), kz(kernel.z) {
    if (in_ch < 1 || out_ch < 1) throw InvalidArgument("conv channels must be >= 1");
    if (kx % 2 == 0 || ky % 2 == 0 || kz % 2 == 0)
        throw InvalidArgument("conv kernel dims must be odd");
}

template <typename T>
void Conv3d<T>::init_weights(Rng rng) {
    glorot_uniform(W.w, in_ch * kx * ky * kz, out_ch * kx * ky * kz, rng);
    std::fill(b.w.begin(), b.w.end(), T(0));
}

template <typename T>
Tensor4<T> Conv3d<T>::forward(const Tensor4<T>& x) const {
    if (x.channels() != in_ch) throw ShapeError("conv input channel mismatch");
    const Vec3i d = x.dims();
    const int px = (kx - 1) / 2, py = (ky - 1) / 2, pz = (kz - 1) / 2;
    Tensor4<T> out(out_ch, d);

    for (int oc = 0; oc < out_ch; ++oc) {
        T* oc_base = out.channel(oc);
        const T bias = b.w[std::size_t(oc)];
        for (std::size_t i = 0; i < out.spatial_size(); ++i) oc_base[i] = bias;

        for (int ic = 0; ic < in_ch; ++ic) {
            const T* ic_base = x.channel(ic);
            const T* wk = &W.w[std::size_t(((oc * in_ch) + ic)) * std::size_t(kx * ky * kz)];
            for (int dx = 0; dx < kx; ++dx)
                for (int dy = 0; dy < ky; ++dy)
                    for (int dz = 0; dz < kz; ++dz) {
                        const T w = wk[(dx * ky + dy) * kz + dz];
                        const int ox = dx - px, oy = dy - py, oz = dz - pz;
                        int xlo, xhi, ylo, yhi, zlo, zhi;
                        tap_range(d.x, ox, xlo, xhi);
                        tap_range(d.y, oy, ylo, yhi);
                        tap_range(d.z, oz, zlo, zhi);
                        for (int z = zlo; z < zhi; ++z)
                            for (int y = ylo; y < yhi; ++y) {
                                T* orow = oc_base + (std::size_t(z) * d.y + y) * d.x;
                                const T* irow =
                                    ic_base + (std::size_t(z + oz) * d.y + (y + oy)) * d.x + ox;
                                for (int xi = xlo; xi < xhi; ++xi)
                                    orow[xi] += w * irow[xi];
                            }
                    }
        }
    }
    return out;
}

template <typename T>
Tensor4<T> Conv3d<T>::backward(const Tensor4<T>& x, const Tensor4<T>& grad_out) {
    if (x.channels() != in_ch || grad_out.channels() != out_ch || x.dims() != grad_out.dims())
        throw ShapeError("conv backward shape mismatch");
    const Vec3i d = x.dims();
    const int px = (kx - 1) / 2, py = (ky - 1) / 2, pz = (kz - 1) / 2;
    Tensor4<T> gx(in_ch, d);
    auto& gW = W.grad();
    auto& gb = b.grad();

    for (int oc = 0; oc < out_ch; ++oc) {
        const T* go_base = grad_out.channel(oc);
        T gbias = 0;
        for (std::size_t i = 0; i < grad_out.spatial_size(); ++i) gbias += go_base[i];
        gb[std::size_t(oc)] += gbias;

        for (int ic = 0; ic < in_ch; ++ic) {
            const T* ic_base = x.channel(ic);
            T* gx_base = gx.channel(ic);
            const std::size_t wbase =
                std::size_t((oc * in_ch) + ic) * std::size_t(kx * ky * kz);
            for (int dx = 0; dx < kx; ++dx)
                for (int dy = 0; dy < ky; ++dy)
                    for (int dz = 0; dz < kz; ++dz) {
                        const std::size_t wi = wbase + std::size_t((dx * ky + dy) * kz + dz);
                        const T w = W.w[wi];
                        const int ox = dx - px, oy = dy - py, oz = dz - pz;
                        int xlo, xhi, ylo, yhi, zlo, zhi;
                        tap_range(d.x, ox, xlo, xhi);
                        tap_range(d.y, oy, ylo, yhi);
                        tap_range(d.z, oz, zlo, zhi);
                        T gw = 0;
                        for (int z = zlo; z < zhi; ++z)
                            for (int y = ylo; y < yhi; ++y) {
                                const T* gorow = go_base + (std::size_t(z) * d.y + y) * d.x;
                                const T* irow =
                                    ic_base + (std::size_t(z + oz) * d.y + (y + oy)) * d.x + ox;
                                T* gxrow =
                                    gx_base + (std::size_t(z + oz) * d.y + (y + oy)) * d.x + ox;
                                for (int xi = xlo; xi < xhi; ++xi) {
                                    gw += gorow[xi] * irow[xi];
                                    gxrow[xi] += w * gorow[xi];
                                }
                            }
                        gW[wi] += gw;
                    }
        }
    }
    return gx;
}

template <typename T>
Tensor4<T> maxout_forward(const Tensor4<T>& x, int k, std::vector<std::uint8_t>& winners) {
    if (k < 2) throw InvalidArgument("maxout requires k >= 2");
    if (x.channels() % k != 0)
        throw ShapeError("maxout input channels must be divisible by k");
    const int out_ch = x.channels() / k;
    Tensor4<T> out(out_ch, x.dims());
    winners.assign(out.size(), 0);

    const std::size_t n = x.spatial_size();
    for (int c = 0; c < out_ch; ++c) {
        T* orow = out.channel(c);
        std::uint8_t* wrow = winners.data() + std::size_t(c) * n;
        for (int p = 0; p < k; ++p) {
            const T* irow = x.channel(c * k + p);
            if (p == 0) {
                std::copy(irow, irow + n, orow);
            } else {
                for (std::size_t i = 0; i < n; ++i)
                    if (irow[i] > orow[i]) {
                        orow[i] = irow[i];
                        wrow[i] = std::uint8_t(p);
                    }
            }
        }
    }
    return out;
}

template <typename T>
Tensor4<T> maxout_backward(const Tensor4<T>& grad_out, int k,
                           const std::vector<std::uint8_t>& winners) {
    if (winners.size() != grad_out.size())
        throw StateError("maxout backward before forward");
    Tensor4<T> gx(grad_out.channels() * k, grad_out.dims());
    const std::size_t n = grad_out.spatial_size();
    for (int c = 0; c < grad_out.channels(); ++c) {
        const T* grow = grad_out.channel(c);
        const std::uint8_t* wrow = winners.data() + std::size_t(c) * n;
        for (std::size_t i = 0; i < n; ++i)
            gx.channel(c * k + wrow[i])[i] = grow[i];
    }
    return gx;
}

template <typename T>
Tensor4<T> maxpool2_forward(const Tensor4<T>& x, std::vector<std::int32_t>& argmax) {
    const Vec3i d = x.dims();
    if (d.x < 2 || d.y < 2 || d.z < 2)
        throw ShapeError("max-pool needs spatial dims >= 2");
    const Vec3i od{d.x / 2, d.y / 2, d.z / 2};
    Tensor4<T> out(x.channels(), od);
    argmax.assign(out.size(), 0);

    std::size_t o = 0;
    for (int c = 0; c < x.channels(); ++c)
        for (int z = 0; z < od.z; ++z)
            for (int y = 0; y < od.y; ++y)
                for (int xi = 0; xi < od.x; ++xi) {
                    T best{};
                    std::size_t best_idx = 0;
                    bool first = true;
                    for (int dz = 0; dz < 2; ++dz)
                        for (int dy = 0; dy < 2; ++dy)
                            for (int dx = 0; dx < 2; ++dx) {
                                const std::size_t ii =
                                    x.index(c, 2 * xi + dx, 2 * y + dy, 2 * z + dz);
                                const T v = x.data()[ii];
                                if (first || v > best) {
                                    best = v;
                                    best_idx = ii;
                                    first = false;
                                }
                            }
                    out.data()[o] = best;
                    argmax[o] = std::int32_t(best_idx);
                    ++o;
                }
    return out;
}

template <typename T>
Tensor4<T> maxpool2_backward(const Tensor4<T>& grad_out, const std::vector<std::int32_t>& argmax,
                             int in_channels, Vec3i in_dims) {
    if (argmax.size() != grad_out.size())
        throw StateError("max-pool backward before forward");
    Tensor4<T> gx(in_channels, in_dims);
    for (std::size_t i = 0; i < grad_out.size(); ++i)
        gx.data()[std::size_t(argmax[i])] += grad_out.data()[i];
    return gx;
}

template <typename T>
Dense<T>::Dense(std::string name, int in_size, int out_size)
    : W(name + ".W", {out_size, in_size}), b(name + ".b", {out_size}),
      in(in_size), out(out_size) {
    if (in < 1 || out < 1) throw InvalidArgument("dense sizes must be >= 1");
}

template <typename T>
void Dense<T>::init_weights(Rng rng) {
    glorot_uniform(W.w, in, out, rng);
    std::fill(b.w.begin(), b.w.end(), T(0));
}

template <typename T>
std::vector<T> Dense<T>::forward(const std::vector<T>& x) const {
    if (int(x.size()) != in) throw ShapeError("dense input length mismatch");
    std::vector<T> y(std::size_t(out));
    for (int o = 0; o < out; ++o) {
        const T* row = &W.w[std::size_t(o) * std::size_t(in)];
        T acc = b.w[std::size_t(o)];
        for (int i = 0; i < in; ++i) acc += row[i] * x[std::size_t(i)];
        y[std::size_t(o)] = acc;
    }
    return y;
}

template <typename T>
std::vector<T> Dense<T>::backward(const std::vector<T>& x, const std::vector<T>& grad_out) {
    if (int(x.size()) != in || int(grad_out.size()) != out)
        throw ShapeError("dense backward length mismatch");
    auto& gW = W.grad();
    auto& gb = b.grad();
    std::vector<T> gx(std::size_t(in), T(0));
    for (int o = 0; o < out; ++o) {
        const T g = grad_out[std::size_t(o)];
        gb[std::size_t(o)] += g;
        const T* row = &W.w[std::size_t(o) * std::size_t(in)];
        T* grow = &gW[std::size_t(o) * std::size_t(in)];
        for (int i = 0; i < in; ++i) {
            grow[i] += g * x[std::size_t(i)];
            gx[std::size_t(i)] += g * row[i];
        }
    }
    return gx;
}

template <typename T>
std::vector<T> maxout_vec_forward(const std::vector<T>& x, int k,
                                  std::vector<std::uint8_t>& winners) {
    if (k < 2) throw InvalidArgument("maxout requires k >= 2");
    if (x.size() % std::size_t(k) != 0)
        throw ShapeError("maxout input length must be divisible by k");
    const std::size_t n = x.size() / std::size_t(k);
    std::vector<T> out(n);
    winners.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        T best = x[i * k];
        std::uint8_t bp = 0;
        for (int p = 1; p < k; ++p)
            if (x[i * k + p] > best) {
                best = x[i * k + p];
                bp = std::uint8_t(p);
            }
        out[i] = best;
        winners[i] = bp;
    }
    return out;
}

template <typename T>
std::vector<T> maxout_vec_backward(const std::vector<T>& grad_out, int k,
                                   const std::vector<std::uint8_t>& winners) {
    if (winners.size() != grad_out.size())
        throw StateError("maxout backward before forward");
    std::vector<T> gx(grad_out.size() * std::size_t(k), T(0));
    for (std::size_t i = 0; i < grad_out.size(); ++i)
        gx[i * k + winners[i]] = grad_out[i];
    return gx;
}

template <typename T>
std::vector<T> softmax(const std::vector<T>& logits) {
    if (logits.empty()) throw InvalidArgument("softmax of an empty vector");
    const T m = *std::max_element(logits.begin(), logits.end());
    std::vector<T> p(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - m);
        sum += double(p[i]);
    }
    const T inv = T(1.0 / sum);
    for (T& v : p) v *= inv;
    return p;
}

template <typename T>
T cross_entropy(const std::vector<T>& p, const std::vector<T>& t) {
    if (p.size() != t.size()) throw ShapeError("cross-entropy length mismatch");
    double loss = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        loss -= double(t[i]) * std::log(std::max(double(p[i]), 1e-12));
    return T(loss);
}

template <typename T>
std::vector<T> softmax_cross_entropy_grad(const std::vector<T>& p, const std::vector<T>& t) {
    if (p.size() != t.size()) throw ShapeError("cross-entropy length mismatch");
    std::vector<T> g(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) g[i] = p[i] - t[i];
    return g;
}

template <typename T>
std::vector<T> dropout_forward(const std::vector<T>& x, double rate, bool training,
                               Rng& rng, std::vector<T>& mask) {
    if (rate < 0.0 || rate >= 1.0)
        throw InvalidArgument("dropout rate must be in [0, 1)");
    if (!training) {
        mask.clear();
        return x;
    }
    const T keep_scale = T(1.0 / (1.0 - rate));
    mask.assign(x.size(), T(0));
    std::vector<T> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const bool keep = rng.uniform() >= rate;
        mask[i] = keep ? keep_scale : T(0);
        out[i] = x[i] * mask[i];
    }
    return out;
}

template <typename T>
std::vector<T> dropout_backward(const std::vector<T>& grad_out, const std::vector<T>& mask) {
    if (mask.empty()) return grad_out; // inference path
    if (mask.size() != grad_out.size()) throw StateError("dropout backward before forward");
    std::vector<T> gx(grad_out.size());
    for (std::size_t i = 0; i < grad_out.size(); ++i) gx[i] = grad_out[i] * mask[i];
    return gx;
}

template <typename T>
void glorot_uniform(std::vector<T>& w, int fan_in, int fan_out, Rng& rng) {
    const double bound = std::sqrt(6.0 / double(fan_in + fan_out));
    for (T& v : w) v = T(rng.uniform(-bound, bound));
}

#define CEPH3D_INSTANTIATE(T)                                                                \
    template struct Conv3d<T>;                                                               \
    template struct Dense<T>;                                                                \
    template Tensor4<T> maxout_forward<T>(const Tensor4<T>&, int, std::vector<std::uint8_t>&); \
    template Tensor4<T> maxout_backward<T>(const Tensor4<T>&, int,                           \
                                           const std::vector<std::uint8_t>&);                \
    template Tensor4<T> maxpool2_forward<T>(const Tensor4<T>&, std::vector<std::int32_t>&);  \
    template Tensor4<T> maxpool2_backward<T>(const Tensor4<T>&,                              \
                                             const std::vector<std::int32_t>&, int, Vec3i);  \
    template std::vector<T> maxout_vec_forward<T>(const std::vector<T>&, int,                \
                                                  std::vector<std::uint8_t>&);               \
    template std::vector<T> maxout_vec_backward<T>(const std::vector<T>&, int,               \
                                                   const std::vector<std::uint8_t>&);        \
    template std::vector<T> softmax<T>(const std::vector<T>&);                               \
    template T cross_entropy<T>(const std::vector<T>&, const std::vector<T>&);               \
    template std::vector<T> softmax_cross_entropy_grad<T>(const std::vector<T>&,             \
                                                          const std::vector<T>&);            \
    template std::vector<T> dropout_forward<T>(const std::vector<T>&, double, bool, Rng&,    \
                                               std::vector<T>&);                             \
    template std::vector<T> dropout_backward<T>(const std::vector<T>&, const std::vector<T>&); \
    template void glorot_uniform<T>(std::vector<T>&, int, int, Rng&);

CEPH3D_INSTANTIATE(float)
CEPH3D_INSTANTIATE(double)

#undef CEPH3D_INSTANTIATE

} // namespace ceph3d
