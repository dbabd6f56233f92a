#include "ceph3d/adadelta.hpp"

#include <cmath>

namespace ceph3d {

template <typename T>
void Adadelta<T>::step(ParamBlock<T>& p) {
    auto& g = p.grad();
    auto& st = state_[p.name];
    if (st.eg2.size() != p.size()) {
        st.eg2.assign(p.size(), T(0));
        st.edx2.assign(p.size(), T(0));
    }

    const T rho = T(rho_), one_minus = T(1.0 - rho_), eps = T(eps_);
    for (std::size_t i = 0; i < p.size(); ++i) {
        const T gi = g[i];
        if (!std::isfinite(double(gi)))
            throw DivergedError("non-finite gradient in parameter block " + p.name);
        st.eg2[i] = rho * st.eg2[i] + one_minus * gi * gi;
        const T dx = -std::sqrt(st.edx2[i] + eps) / std::sqrt(st.eg2[i] + eps) * gi;
        st.edx2[i] = rho * st.edx2[i] + one_minus * dx * dx;
        p.w[i] += dx;
    }
}

template class Adadelta<float>;
template class Adadelta<double>;

} // namespace ceph3d
