#pragma once

#include <map>
#include <string>
#include <vector>

#include "ceph3d/tensor.hpp"

namespace ceph3d {

/// Adadelta: per-parameter adaptive steps from exponentially decayed
/// accumulators of squared gradients and squared updates.
///   Eg2  <- rho*Eg2 + (1-rho)*g^2
///   dx    = -sqrt(Edx2 + eps) / sqrt(Eg2 + eps) * g
///   Edx2 <- rho*Edx2 + (1-rho)*dx^2
///   w    += dx
template <typename T>
class Adadelta {
public:
    explicit Adadelta(double rho = 0.95, double eps = 1e-6) : rho_(rho), eps_(eps) {
        if (!(rho >= 0.0 && rho < 1.0)) throw InvalidArgument("adadelta rho must be in [0,1)");
        if (!(eps > 0.0)) throw InvalidArgument("adadelta epsilon must be positive");
    }

    double rho() const { return rho_; }
    double epsilon() const { return eps_; }

    /// One update of a parameter block from its accumulated gradient.
    /// Throws DivergedError naming the block on a non-finite gradient.
    void step(ParamBlock<T>& p);

    struct State {
        std::vector<T> eg2;
        std::vector<T> edx2;
    };

    const std::map<std::string, State>& state() const { return state_; }
    std::map<std::string, State>& state() { return state_; }

private:
    double rho_;
    double eps_;
    std::map<std::string, State> state_;
};

} // namespace ceph3d
