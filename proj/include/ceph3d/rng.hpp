#pragma once

#include <cstdint>
#include <string_view>

namespace ceph3d {

/// Deterministic random stream (splitmix64). Every consumer derives its own
/// named substream from one root seed, so adding or reordering consumers
/// never perturbs unrelated draws.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed), root_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double uniform() {
        return double(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n) {
        return next_u64() % n;
    }

    /// Stable seed derivation: mixes the name into the given seed.
    static std::uint64_t derive(std::uint64_t seed, std::string_view name) {
        std::uint64_t h = 0xcbf29ce484222325ull; // FNV-1a
        for (unsigned char c : name) {
            h ^= c;
            h *= 0x100000001b3ull;
        }
        Rng mixer(seed ^ h);
        mixer.next_u64();
        return mixer.next_u64();
    }

    /// Independent child stream rooted at this stream's seed.
    Rng stream(std::string_view name) const {
        return Rng(derive(root_, name));
    }

    std::uint64_t root_seed() const { return root_; }

private:
    std::uint64_t state_;
    std::uint64_t root_;
};

} // namespace ceph3d
