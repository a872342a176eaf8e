#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace crimesim {

/// SplitMix64 finalizer. Used to derive per-replication seeds from a master
/// seed: seed_i = splitmix64(master + i).
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t replication_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return splitmix64(master + index);
}

/// The single sequential random stream of a run.
///
/// Backed by std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Doubles are built from the top 53 bits, so the stream is
/// bit-identical across standard libraries (unlike std::uniform_*_distribution).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform index in [0, n). n must be > 0.
    std::size_t index(std::size_t n) {
        auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
        return i < n ? i : n - 1;
    }

    bool bernoulli(double p) { return uniform() < p; }

    std::uint64_t seed() const noexcept { return seed_; }

private:
    std::mt19937_64 engine_;
    std::uint64_t seed_;
};

}  // namespace crimesim
