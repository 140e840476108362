// rng.hpp
#pragma once

#include <cstdint>
#include <random>

namespace elimtas {

// SplitMix64 finaliser. Stable across platforms; used for seed derivation.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Per-trial random stream. Every public draw consumes exactly one 64-bit
// word from the engine, so equal states always produce equal draws.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform_open() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal by inversion of one open uniform.
    double standard_normal();

private:
    std::mt19937_64 engine_;
};

}  // namespace elimtas
