#pragma once

#include <cstdint>
#include <random>

namespace reflectrag {

// mt19937_64 with hand-rolled uniform sampling, so draws are bit-identical
// across platforms (std::uniform_int_distribution is not).
class DeterministicRng {
public:
    explicit DeterministicRng(std::uint64_t seed) : engine_(seed) {}
    DeterministicRng(std::uint64_t seed, std::uint64_t stream)
        : engine_(mix(seed, stream)) {}

    std::uint64_t next() { return engine_(); }

    // Unbiased draw from [0, n) by rejection.
    std::uint64_t uniform_below(std::uint64_t n) {
        if (n == 0) {
            return 0;
        }
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t value = engine_();
        while (value >= limit) {
            value = engine_();
        }
        return value % n;
    }

    // Draw in [0, 1).
    double uniform_double() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

private:
    // splitmix64 step to decorrelate (seed, stream) pairs.
    static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::mt19937_64 engine_;
};

}  // namespace reflectrag
