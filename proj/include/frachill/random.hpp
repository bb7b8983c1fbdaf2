#pragma once

#include <cstdint>

#include "frachill/grid.hpp"

namespace frachill {

// splitmix64; fixed so random initial data agree across implementations.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // uniform on [0, 1) with 53 random bits
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

/// amp * (2u - 1) per grid point in row-major order.
inline Field random_field(const GridSpec& grid, std::uint64_t seed, double amp) {
    SplitMix64 rng(seed);
    Field f(grid);
    for (auto& v : f.values()) v = amp * (2.0 * rng.uniform() - 1.0);
    return f;
}

}  // namespace frachill
