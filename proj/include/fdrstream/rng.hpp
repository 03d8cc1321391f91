// Seedable, bit-reproducible random source. Standard-library distributions
// are implementation-defined, so uniforms and normals are derived explicitly.
#pragma once

#include <cstdint>
#include <random>

#include "fdrstream/normal.hpp"

namespace fdrstream {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Per-replicate seeds derived by counter so replicates are independent but
// reproducible from one base seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t counter) {
    return splitmix64(base ^ splitmix64(counter + 1));
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Uniform on the open interval (0,1): 53-bit mantissa, offset by half an ulp.
    double uniform() {
        return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double prob) { return uniform() < prob; }

    // Inverse-CDF sampling keeps the stream identical across platforms.
    double normal() { return normal_quantile(uniform()); }

    std::uint64_t raw() { return gen_(); }

  private:
    std::mt19937_64 gen_;
};

}  // namespace fdrstream
