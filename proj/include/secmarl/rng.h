#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace secmarl {

// Deterministic splitmix64 stream. Every source of randomness in the project
// goes through one of these so that runs are reproducible bit-for-bit and the
// named streams (state init, action noise, minibatch, ...) can be consumed
// identically across execution modes.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in [lo, hi)
    double next_range(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    // uniform integer in [0, n)
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

    // standard normal via Box-Muller; stateless (two uniforms per draw) so the
    // draw count is a pure function of the call count
    double next_gauss() {
        double u1 = next_unit();
        double u2 = next_unit();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

  private:
    std::uint64_t state_;
};

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

// Independent named stream derived from a master seed.
inline Rng named_stream(std::uint64_t master, std::string_view name) {
    Rng mix(master ^ fnv1a(name));
    // burn one step so streams with nearby seeds decorrelate
    mix.next_u64();
    return mix;
}

}  // namespace secmarl
