#pragma once

#include <cstdint>
#include <vector>

#include "secmarl/errors.h"
#include "secmarl/rng.h"

namespace secmarl {

using ring_t = std::uint64_t;   // Z_{2^64}, wrapping
using field_t = std::uint64_t;  // canonical representative in [0, p)

// Prime field Z_p with a runtime modulus. Default is the Mersenne prime
// 2^61 - 1; tests exercise small primes as well.
struct PrimeField {
    std::uint64_t p;

    explicit PrimeField(std::uint64_t prime = kDefaultPrime) : p(prime) {}

    static constexpr std::uint64_t kDefaultPrime = (1ull << 61) - 1;

    field_t reduce(std::uint64_t x) const { return x % p; }

    field_t add(field_t a, field_t b) const {
        field_t s = a + b;  // p < 2^63 so no overflow
        return s >= p ? s - p : s;
    }
    field_t sub(field_t a, field_t b) const { return a >= b ? a - b : a + p - b; }
    field_t neg(field_t a) const { return a == 0 ? 0 : p - a; }

    field_t mul(field_t a, field_t b) const {
        return static_cast<field_t>((static_cast<unsigned __int128>(a) * b) % p);
    }

    field_t pow(field_t base, std::uint64_t exp) const {
        field_t acc = 1 % p;
        field_t cur = base % p;
        while (exp) {
            if (exp & 1) acc = mul(acc, cur);
            cur = mul(cur, cur);
            exp >>= 1;
        }
        return acc;
    }

    // multiplicative inverse; a must be nonzero
    field_t inv(field_t a) const {
        if (a % p == 0) throw ZeroInverse("field_inverse of zero");
        return pow(a, p - 2);
    }

    field_t random(Rng& rng) const {
        // rejection sampling for an unbiased draw
        const std::uint64_t limit = ~0ull - (~0ull % p);
        std::uint64_t x;
        do {
            x = rng.next_u64();
        } while (x >= limit);
        return x % p;
    }
};

// Lagrange interpolation coefficients: lambda_i such that
// sum_i lambda_i * q(xs[i]) = q(target) for any polynomial of degree < |xs|.
std::vector<field_t> lagrange_coefficients(const PrimeField& f,
                                           const std::vector<field_t>& xs,
                                           field_t target);

// Fixed-point encoding into the two's-complement ring Z_{2^64}.
struct FixedPointConfig {
    int frac_bits = 24;
    int int_bits = 20;

    double resolution() const { return std::pow(2.0, -frac_bits); }
    double scale() const { return std::pow(2.0, frac_bits); }
    double range() const { return std::pow(2.0, int_bits); }
};

// round(x * 2^f), half away from zero, embedded signed into Z_{2^64}
ring_t encode_fixed(double x, const FixedPointConfig& cfg);

// signed interpretation of r divided by 2^f
double decode_fixed(ring_t r, const FixedPointConfig& cfg);

}  // namespace secmarl
