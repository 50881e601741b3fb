#include "secmarl/algebra.h"

#include <cmath>

namespace secmarl {

std::vector<field_t> lagrange_coefficients(const PrimeField& f,
                                           const std::vector<field_t>& xs,
                                           field_t target) {
    if (xs.empty()) throw DuplicatePoint("empty point set");
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t j = i + 1; j < xs.size(); ++j)
            if (f.reduce(xs[i]) == f.reduce(xs[j])) throw DuplicatePoint("repeated x");

    std::vector<field_t> lambda(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        field_t num = 1 % f.p;
        field_t den = 1 % f.p;
        for (std::size_t j = 0; j < xs.size(); ++j) {
            if (j == i) continue;
            num = f.mul(num, f.sub(target, xs[j]));
            den = f.mul(den, f.sub(xs[i], xs[j]));
        }
        lambda[i] = f.mul(num, f.inv(den));
    }
    return lambda;
}

ring_t encode_fixed(double x, const FixedPointConfig& cfg) {
    if (!std::isfinite(x)) throw NonFinite("encode_fixed");
    if (std::abs(x) >= cfg.range()) throw RangeOverflow("encode_fixed magnitude");
    const double scaled = x * cfg.scale();
    // half away from zero
    const double rounded = scaled >= 0.0 ? std::floor(scaled + 0.5) : std::ceil(scaled - 0.5);
    return static_cast<ring_t>(static_cast<std::int64_t>(rounded));
}

double decode_fixed(ring_t r, const FixedPointConfig& cfg) {
    return static_cast<double>(static_cast<std::int64_t>(r)) / cfg.scale();
}

}  // namespace secmarl
