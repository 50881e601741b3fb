#pragma once

#include <cstdint>
#include <vector>

#include "secmarl/algebra.h"

namespace secmarl::shamir {

// One party's point on the sharing polynomial. degree is the polynomial
// degree bound (t for fresh sharings, 2t mid-multiplication).
struct Share {
    int party_index = 0;  // in [1, n]
    field_t value = 0;
    int degree = 0;
};

// (t+1)-out-of-n sharing of `secret`: evaluations q(1..n) of a uniformly
// random polynomial of degree <= t with q(0) = secret.
std::vector<Share> share(const PrimeField& f, field_t secret, int t, int n, Rng& rng);

// Lagrange interpolation at 0 from any degree+1 shares with distinct indices.
field_t reconstruct(const PrimeField& f, const std::vector<Share>& shares);

// Addition gate: per-party local sums.
std::vector<Share> add_gate(const PrimeField& f, const std::vector<Share>& a,
                            const std::vector<Share>& b);

// Two sharings of one hidden random value r, at degree t and degree 2t,
// aggregated from per-party contributions. Consume-once: mul_gate marks it
// used and a second use throws ReusedRandomness.
struct DoubleSharing {
    std::vector<Share> deg_t;
    std::vector<Share> deg_2t;
    bool used = false;
};

DoubleSharing gen_double_sharing(const PrimeField& f, int t, int n, Rng& rng);

// Multiplication gate with degree reduction: local products give a degree-2t
// sharing c(x); d(x) = c(x) - R_2t(x) is opened at 0 and the output is
// c'(i) = R_t(i) + d(0), a degree-t sharing of the product.
std::vector<Share> mul_gate(const PrimeField& f, const std::vector<Share>& a,
                            const std::vector<Share>& b, DoubleSharing& ds);

struct Gate {
    enum class Op { Add, Mul };
    Op op;
    int lhs;  // wire index
    int rhs;
};

// Wires 0..num_inputs-1 are the inputs; wire num_inputs+g is gate g's output.
struct ArithCircuit {
    int num_inputs = 0;
    std::vector<Gate> gates;
    int output_wire = 0;
};

// Shares all inputs, evaluates the gate list, reconstructs the output wire.
field_t eval_circuit(const PrimeField& f, const ArithCircuit& c,
                     const std::vector<field_t>& inputs, int t, int n, Rng& rng);

}  // namespace secmarl::shamir
