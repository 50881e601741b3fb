#include "secmarl/shamir.h"

#include <algorithm>

namespace secmarl::shamir {

namespace {

// Horner evaluation of coeffs[0] + coeffs[1] x + ... at x.
field_t eval_poly(const PrimeField& f, const std::vector<field_t>& coeffs, field_t x) {
    field_t acc = 0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it)
        acc = f.add(f.mul(acc, x), *it);
    return acc;
}

std::vector<Share> share_with_degree(const PrimeField& f, field_t secret, int degree,
                                     int n, Rng& rng) {
    std::vector<field_t> coeffs(static_cast<std::size_t>(degree) + 1);
    coeffs[0] = f.reduce(secret);
    for (int i = 1; i <= degree; ++i) coeffs[static_cast<std::size_t>(i)] = f.random(rng);
    std::vector<Share> out(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i) {
        out[static_cast<std::size_t>(i - 1)] = Share{
            i, eval_poly(f, coeffs, f.reduce(static_cast<field_t>(i))), degree};
    }
    return out;
}

}  // namespace

std::vector<Share> share(const PrimeField& f, field_t secret, int t, int n, Rng& rng) {
    if (t < 0 || t >= n) throw BadThreshold("share requires 0 <= t < n");
    if (static_cast<std::uint64_t>(n) >= f.p) throw BadThreshold("n must be < p");
    return share_with_degree(f, secret, t, n, rng);
}

field_t reconstruct(const PrimeField& f, const std::vector<Share>& shares) {
    if (shares.empty()) throw InsufficientShares("no shares");
    const int degree = shares.front().degree;
    for (const auto& s : shares)
        if (s.degree != degree) throw MixedDegree("reconstruct");
    if (static_cast<int>(shares.size()) < degree + 1)
        throw InsufficientShares("need degree+1 shares");

    std::vector<field_t> xs;
    xs.reserve(shares.size());
    for (const auto& s : shares) {
        const field_t x = f.reduce(static_cast<field_t>(s.party_index));
        if (std::find(xs.begin(), xs.end(), x) != xs.end())
            throw InsufficientShares("duplicate party index");
        xs.push_back(x);
    }
    const auto lambda = lagrange_coefficients(f, xs, 0);
    field_t acc = 0;
    for (std::size_t i = 0; i < shares.size(); ++i)
        acc = f.add(acc, f.mul(lambda[i], shares[i].value));
    return acc;
}

std::vector<Share> add_gate(const PrimeField& f, const std::vector<Share>& a,
                            const std::vector<Share>& b) {
    if (a.size() != b.size()) throw IndexMismatch("share count");
    std::vector<Share> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].party_index != b[i].party_index || a[i].degree != b[i].degree)
            throw IndexMismatch("party index or degree");
        out[i] = Share{a[i].party_index, f.add(a[i].value, b[i].value), a[i].degree};
    }
    return out;
}

DoubleSharing gen_double_sharing(const PrimeField& f, int t, int n, Rng& rng) {
    if (2 * t >= n && !(t == 0 && n == 1)) throw BadThreshold("need 2t < n");
    DoubleSharing ds;
    ds.deg_t.resize(static_cast<std::size_t>(n));
    ds.deg_2t.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        ds.deg_t[static_cast<std::size_t>(i)] = Share{i + 1, 0, t};
        ds.deg_2t[static_cast<std::size_t>(i)] = Share{i + 1, 0, 2 * t};
    }
    // every party contributes a random r_j shared at both degrees; r = sum r_j
    for (int j = 0; j < n; ++j) {
        const field_t rj = f.random(rng);
        const auto part_t = share_with_degree(f, rj, t, n, rng);
        const auto part_2t = share_with_degree(f, rj, 2 * t, n, rng);
        for (int i = 0; i < n; ++i) {
            auto k = static_cast<std::size_t>(i);
            ds.deg_t[k].value = f.add(ds.deg_t[k].value, part_t[k].value);
            ds.deg_2t[k].value = f.add(ds.deg_2t[k].value, part_2t[k].value);
        }
    }
    return ds;
}

std::vector<Share> mul_gate(const PrimeField& f, const std::vector<Share>& a,
                            const std::vector<Share>& b, DoubleSharing& ds) {
    if (a.size() != b.size() || a.empty()) throw IndexMismatch("share count");
    const int n = static_cast<int>(a.size());
    const int t = a.front().degree;
    if (2 * t >= n && !(t == 0 && n == 1)) throw InsufficientParties("need 2t < n");
    if (ds.used) throw ReusedRandomness("double sharing consumed");
    if (static_cast<int>(ds.deg_t.size()) != n) throw IndexMismatch("double sharing size");
    ds.used = true;

    // local products: degree-2t sharing of the product
    std::vector<Share> d(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        auto k = static_cast<std::size_t>(i);
        if (a[k].party_index != b[k].party_index || a[k].degree != t || b[k].degree != t)
            throw IndexMismatch("mul_gate inputs");
        const field_t prod = f.mul(a[k].value, b[k].value);
        d[k] = Share{a[k].party_index, f.sub(prod, ds.deg_2t[k].value), 2 * t};
    }
    const field_t d0 = reconstruct(f, d);

    std::vector<Share> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        auto k = static_cast<std::size_t>(i);
        out[k] = Share{a[k].party_index, f.add(ds.deg_t[k].value, d0), t};
    }
    return out;
}

field_t eval_circuit(const PrimeField& f, const ArithCircuit& c,
                     const std::vector<field_t>& inputs, int t, int n, Rng& rng) {
    if (static_cast<int>(inputs.size()) != c.num_inputs)
        throw IndexMismatch("circuit input count");
    std::vector<std::vector<Share>> wires;
    wires.reserve(inputs.size() + c.gates.size());
    for (field_t x : inputs) wires.push_back(share(f, x, t, n, rng));
    for (const auto& g : c.gates) {
        const auto& lhs = wires.at(static_cast<std::size_t>(g.lhs));
        const auto& rhs = wires.at(static_cast<std::size_t>(g.rhs));
        if (g.op == Gate::Op::Add) {
            wires.push_back(add_gate(f, lhs, rhs));
        } else {
            auto ds = gen_double_sharing(f, t, n, rng);
            wires.push_back(mul_gate(f, lhs, rhs, ds));
        }
    }
    return reconstruct(f, wires.at(static_cast<std::size_t>(c.output_wire)));
}

}  // namespace secmarl::shamir
