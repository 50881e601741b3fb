#pragma once

#include "secmarl/sharemat.h"
#include "secmarl/transport.h"

namespace secmarl {

// Gates evaluated by the dealer on reconstructed masked shares. TRUNC is the
// fixed-point rescale after a product (input at scale 2^2f, output at 2^f).
enum class NonlinGate : std::uint8_t {
    Relu = 0,
    ReluPrime = 1,
    Sigmoid = 2,
    SigmoidPrime = 3,
    Trunc = 4,
};

enum class TripleKind : std::uint8_t {
    MatMul = 0,      // U: m x k, V: k x n, C = U*V
    Elementwise = 1  // U, V, C all rows x cols, C = U o V
};

// Serves TRIPLE and NONLIN_REQ frames from the two party channels until both
// say BYE. Requests arrive in lockstep (both parties execute the same gadget
// script), so the loop reads party 0 then party 1 for every exchange.
void serve_dealer(Channel& ch0, Channel& ch1, const FixedPointConfig& cfg, Rng rng);

// request payload builders shared by backend and dealer
std::vector<std::uint8_t> triple_request_payload(TripleKind kind, int m, int k, int n);
std::vector<std::uint8_t> nonlin_request_payload(NonlinGate gate, const ShareMatrix& in,
                                                 const std::vector<double>& lo,
                                                 const std::vector<double>& hi);

}  // namespace secmarl
