#pragma once

#include <map>
#include <string>

#include "secmarl/nn.h"

namespace secmarl {

// Counts pre-processing invocations per call site so the per-iteration
// accounting is testable.
struct PreprocessCounter {
    std::map<std::string, long> counts;

    void bump(const std::string& tag) { counts[tag] += 1; }
    long get(const std::string& tag) const {
        auto it = counts.find(tag);
        return it == counts.end() ? 0 : it->second;
    }
    long total() const {
        long t = 0;
        for (const auto& [_, v] : counts) t += v;
        return t;
    }
    void reset() { counts.clear(); }
};

// One player's zero-padded half of a gadget input: player 0's data occupies
// the left columns, player 1's the right, so the two halves sum to the
// logical row-wise concatenation. `present` is false on the party that does
// not hold this half.
struct PaddedInput {
    Mat local;
    int side = 0;
    int rows = 0;
    int cols = 0;  // padded width (2d)
    bool present = false;
};

PaddedInput preprocess(const Mat& half, int side, const std::string& tag,
                       PreprocessCounter* counter);

// counterparty placeholder carrying only the shape
PaddedInput absent_padded(int rows, int cols_total, int side);

// Realizes the logical concatenation as share addition of the padded halves.
SecMat combine_padded(SecureBackend& be, const PaddedInput& x0, const PaddedInput& x1);

// Secure forward pass; the output opens one-sided to the weight owner.
Mat f_secfloat(SecureBackend& be, const PaddedInput& x0, const PaddedInput& x1,
               const MlpParams& params, int owner);

// Forward keeping the trace secret (internal composition).
ForwardTrace f_secfloat_trace(SecureBackend& be, const PaddedInput& x0, const PaddedInput& x1,
                              const MlpParams& params, int owner);

// Backward gadget w.r.t. the weights. `seed`, when used, is the owner-held
// gradient w.r.t. the network output (the policy-gradient composition); null
// mat on the non-owner. Without a seed the mean seed 1/(B*z) applies.
GradSet b_secfloat_w(SecureBackend& be, const PaddedInput& x0, const PaddedInput& x1,
                     const MlpParams& params, int owner, const Mat* seed = nullptr);

// Backward gadget w.r.t. the padded input, opened to the owner.
Mat b_secfloat_x(SecureBackend& be, const PaddedInput& x0, const PaddedInput& x1,
                 const MlpParams& params, int owner);

// Loss-seeded backward: seed = d/d(out) of the mean-squared loss against the
// owner-held target.
GradSet bl_secfloat_w(SecureBackend& be, const PaddedInput& x0, const PaddedInput& x1,
                      const MlpParams& params, const Mat& target, int owner);

}  // namespace secmarl
