#pragma once

#include "secmarl/backend.h"
#include "secmarl/dealer.h"

namespace secmarl {

// One party's halves of a multiplication triple. Consume-once: a second use
// throws TripleExhausted.
struct BeaverTriple {
    TripleKind kind = TripleKind::MatMul;
    ShareMatrix u, v, c;
    bool used = false;
};

// One party's Beaver multiplication step: masks the operands with the triple,
// opens (a-u) and (b-v) to the peer in a single frame each way, and combines
// locally. Returns this party's share of the product at scale 2^2f (caller
// rescales). Marks the triple used.
ShareMatrix beaver_mul_step(BeaverTriple& t, const ShareMatrix& a, const ShareMatrix& b,
                            Channel& peer);

// The runtime 2PC backend: additive sharing over Z_{2^64} with dealer-issued
// triples and dealer-evaluated nonlinear/rescale gates. Both parties execute
// identical call sequences in lockstep.
class AdditiveBackend final : public SecureBackend {
  public:
    AdditiveBackend(int party, Channel* peer, Channel* dealer, FixedPointConfig cfg,
                    std::uint64_t shared_mask_seed);

    int party() const override { return party_; }
    const FixedPointConfig& fixed_cfg() const override { return cfg_; }

    SecMat priv_input(const Mat& m, int owner, int rows, int cols) override;
    SecMat pub_input(const Mat& m) override;

    SecMat sec_add(const SecMat& a, const SecMat& b) override;
    SecMat sec_sub(const SecMat& a, const SecMat& b) override;
    SecMat sec_add_row(const SecMat& a, const SecMat& row) override;
    SecMat sec_matmul(const SecMat& a, const SecMat& b) override;
    SecMat sec_mul(const SecMat& a, const SecMat& b) override;
    SecMat sec_scale(const SecMat& a, double c) override;
    SecMat sec_relu(const SecMat& a) override;
    SecMat sec_relu_prime(const SecMat& a) override;
    SecMat sec_sigmoid(const SecMat& a, const std::vector<double>& lo,
                       const std::vector<double>& hi) override;
    SecMat sec_sigmoid_prime(const SecMat& a, const std::vector<double>& lo,
                             const std::vector<double>& hi) override;
    Mat sec_open(const SecMat& a, OpenTo recipient) override;

    void set_tag(const std::string& tag) override;

  private:
    BeaverTriple fetch_triple(TripleKind kind, int m, int k, int n);
    ShareMatrix nonlin(NonlinGate gate, const ShareMatrix& in, const std::vector<double>& lo,
                       const std::vector<double>& hi);
    ShareMatrix rescale(const ShareMatrix& wide);

    int party_;
    Channel* peer_;
    Channel* dealer_;
    FixedPointConfig cfg_;
    Rng mask_rng_;  // same stream on both parties; the dealer never sees its seed
};

}  // namespace secmarl
