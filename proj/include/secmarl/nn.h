#pragma once

#include <string>

#include "secmarl/backend.h"

namespace secmarl {

enum class Act : std::uint8_t { Identity = 0, Relu = 1, Sigmoid = 2, BoundedSigmoid = 3 };

struct ActivationSpec {
    Act kind = Act::Identity;
    std::vector<double> lo, hi;  // per output column, BoundedSigmoid only

    static ActivationSpec identity() { return {}; }
    static ActivationSpec relu() { return {Act::Relu, {}, {}}; }
    static ActivationSpec sigmoid() { return {Act::Sigmoid, {}, {}}; }
    static ActivationSpec bounded_sigmoid(std::vector<double> lo, std::vector<double> hi) {
        return {Act::BoundedSigmoid, std::move(lo), std::move(hi)};
    }
};

// Weights and biases of the 3-layer fully connected network:
// W1: h x in, b1: 1 x h, W2: h x h, b2: 1 x h, W3: z x h, b3: 1 x z.
struct MlpParams {
    Mat w1, b1, w2, b2, w3, b3;
    ActivationSpec f1 = ActivationSpec::relu();
    ActivationSpec f2 = ActivationSpec::relu();
    ActivationSpec f3 = ActivationSpec::identity();

    int in_dim() const { return w1.cols; }
    int hidden_dim() const { return w1.rows; }
    int out_dim() const { return w3.rows; }

    static MlpParams create(int in, int hidden, int out, ActivationSpec f3, Rng& rng);
};

// Cached per-layer values from one forward pass. layer_in[i] is the input of
// layer i+1's affine map, layer_out[i] its pre-activation output, layer_act[i]
// the post-activation value; layer_act[2] is the network output.
struct ForwardTrace {
    SecMat layer_in[3];
    SecMat layer_out[3];
    SecMat layer_act[3];
    int batch = 0;
    int in_dim = 0;
    int out_dim = 0;

    const SecMat& output() const { return layer_act[2]; }
};

ForwardTrace forward(SecureBackend& be, const SecMat& x, const MlpParams& p, int owner);

// Gradients in the secret domain, produced by the backward system.
struct SecGrads {
    SecMat w1, b1, w2, b2, w3, b3;
    SecMat x;  // only when requested
    bool has_x = false;
};

// Plain gradients after the one-sided opening.
struct GradSet {
    Mat w1, b1, w2, b2, w3, b3;
    Mat x;
    bool has_x = false;
};

// Full chain-rule system over the trace. `seed` is the gradient of the scalar
// objective w.r.t. the network output (defaults to the all-ones mean seed
// 1/(B*z)); it is pulled back through f3 internally.
SecGrads backward(SecureBackend& be, const ForwardTrace& trace, const MlpParams& p,
                  const SecMat* seed, int owner, bool want_dx);

// column sums of M as a 1 x n row
Mat get_bias_der(const Mat& m);

// (2/B) * (output - target) for the mean-squared loss
Mat mse_loss_grad(const Mat& output, const Mat& target);
SecMat mse_loss_grad(SecureBackend& be, const SecMat& output, const SecMat& target);

GradSet open_grads(SecureBackend& be, const SecGrads& g, OpenTo recipient);

struct AdamState {
    Mat m_w1, v_w1, m_b1, v_b1, m_w2, v_w2, m_b2, v_b2, m_w3, v_w3, m_b3, v_b3;
    long step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    static AdamState for_params(const MlpParams& p);
};

// One Adam update. `ascend` flips the sign of the applied step (gradient
// ascent for the actor, descent for the critic).
void adam_step(MlpParams& p, const GradSet& g, AdamState& st, double lr, bool ascend);

// checkpoint format: "MLP1" magic, u32le in/hidden/out dims, one byte per
// activation kind, optional f3 bounds, then the six matrices row-major f64 le
void save_mlp(const std::string& path, const MlpParams& p);
MlpParams load_mlp(const std::string& path);

}  // namespace secmarl
