#include "secmarl/nn.h"

#include <cmath>
#include <cstring>
#include <fstream>

namespace secmarl {

namespace {

SecMat apply_act(SecureBackend& be, const ActivationSpec& f, const SecMat& z) {
    switch (f.kind) {
        case Act::Identity:
            return z;
        case Act::Relu:
            return be.sec_relu(z);
        case Act::Sigmoid:
            return be.sec_sigmoid(z, {}, {});
        case Act::BoundedSigmoid:
            return be.sec_sigmoid(z, f.lo, f.hi);
    }
    throw BadType("activation");
}

// d(act)/d(pre-activation), evaluated at the cached pre-activation
SecMat apply_act_prime(SecureBackend& be, const ActivationSpec& f, const SecMat& z) {
    switch (f.kind) {
        case Act::Identity:
            return be.pub_input(Mat::full(z.rows(), z.cols(), 1.0));
        case Act::Relu:
            return be.sec_relu_prime(z);
        case Act::Sigmoid:
            return be.sec_sigmoid_prime(z, {}, {});
        case Act::BoundedSigmoid:
            return be.sec_sigmoid_prime(z, f.lo, f.hi);
    }
    throw BadType("activation");
}

// seed pulled back through the layer activation: seed o f'(z), with the
// identity case short-circuited so it costs nothing
SecMat pull_back(SecureBackend& be, const ActivationSpec& f, const SecMat& seed,
                 const SecMat& z) {
    if (f.kind == Act::Identity) return seed;
    return be.sec_mul(seed, apply_act_prime(be, f, z));
}

}  // namespace

MlpParams MlpParams::create(int in, int hidden, int out, ActivationSpec f3, Rng& rng) {
    MlpParams p;
    const double s1 = 1.0 / std::sqrt(static_cast<double>(in));
    const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden));
    p.w1 = Mat::random_uniform(hidden, in, -s1, s1, rng);
    p.b1 = Mat::random_uniform(1, hidden, -s1, s1, rng);
    p.w2 = Mat::random_uniform(hidden, hidden, -s2, s2, rng);
    p.b2 = Mat::random_uniform(1, hidden, -s2, s2, rng);
    p.w3 = Mat::random_uniform(out, hidden, -s2, s2, rng);
    p.b3 = Mat::random_uniform(1, out, -s2, s2, rng);
    p.f3 = std::move(f3);
    return p;
}

ForwardTrace forward(SecureBackend& be, const SecMat& x, const MlpParams& p, int owner) {
    if (x.cols() != p.in_dim()) throw DimMismatch("forward input width");
    if (!x.is_share && !x.mat.all_finite()) throw NonFinite("forward input");
    const int h = p.hidden_dim();
    const int z = p.out_dim();

    ForwardTrace tr;
    tr.batch = x.rows();
    tr.in_dim = p.in_dim();
    tr.out_dim = z;

    const SecMat w1t = be.priv_input(transpose(p.w1), owner, p.in_dim(), h);
    const SecMat w2t = be.priv_input(transpose(p.w2), owner, h, h);
    const SecMat w3t = be.priv_input(transpose(p.w3), owner, h, z);
    const SecMat b1 = be.priv_input(p.b1, owner, 1, h);
    const SecMat b2 = be.priv_input(p.b2, owner, 1, h);
    const SecMat b3 = be.priv_input(p.b3, owner, 1, z);

    tr.layer_in[0] = x;
    tr.layer_out[0] = be.sec_add_row(be.sec_matmul(tr.layer_in[0], w1t), b1);
    tr.layer_act[0] = apply_act(be, p.f1, tr.layer_out[0]);

    tr.layer_in[1] = tr.layer_act[0];
    tr.layer_out[1] = be.sec_add_row(be.sec_matmul(tr.layer_in[1], w2t), b2);
    tr.layer_act[1] = apply_act(be, p.f2, tr.layer_out[1]);

    tr.layer_in[2] = tr.layer_act[1];
    tr.layer_out[2] = be.sec_add_row(be.sec_matmul(tr.layer_in[2], w3t), b3);
    tr.layer_act[2] = apply_act(be, p.f3, tr.layer_out[2]);
    return tr;
}

SecGrads backward(SecureBackend& be, const ForwardTrace& trace, const MlpParams& p,
                  const SecMat* seed, int owner, bool want_dx) {
    const int batch = trace.batch;
    const int z = p.out_dim();
    if (trace.in_dim != p.in_dim() || trace.out_dim != z) throw TraceMismatch("backward");

    SecMat seed_out;
    if (seed) {
        if (seed->rows() != batch || seed->cols() != z) throw TraceMismatch("seed shape");
        seed_out = *seed;
    } else {
        seed_out = be.pub_input(
            Mat::full(batch, z, 1.0 / (static_cast<double>(batch) * z)));
    }

    const SecMat w1 = be.priv_input(p.w1, owner, p.hidden_dim(), p.in_dim());
    const SecMat w2 = be.priv_input(p.w2, owner, p.hidden_dim(), p.hidden_dim());
    const SecMat w3 = be.priv_input(p.w3, owner, z, p.hidden_dim());

    SecGrads g;
    const SecMat layer3_der = pull_back(be, p.f3, seed_out, trace.layer_out[2]);
    g.w3 = be.sec_matmul(sec_transpose(layer3_der), trace.layer_in[2]);
    g.b3 = sec_col_sum(layer3_der);

    const SecMat layer2_act_der = be.sec_matmul(layer3_der, w3);
    const SecMat layer2_der = pull_back(be, p.f2, layer2_act_der, trace.layer_out[1]);
    g.w2 = be.sec_matmul(sec_transpose(layer2_der), trace.layer_in[1]);
    g.b2 = sec_col_sum(layer2_der);

    const SecMat layer1_act_der = be.sec_matmul(layer2_der, w2);
    const SecMat layer1_der = pull_back(be, p.f1, layer1_act_der, trace.layer_out[0]);
    g.w1 = be.sec_matmul(sec_transpose(layer1_der), trace.layer_in[0]);
    g.b1 = sec_col_sum(layer1_der);

    if (want_dx) {
        g.x = be.sec_matmul(layer1_der, w1);
        g.has_x = true;
    }
    return g;
}

Mat get_bias_der(const Mat& m) { return col_sum(m); }

Mat mse_loss_grad(const Mat& output, const Mat& target) {
    if (!output.same_shape(target)) throw DimMismatch("mse_loss_grad");
    return (output - target) * (2.0 / output.rows);
}

SecMat mse_loss_grad(SecureBackend& be, const SecMat& output, const SecMat& target) {
    if (output.rows() != target.rows() || output.cols() != target.cols())
        throw DimMismatch("mse_loss_grad");
    return be.sec_scale(be.sec_sub(output, target), 2.0 / output.rows());
}

GradSet open_grads(SecureBackend& be, const SecGrads& g, OpenTo recipient) {
    GradSet out;
    out.w1 = be.sec_open(g.w1, recipient);
    out.b1 = be.sec_open(g.b1, recipient);
    out.w2 = be.sec_open(g.w2, recipient);
    out.b2 = be.sec_open(g.b2, recipient);
    out.w3 = be.sec_open(g.w3, recipient);
    out.b3 = be.sec_open(g.b3, recipient);
    if (g.has_x) {
        out.x = be.sec_open(g.x, recipient);
        out.has_x = true;
    }
    return out;
}

AdamState AdamState::for_params(const MlpParams& p) {
    AdamState st;
    auto zero_like = [](const Mat& m) { return Mat::zeros(m.rows, m.cols); };
    st.m_w1 = zero_like(p.w1);
    st.v_w1 = zero_like(p.w1);
    st.m_b1 = zero_like(p.b1);
    st.v_b1 = zero_like(p.b1);
    st.m_w2 = zero_like(p.w2);
    st.v_w2 = zero_like(p.w2);
    st.m_b2 = zero_like(p.b2);
    st.v_b2 = zero_like(p.b2);
    st.m_w3 = zero_like(p.w3);
    st.v_w3 = zero_like(p.w3);
    st.m_b3 = zero_like(p.b3);
    st.v_b3 = zero_like(p.b3);
    return st;
}

namespace {

void adam_one(Mat& param, const Mat& grad, Mat& m, Mat& v, const AdamState& st, double lr,
              bool ascend) {
    if (!param.same_shape(grad)) throw ShapeMismatch("adam grad shape");
    const double bc1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step));
    const double bc2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step));
    for (std::size_t i = 0; i < param.a.size(); ++i) {
        m.a[i] = st.beta1 * m.a[i] + (1.0 - st.beta1) * grad.a[i];
        v.a[i] = st.beta2 * v.a[i] + (1.0 - st.beta2) * grad.a[i] * grad.a[i];
        const double mhat = m.a[i] / bc1;
        const double vhat = v.a[i] / bc2;
        const double step = lr * mhat / (std::sqrt(vhat) + st.eps);
        param.a[i] += ascend ? step : -step;
    }
}

}  // namespace

void adam_step(MlpParams& p, const GradSet& g, AdamState& st, double lr, bool ascend) {
    st.step += 1;
    adam_one(p.w1, g.w1, st.m_w1, st.v_w1, st, lr, ascend);
    adam_one(p.b1, g.b1, st.m_b1, st.v_b1, st, lr, ascend);
    adam_one(p.w2, g.w2, st.m_w2, st.v_w2, st, lr, ascend);
    adam_one(p.b2, g.b2, st.m_b2, st.v_b2, st, lr, ascend);
    adam_one(p.w3, g.w3, st.m_w3, st.v_w3, st, lr, ascend);
    adam_one(p.b3, g.b3, st.m_b3, st.v_b3, st, lr, ascend);
}

namespace {

void write_mat(std::ofstream& out, const Mat& m) {
    for (double d : m.a) {
        std::uint64_t w;
        std::memcpy(&w, &d, 8);
        std::uint8_t buf[8];
        for (int i = 0; i < 8; ++i) buf[i] = static_cast<std::uint8_t>(w >> (8 * i));
        out.write(reinterpret_cast<const char*>(buf), 8);
    }
}

Mat read_mat(std::ifstream& in, int rows, int cols) {
    Mat m(rows, cols);
    for (auto& d : m.a) {
        std::uint8_t buf[8];
        in.read(reinterpret_cast<char*>(buf), 8);
        std::uint64_t w = 0;
        for (int i = 0; i < 8; ++i) w |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
        std::memcpy(&d, &w, 8);
    }
    return m;
}

void write_u32(std::ofstream& out, std::uint32_t v) {
    std::uint8_t buf[4];
    for (int i = 0; i < 4; ++i) buf[i] = static_cast<std::uint8_t>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(buf), 4);
}

std::uint32_t read_u32(std::ifstream& in) {
    std::uint8_t buf[4];
    in.read(reinterpret_cast<char*>(buf), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[i]) << (8 * i);
    return v;
}

}  // namespace

void save_mlp(const std::string& path, const MlpParams& p) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    out.write("MLP1", 4);
    write_u32(out, static_cast<std::uint32_t>(p.in_dim()));
    write_u32(out, static_cast<std::uint32_t>(p.hidden_dim()));
    write_u32(out, static_cast<std::uint32_t>(p.out_dim()));
    const std::uint8_t kinds[3] = {static_cast<std::uint8_t>(p.f1.kind),
                                   static_cast<std::uint8_t>(p.f2.kind),
                                   static_cast<std::uint8_t>(p.f3.kind)};
    out.write(reinterpret_cast<const char*>(kinds), 3);
    if (p.f3.kind == Act::BoundedSigmoid) {
        Mat lo(1, p.out_dim()), hi(1, p.out_dim());
        lo.a.assign(p.f3.lo.begin(), p.f3.lo.end());
        hi.a.assign(p.f3.hi.begin(), p.f3.hi.end());
        write_mat(out, lo);
        write_mat(out, hi);
    }
    write_mat(out, p.w1);
    write_mat(out, p.b1);
    write_mat(out, p.w2);
    write_mat(out, p.b2);
    write_mat(out, p.w3);
    write_mat(out, p.b3);
}

MlpParams load_mlp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read " + path);
    char magic[4];
    in.read(magic, 4);
    if (std::memcmp(magic, "MLP1", 4) != 0) throw ParseError("bad checkpoint magic");
    const int ind = static_cast<int>(read_u32(in));
    const int hid = static_cast<int>(read_u32(in));
    const int out = static_cast<int>(read_u32(in));
    std::uint8_t kinds[3];
    in.read(reinterpret_cast<char*>(kinds), 3);
    MlpParams p;
    p.f1.kind = static_cast<Act>(kinds[0]);
    p.f2.kind = static_cast<Act>(kinds[1]);
    p.f3.kind = static_cast<Act>(kinds[2]);
    if (p.f3.kind == Act::BoundedSigmoid) {
        Mat lo = read_mat(in, 1, out);
        Mat hi = read_mat(in, 1, out);
        p.f3.lo = lo.a;
        p.f3.hi = hi.a;
    }
    p.w1 = read_mat(in, hid, ind);
    p.b1 = read_mat(in, 1, hid);
    p.w2 = read_mat(in, hid, hid);
    p.b2 = read_mat(in, 1, hid);
    p.w3 = read_mat(in, out, hid);
    p.b3 = read_mat(in, 1, out);
    if (!in) throw ParseError("truncated checkpoint " + path);
    return p;
}

}  // namespace secmarl
