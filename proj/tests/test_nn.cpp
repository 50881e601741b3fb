#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <functional>

#include "secmarl/nn.h"

using namespace secmarl;

namespace {

ClearBackend& clear() {
    static ClearBackend be;
    return be;
}

Mat fwd(const MlpParams& p, const Mat& x) {
    return clear().sec_open(forward(clear(), SecMat::of(x), p, 0).output(), OpenTo::Both);
}

// objective behind the default backward seed: the mean over output entries
double mean_output(const MlpParams& p, const Mat& x) {
    const Mat out = fwd(p, x);
    double acc = 0;
    for (double v : out.a) acc += v;
    return acc / static_cast<double>(out.a.size());
}

double rel_err(double g, double fd) {
    const double denom = std::max({std::abs(g), std::abs(fd), 1e-3});
    return std::abs(g - fd) / denom;
}

// central differences of `objective` w.r.t. every entry of p.*member
Mat fd_grad(MlpParams p, Mat MlpParams::*member,
            const std::function<double(const MlpParams&)>& objective, double h = 1e-5) {
    Mat& param = p.*member;
    Mat g(param.rows, param.cols);
    for (std::size_t i = 0; i < param.a.size(); ++i) {
        const double keep = param.a[i];
        param.a[i] = keep + h;
        const double up = objective(p);
        param.a[i] = keep - h;
        const double dn = objective(p);
        param.a[i] = keep;
        g.a[i] = (up - dn) / (2 * h);
    }
    return g;
}

// random net with all ReLU pre-activations clear of the kink for the probe
// input, so finite differences are trustworthy
struct Probe {
    MlpParams params;
    Mat x;
};

Probe safe_random_net(Rng& rng, int in, int hidden, int out, ActivationSpec f3, int batch) {
    for (int attempt = 0; attempt < 200; ++attempt) {
        MlpParams p = MlpParams::create(in, hidden, out, f3, rng);
        const Mat x = Mat::random_uniform(batch, in, -1.0, 1.0, rng);
        const ForwardTrace tr = forward(clear(), SecMat::of(x), p, 0);
        double closest = 1e9;
        for (int layer = 0; layer < 2; ++layer)
            for (double v : tr.layer_out[layer].mat.a) closest = std::min(closest, std::abs(v));
        if (closest > 1e-3) return {std::move(p), x};
    }
    throw std::runtime_error("no kink-free net found");
}

GradSet clear_backward(const MlpParams& p, const Mat& x, const Mat* seed, bool want_dx) {
    const ForwardTrace tr = forward(clear(), SecMat::of(x), p, 0);
    SecGrads g;
    if (seed) {
        const SecMat s = SecMat::of(*seed);
        g = backward(clear(), tr, p, &s, 0, want_dx);
    } else {
        g = backward(clear(), tr, p, nullptr, 0, want_dx);
    }
    return open_grads(clear(), g, OpenTo::Both);
}

}  // namespace

TEST_CASE("forward degenerate identity-weight relu layer") {
    MlpParams p;
    p.w1 = Mat::zeros(2, 2);
    p.w1.at(0, 0) = 1.0;
    p.w1.at(1, 1) = 1.0;
    p.b1 = Mat::zeros(1, 2);
    p.w2 = p.w1;
    p.b2 = p.b1;
    p.w3 = p.w1;
    p.b3 = p.b1;
    Mat x(1, 2);
    x.at(0, 0) = -1.0;
    x.at(0, 1) = 2.0;
    const ForwardTrace tr = forward(clear(), SecMat::of(x), p, 0);
    CHECK(tr.layer_act[0].mat.at(0, 0) == 0.0);
    CHECK(tr.layer_act[0].mat.at(0, 1) == 2.0);
}

TEST_CASE("forward of the zero network is zero") {
    MlpParams p;
    p.w1 = Mat::zeros(3, 2);
    p.b1 = Mat::zeros(1, 3);
    p.w2 = Mat::zeros(3, 3);
    p.b2 = Mat::zeros(1, 3);
    p.w3 = Mat::zeros(1, 3);
    p.b3 = Mat::zeros(1, 1);
    const Mat out = fwd(p, Mat::full(2, 2, 5.0));
    for (double v : out.a) CHECK(v == 0.0);
}

TEST_CASE("forward against an independent straightforward evaluation") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        MlpParams p = MlpParams::create(4, 4, 1, ActivationSpec::identity(), rng);
        const Mat x = Mat::random_uniform(3, 4, -2.0, 2.0, rng);
        const Mat out = fwd(p, x);
        // direct loop evaluation, written independently of the Mat helpers
        for (int b = 0; b < 3; ++b) {
            std::vector<double> h1(4), h2(4);
            for (int i = 0; i < 4; ++i) {
                double acc = p.b1.at(0, i);
                for (int j = 0; j < 4; ++j) acc += x.at(b, j) * p.w1.at(i, j);
                h1[static_cast<std::size_t>(i)] = acc > 0 ? acc : 0;
            }
            for (int i = 0; i < 4; ++i) {
                double acc = p.b2.at(0, i);
                for (int j = 0; j < 4; ++j)
                    acc += h1[static_cast<std::size_t>(j)] * p.w2.at(i, j);
                h2[static_cast<std::size_t>(i)] = acc > 0 ? acc : 0;
            }
            double y = p.b3.at(0, 0);
            for (int j = 0; j < 4; ++j) y += h2[static_cast<std::size_t>(j)] * p.w3.at(0, j);
            CHECK(std::abs(out.at(b, 0) - y) <= 1e-12);
        }
    }
}

TEST_CASE("forward rejects shape and value errors") {
    Rng rng(8);
    MlpParams p = MlpParams::create(4, 4, 1, ActivationSpec::identity(), rng);
    CHECK_THROWS_AS(forward(clear(), SecMat::of(Mat::zeros(2, 3)), p, 0), DimMismatch);
    Mat bad = Mat::zeros(1, 4);
    bad.at(0, 0) = std::nan("");
    CHECK_THROWS_AS(forward(clear(), SecMat::of(bad), p, 0), NonFinite);
}

TEST_CASE("get_bias_der pinned examples") {
    Mat m(2, 2);
    m.at(0, 0) = 1;
    m.at(0, 1) = 2;
    m.at(1, 0) = 3;
    m.at(1, 1) = 4;
    const Mat r = get_bias_der(m);
    CHECK(r.at(0, 0) == 4);
    CHECK(r.at(0, 1) == 6);

    const Mat z = get_bias_der(Mat::zeros(3, 2));
    CHECK(z.at(0, 0) == 0);
    CHECK(z.at(0, 1) == 0);

    Mat single(1, 3);
    single.at(0, 0) = 7;
    single.at(0, 1) = 8;
    single.at(0, 2) = 9;
    const Mat s = get_bias_der(single);
    CHECK(s.a == single.a);
}

TEST_CASE("get_bias_der equals ones-vector product") {
    Rng rng(9);
    const Mat m = Mat::random_uniform(5, 4, -3.0, 3.0, rng);
    const Mat ones = Mat::full(1, 5, 1.0);
    const Mat want = matmul(ones, m);
    const Mat got = get_bias_der(m);
    for (std::size_t i = 0; i < want.a.size(); ++i)
        CHECK(got.a[i] == doctest::Approx(want.a[i]).epsilon(1e-12));
}

TEST_CASE("default seed gives layer3Der = 1/(B*z)") {
    Rng rng(10);
    auto [p, x] = safe_random_net(rng, 2, 3, 1, ActivationSpec::identity(), 4);
    const GradSet g = clear_backward(p, x, nullptr, false);
    // with f3 = identity, grad b3 = column sums of the seed = B * 1/(B*z) = 1
    CHECK(g.b3.at(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("backward weight gradients match central finite differences") {
    Rng rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const int in = 2 + static_cast<int>(rng.next_below(3));
        const int hidden = 2 + static_cast<int>(rng.next_below(5));
        const int out = 1 + static_cast<int>(rng.next_below(2));
        const int batch = 1 + static_cast<int>(rng.next_below(4));
        auto [p, x] = safe_random_net(rng, in, hidden, out, ActivationSpec::identity(), batch);
        const GradSet g = clear_backward(p, x, nullptr, true);

        auto obj = [&x](const MlpParams& q) { return mean_output(q, x); };
        const std::pair<const Mat*, Mat MlpParams::*> params[] = {
            {&g.w1, &MlpParams::w1}, {&g.b1, &MlpParams::b1}, {&g.w2, &MlpParams::w2},
            {&g.b2, &MlpParams::b2}, {&g.w3, &MlpParams::w3}, {&g.b3, &MlpParams::b3},
        };
        for (const auto& [grad, member] : params) {
            const Mat fd = fd_grad(p, member, obj);
            for (std::size_t i = 0; i < grad->a.size(); ++i)
                CHECK(rel_err(grad->a[i], fd.a[i]) < 1e-4);
        }

        // input gradient by perturbing x
        Mat fdx(x.rows, x.cols);
        for (std::size_t i = 0; i < x.a.size(); ++i) {
            Mat xp = x, xm = x;
            xp.a[i] += 1e-5;
            xm.a[i] -= 1e-5;
            fdx.a[i] = (mean_output(p, xp) - mean_output(p, xm)) / 2e-5;
        }
        REQUIRE(g.has_x);
        for (std::size_t i = 0; i < fdx.a.size(); ++i)
            CHECK(rel_err(g.x.a[i], fdx.a[i]) < 1e-4);
    }
}

TEST_CASE("backward through a bounded sigmoid head") {
    Rng rng(12);
    const std::vector<double> lo = {0.0, 1.0};
    const std::vector<double> hi = {4.0, 3.0};
    auto [p, x] = safe_random_net(rng, 3, 4, 2, ActivationSpec::bounded_sigmoid(lo, hi), 3);
    const GradSet g = clear_backward(p, x, nullptr, false);
    auto obj = [&x](const MlpParams& q) { return mean_output(q, x); };
    const Mat fd = fd_grad(p, &MlpParams::w1, obj);
    for (std::size_t i = 0; i < fd.a.size(); ++i) CHECK(rel_err(g.w1.a[i], fd.a[i]) < 1e-4);
}

TEST_CASE("backward with a linear single path reproduces seed * W1") {
    // identity activations and h=z=in: backward wrt input is seed * W1
    Rng rng(13);
    MlpParams p = MlpParams::create(3, 3, 3, ActivationSpec::identity(), rng);
    p.f1 = ActivationSpec::identity();
    p.f2 = ActivationSpec::identity();
    // make W2, W3 identity so layer1Der = seed
    p.w2 = Mat::zeros(3, 3);
    p.w3 = Mat::zeros(3, 3);
    for (int i = 0; i < 3; ++i) {
        p.w2.at(i, i) = 1.0;
        p.w3.at(i, i) = 1.0;
    }
    const Mat x = Mat::random_uniform(2, 3, -1.0, 1.0, rng);
    Mat seed = Mat::random_uniform(2, 3, -1.0, 1.0, rng);
    const GradSet g = clear_backward(p, x, &seed, true);
    const Mat want = matmul(seed, p.w1);
    for (std::size_t i = 0; i < want.a.size(); ++i)
        CHECK(g.x.a[i] == doctest::Approx(want.a[i]).epsilon(1e-12));

    // zero seed kills everything
    Mat zseed = Mat::zeros(2, 3);
    const GradSet gz = clear_backward(p, x, &zseed, true);
    for (double v : gz.x.a) CHECK(v == 0.0);
    for (double v : gz.w1.a) CHECK(v == 0.0);
}

TEST_CASE("backward trace and seed shape errors") {
    Rng rng(14);
    auto [p, x] = safe_random_net(rng, 2, 3, 1, ActivationSpec::identity(), 2);
    const ForwardTrace tr = forward(clear(), SecMat::of(x), p, 0);
    MlpParams other = MlpParams::create(4, 3, 1, ActivationSpec::identity(), rng);
    CHECK_THROWS_AS(backward(clear(), tr, other, nullptr, 0, false), TraceMismatch);
    const SecMat bad_seed = SecMat::of(Mat::zeros(5, 5));
    CHECK_THROWS_AS(backward(clear(), tr, p, &bad_seed, 0, false), TraceMismatch);
}

TEST_CASE("mse_loss_grad pinned and finite-difference checked") {
    Mat out(1, 1), target(1, 1);
    out.at(0, 0) = 3.0;
    target.at(0, 0) = 1.0;
    CHECK(mse_loss_grad(out, target).at(0, 0) == 4.0);  // 2*(3-1)

    const Mat same = Mat::full(2, 2, 1.5);
    for (double v : mse_loss_grad(same, same).a) CHECK(v == 0.0);

    // L(o) = (1/B) sum (o - t)^2
    Rng rng(15);
    const Mat o = Mat::random_uniform(3, 2, -2.0, 2.0, rng);
    const Mat t = Mat::random_uniform(3, 2, -2.0, 2.0, rng);
    const Mat g = mse_loss_grad(o, t);
    auto loss = [&](const Mat& m) {
        double acc = 0;
        for (std::size_t i = 0; i < m.a.size(); ++i) acc += (m.a[i] - t.a[i]) * (m.a[i] - t.a[i]);
        return acc / m.rows;
    };
    for (std::size_t i = 0; i < o.a.size(); ++i) {
        Mat op = o, om = o;
        op.a[i] += 1e-6;
        om.a[i] -= 1e-6;
        const double fd = (loss(op) - loss(om)) / 2e-6;
        CHECK(rel_err(g.a[i], fd) < 1e-6);
    }
}

TEST_CASE("adam pinned behaviors") {
    Rng rng(16);
    MlpParams p = MlpParams::create(2, 2, 1, ActivationSpec::identity(), rng);
    AdamState st = AdamState::for_params(p);
    const MlpParams before = p;

    GradSet zero;
    zero.w1 = Mat::zeros(2, 2);
    zero.b1 = Mat::zeros(1, 2);
    zero.w2 = Mat::zeros(2, 2);
    zero.b2 = Mat::zeros(1, 2);
    zero.w3 = Mat::zeros(1, 2);
    zero.b3 = Mat::zeros(1, 1);
    adam_step(p, zero, st, 0.1, false);
    CHECK(p.w1.a == before.w1.a);  // zero gradient moves nothing
    CHECK(p.b3.a == before.b3.a);

    // scalar first step moves by ~lr
    MlpParams q = before;
    q.w3.at(0, 0) = 0.0;
    AdamState st2 = AdamState::for_params(q);
    GradSet g = zero;
    g.w3.at(0, 0) = 1.0;
    adam_step(q, g, st2, 0.1, false);
    CHECK(q.w3.at(0, 0) == doctest::Approx(-0.1).epsilon(1e-6));

    // ascend negates descend exactly
    MlpParams qa = before, qd = before;
    AdamState sa = AdamState::for_params(qa), sd = AdamState::for_params(qd);
    GradSet g2 = zero;
    g2.w1 = Mat::random_uniform(2, 2, -1.0, 1.0, rng);
    adam_step(qa, g2, sa, 0.05, true);
    adam_step(qd, g2, sd, 0.05, false);
    for (std::size_t i = 0; i < qa.w1.a.size(); ++i)
        CHECK(qa.w1.a[i] - before.w1.a[i] == doctest::Approx(-(qd.w1.a[i] - before.w1.a[i]))
                                                 .epsilon(1e-15));
}

TEST_CASE("adam shape mismatch") {
    Rng rng(17);
    MlpParams p = MlpParams::create(2, 2, 1, ActivationSpec::identity(), rng);
    AdamState st = AdamState::for_params(p);
    GradSet g;
    g.w1 = Mat::zeros(3, 3);
    CHECK_THROWS_AS(adam_step(p, g, st, 0.1, false), ShapeMismatch);
}

TEST_CASE("backward grads always close over the parameter shapes") {
    Rng rng(19);
    for (int trial = 0; trial < 25; ++trial) {
        const int in = 1 + static_cast<int>(rng.next_below(6));
        const int hidden = 1 + static_cast<int>(rng.next_below(6));
        const int out = 1 + static_cast<int>(rng.next_below(3));
        const int batch = 1 + static_cast<int>(rng.next_below(4));
        MlpParams p = MlpParams::create(in, hidden, out, ActivationSpec::identity(), rng);
        const Mat x = Mat::random_uniform(batch, in, -1.0, 1.0, rng);
        const GradSet g = clear_backward(p, x, nullptr, true);
        CHECK(g.w1.same_shape(p.w1));
        CHECK(g.b1.same_shape(p.b1));
        CHECK(g.w2.same_shape(p.w2));
        CHECK(g.b2.same_shape(p.b2));
        CHECK(g.w3.same_shape(p.w3));
        CHECK(g.b3.same_shape(p.b3));
        CHECK(g.x.same_shape(x));
    }
}

TEST_CASE("checkpoint roundtrip is bit exact") {
    Rng rng(18);
    const std::vector<double> lo = {0.0, 0.0};
    const std::vector<double> hi = {20.0, 10.0};
    MlpParams p = MlpParams::create(10, 16, 2, ActivationSpec::bounded_sigmoid(lo, hi), rng);
    const std::string path = "/tmp/secmarl_test_ckpt.bin";
    save_mlp(path, p);
    const MlpParams q = load_mlp(path);
    CHECK(q.w1.a == p.w1.a);
    CHECK(q.b1.a == p.b1.a);
    CHECK(q.w2.a == p.w2.a);
    CHECK(q.b2.a == p.b2.a);
    CHECK(q.w3.a == p.w3.a);
    CHECK(q.b3.a == p.b3.a);
    CHECK(q.f3.kind == Act::BoundedSigmoid);
    CHECK(q.f3.lo == p.f3.lo);
    CHECK(q.f3.hi == p.f3.hi);
    std::remove(path.c_str());
}
