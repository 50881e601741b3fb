#include "secmarl/additive.h"

namespace secmarl {

namespace {

std::vector<ring_t> ring_matmul(const std::vector<ring_t>& a, const std::vector<ring_t>& b,
                                int m, int k, int n) {
    std::vector<ring_t> c(static_cast<std::size_t>(m) * n, 0);
    for (int i = 0; i < m; ++i)
        for (int t = 0; t < k; ++t) {
            const ring_t av = a[static_cast<std::size_t>(i) * k + t];
            for (int j = 0; j < n; ++j)
                c[static_cast<std::size_t>(i) * n + j] +=
                    av * b[static_cast<std::size_t>(t) * n + j];
        }
    return c;
}

std::vector<std::uint8_t> words_payload(const std::vector<ring_t>& a,
                                        const std::vector<ring_t>& b) {
    std::vector<std::uint8_t> out;
    out.reserve((a.size() + b.size()) * 8);
    for (ring_t w : a) put_u64le(out, w);
    for (ring_t w : b) put_u64le(out, w);
    return out;
}

}  // namespace

ShareMatrix beaver_mul_step(BeaverTriple& t, const ShareMatrix& a, const ShareMatrix& b,
                            Channel& peer) {
    if (t.used) throw TripleExhausted("beaver triple reused");
    t.used = true;
    if (a.rows != t.u.rows || a.cols != t.u.cols || b.rows != t.v.rows || b.cols != t.v.cols)
        throw DimMismatch("triple does not fit operands");
    const bool elementwise = t.kind == TripleKind::Elementwise;
    if (elementwise) {
        if (a.rows != b.rows || a.cols != b.cols) throw DimMismatch("elementwise operands");
    } else if (a.cols != b.rows) {
        throw DimMismatch("matmul inner dims");
    }

    // local masks
    std::vector<ring_t> e_own(a.size()), f_own(b.size());
    for (std::size_t i = 0; i < e_own.size(); ++i) e_own[i] = a.v[i] - t.u.v[i];
    for (std::size_t i = 0; i < f_own.size(); ++i) f_own[i] = b.v[i] - t.v.v[i];

    // one open round: both masked operands in one frame per direction
    peer.send(MsgType::OpenVal, words_payload(e_own, f_own));
    const Frame fr = peer.expect(MsgType::OpenVal);
    if (fr.payload.size() != (e_own.size() + f_own.size()) * 8)
        throw DimHeaderMismatch("beaver open size");
    std::size_t pos = 0;
    std::vector<ring_t> e(e_own.size()), f(f_own.size());
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = e_own[i] + get_u64le(fr.payload, pos);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = f_own[i] + get_u64le(fr.payload, pos);
    peer.count_open_round(2);

    // z = [EF] + E*v + u*F + c, with EF contributed by party 0 only
    ShareMatrix z(elementwise ? a.rows : a.rows, elementwise ? a.cols : b.cols, a.party);
    if (elementwise) {
        for (std::size_t i = 0; i < z.v.size(); ++i) {
            ring_t acc = e[i] * t.v.v[i] + t.u.v[i] * f[i] + t.c.v[i];
            if (a.party == 0) acc += e[i] * f[i];
            z.v[i] = acc;
        }
    } else {
        const int m = a.rows, k = a.cols, n = b.cols;
        auto ev = ring_matmul(e, t.v.v, m, k, n);
        auto uf = ring_matmul(t.u.v, f, m, k, n);
        for (std::size_t i = 0; i < z.v.size(); ++i) z.v[i] = ev[i] + uf[i] + t.c.v[i];
        if (a.party == 0) {
            auto ef = ring_matmul(e, f, m, k, n);
            for (std::size_t i = 0; i < z.v.size(); ++i) z.v[i] += ef[i];
        }
    }
    return z;
}

AdditiveBackend::AdditiveBackend(int party, Channel* peer, Channel* dealer,
                                 FixedPointConfig cfg, std::uint64_t shared_mask_seed)
    : party_(party), peer_(peer), dealer_(dealer), cfg_(cfg), mask_rng_(shared_mask_seed) {
    if (party != 0 && party != 1) throw ValidationError("party must be 0 or 1");
}

void AdditiveBackend::set_tag(const std::string& tag) {
    if (peer_) peer_->set_tag(tag);
    if (dealer_) dealer_->set_tag(tag);
}

SecMat AdditiveBackend::priv_input(const Mat& m, int owner, int rows, int cols) {
    ShareMatrix s(rows, cols, party_);
    if (party_ == owner) {
        if (m.rows != rows || m.cols != cols) throw DimMismatch("priv_input dims");
        for (std::size_t i = 0; i < s.v.size(); ++i) s.v[i] = encode_fixed(m.a[i], cfg_);
    }
    return SecMat::of(std::move(s));
}

SecMat AdditiveBackend::pub_input(const Mat& m) { return priv_input(m, 0, m.rows, m.cols); }

SecMat AdditiveBackend::sec_add(const SecMat& a, const SecMat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimMismatch("sec_add");
    ShareMatrix out = a.shares;
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] += b.shares.v[i];
    return SecMat::of(std::move(out));
}

SecMat AdditiveBackend::sec_sub(const SecMat& a, const SecMat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimMismatch("sec_sub");
    ShareMatrix out = a.shares;
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] -= b.shares.v[i];
    return SecMat::of(std::move(out));
}

SecMat AdditiveBackend::sec_add_row(const SecMat& a, const SecMat& row) {
    if (row.rows() != 1 || row.cols() != a.cols()) throw DimMismatch("sec_add_row");
    ShareMatrix out = a.shares;
    for (int i = 0; i < out.rows; ++i)
        for (int j = 0; j < out.cols; ++j) out.at(i, j) += row.shares.at(0, j);
    return SecMat::of(std::move(out));
}

BeaverTriple AdditiveBackend::fetch_triple(TripleKind kind, int m, int k, int n) {
    if (!dealer_) throw DealerUnavailable("no dealer channel");
    dealer_->send(MsgType::Triple, triple_request_payload(kind, m, k, n));
    const Frame f = dealer_->expect(MsgType::Triple);
    BeaverTriple t;
    t.kind = kind;
    const int u_r = m, u_c = k;
    const int v_r = kind == TripleKind::MatMul ? k : m;
    const int v_c = kind == TripleKind::MatMul ? n : k;
    const int c_r = m;
    const int c_c = kind == TripleKind::MatMul ? n : k;
    t.u = ShareMatrix(u_r, u_c, party_);
    t.v = ShareMatrix(v_r, v_c, party_);
    t.c = ShareMatrix(c_r, c_c, party_);
    const std::size_t want = (t.u.size() + t.v.size() + t.c.size()) * 8;
    if (f.payload.size() != want) throw DimHeaderMismatch("triple response size");
    std::size_t pos = 0;
    for (auto& w : t.u.v) w = get_u64le(f.payload, pos);
    for (auto& w : t.v.v) w = get_u64le(f.payload, pos);
    for (auto& w : t.c.v) w = get_u64le(f.payload, pos);
    return t;
}

ShareMatrix AdditiveBackend::nonlin(NonlinGate gate, const ShareMatrix& in,
                                    const std::vector<double>& lo,
                                    const std::vector<double>& hi) {
    if (!dealer_) throw DealerUnavailable("no dealer channel");
    // canceling re-randomization: party 0 adds the shared mask stream, party 1
    // subtracts it, so the dealer cannot relate what it sees to what it dealt
    ShareMatrix masked = in;
    for (auto& w : masked.v) {
        const ring_t rho = mask_rng_.next_u64();
        w += party_ == 0 ? rho : ring_t{0} - rho;
    }
    dealer_->send(MsgType::NonlinReq, nonlin_request_payload(gate, masked, lo, hi));
    const Frame f = dealer_->expect(MsgType::NonlinResp);
    if (f.payload.size() != in.size() * 8) throw DimHeaderMismatch("nonlin response size");
    ShareMatrix out(in.rows, in.cols, party_);
    std::size_t pos = 0;
    for (auto& w : out.v) w = get_u64le(f.payload, pos);
    return out;
}

ShareMatrix AdditiveBackend::rescale(const ShareMatrix& wide) {
    return nonlin(NonlinGate::Trunc, wide, {}, {});
}

SecMat AdditiveBackend::sec_matmul(const SecMat& a, const SecMat& b) {
    if (a.cols() != b.rows()) throw DimMismatch("sec_matmul inner dims");
    BeaverTriple t = fetch_triple(TripleKind::MatMul, a.rows(), a.cols(), b.cols());
    ShareMatrix wide = beaver_mul_step(t, a.shares, b.shares, *peer_);
    return SecMat::of(rescale(wide));
}

SecMat AdditiveBackend::sec_mul(const SecMat& a, const SecMat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimMismatch("sec_mul");
    BeaverTriple t = fetch_triple(TripleKind::Elementwise, a.rows(), a.cols(), 0);
    ShareMatrix wide = beaver_mul_step(t, a.shares, b.shares, *peer_);
    return SecMat::of(rescale(wide));
}

SecMat AdditiveBackend::sec_scale(const SecMat& a, double c) {
    const ring_t enc = encode_fixed(c, cfg_);
    ShareMatrix wide = a.shares;
    for (auto& w : wide.v) w *= enc;
    return SecMat::of(rescale(wide));
}

SecMat AdditiveBackend::sec_relu(const SecMat& a) {
    return SecMat::of(nonlin(NonlinGate::Relu, a.shares, {}, {}));
}

SecMat AdditiveBackend::sec_relu_prime(const SecMat& a) {
    return SecMat::of(nonlin(NonlinGate::ReluPrime, a.shares, {}, {}));
}

SecMat AdditiveBackend::sec_sigmoid(const SecMat& a, const std::vector<double>& lo,
                                    const std::vector<double>& hi) {
    return SecMat::of(nonlin(NonlinGate::Sigmoid, a.shares, lo, hi));
}

SecMat AdditiveBackend::sec_sigmoid_prime(const SecMat& a, const std::vector<double>& lo,
                                          const std::vector<double>& hi) {
    return SecMat::of(nonlin(NonlinGate::SigmoidPrime, a.shares, lo, hi));
}

Mat AdditiveBackend::sec_open(const SecMat& a, OpenTo recipient) {
    const bool i_receive = recipient == OpenTo::Both ||
                           (recipient == OpenTo::Party0 && party_ == 0) ||
                           (recipient == OpenTo::Party1 && party_ == 1);
    const bool i_send = recipient == OpenTo::Both || !i_receive;

    std::vector<std::uint8_t> own;
    own.reserve(a.shares.size() * 8);
    for (ring_t w : a.shares.v) put_u64le(own, w);

    if (i_send) peer_->send(MsgType::OpenVal, std::move(own));
    if (!i_receive) return Mat();

    const Frame f = peer_->expect(MsgType::OpenVal);
    if (f.payload.size() != a.shares.size() * 8) throw DimHeaderMismatch("open size");
    peer_->count_open_round(1);
    Mat out(a.rows(), a.cols());
    std::size_t pos = 0;
    for (std::size_t i = 0; i < out.a.size(); ++i)
        out.a[i] = decode_fixed(a.shares.v[i] + get_u64le(f.payload, pos), cfg_);
    return out;
}

}  // namespace secmarl
