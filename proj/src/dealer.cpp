#include "secmarl/dealer.h"

#include <cmath>
#include <cstring>

#include "secmarl/backend.h"

namespace secmarl {

std::vector<std::uint8_t> triple_request_payload(TripleKind kind, int m, int k, int n) {
    std::vector<std::uint8_t> out;
    out.push_back(static_cast<std::uint8_t>(kind));
    put_u32be(out, static_cast<std::uint32_t>(m));
    put_u32be(out, static_cast<std::uint32_t>(k));
    put_u32be(out, static_cast<std::uint32_t>(n));
    return out;
}

std::vector<std::uint8_t> nonlin_request_payload(NonlinGate gate, const ShareMatrix& in,
                                                 const std::vector<double>& lo,
                                                 const std::vector<double>& hi) {
    std::vector<std::uint8_t> out;
    out.push_back(static_cast<std::uint8_t>(gate));
    put_u32be(out, static_cast<std::uint32_t>(in.rows));
    put_u32be(out, static_cast<std::uint32_t>(in.cols));
    const bool ranged = gate == NonlinGate::Sigmoid || gate == NonlinGate::SigmoidPrime;
    if (ranged) {
        out.push_back(lo.empty() ? 0 : 1);
        if (!lo.empty()) {
            if (static_cast<int>(lo.size()) != in.cols || hi.size() != lo.size())
                throw DimMismatch("sigmoid range vectors");
            for (double d : lo) {
                std::uint64_t w;
                std::memcpy(&w, &d, 8);
                put_u64le(out, w);
            }
            for (double d : hi) {
                std::uint64_t w;
                std::memcpy(&w, &d, 8);
                put_u64le(out, w);
            }
        }
    }
    for (ring_t w : in.v) put_u64le(out, w);
    return out;
}

namespace {

struct NonlinRequest {
    NonlinGate gate;
    int rows, cols;
    std::vector<double> lo, hi;
    std::vector<ring_t> words;
};

NonlinRequest parse_nonlin(const std::vector<std::uint8_t>& payload) {
    std::size_t pos = 0;
    if (payload.empty()) throw Truncated("nonlin request");
    NonlinRequest r;
    const std::uint8_t g = payload[pos++];
    if (g > static_cast<std::uint8_t>(NonlinGate::Trunc)) throw BadType("nonlin gate");
    r.gate = static_cast<NonlinGate>(g);
    r.rows = static_cast<int>(get_u32be(payload, pos));
    r.cols = static_cast<int>(get_u32be(payload, pos));
    const bool ranged = r.gate == NonlinGate::Sigmoid || r.gate == NonlinGate::SigmoidPrime;
    if (ranged) {
        if (pos >= payload.size()) throw Truncated("nonlin range flag");
        const bool has_range = payload[pos++] != 0;
        if (has_range) {
            r.lo.resize(static_cast<std::size_t>(r.cols));
            r.hi.resize(static_cast<std::size_t>(r.cols));
            for (auto& d : r.lo) {
                const std::uint64_t w = get_u64le(payload, pos);
                std::memcpy(&d, &w, 8);
            }
            for (auto& d : r.hi) {
                const std::uint64_t w = get_u64le(payload, pos);
                std::memcpy(&d, &w, 8);
            }
        }
    }
    r.words.resize(static_cast<std::size_t>(r.rows) * r.cols);
    for (auto& w : r.words) w = get_u64le(payload, pos);
    if (pos != payload.size()) throw DimHeaderMismatch("nonlin request size");
    return r;
}

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

ring_t eval_gate(NonlinGate gate, ring_t z, const FixedPointConfig& cfg, double lo, double hi) {
    const auto sz = static_cast<std::int64_t>(z);
    switch (gate) {
        case NonlinGate::Relu:
            return sz > 0 ? z : 0;
        case NonlinGate::ReluPrime:
            return sz > 0 ? encode_fixed(1.0, cfg) : 0;
        case NonlinGate::Sigmoid: {
            const double s = sigmoid_scalar(decode_fixed(z, cfg));
            return encode_fixed(lo + (hi - lo) * s, cfg);
        }
        case NonlinGate::SigmoidPrime: {
            const double s = sigmoid_scalar(decode_fixed(z, cfg));
            return encode_fixed((hi - lo) * s * (1.0 - s), cfg);
        }
        case NonlinGate::Trunc: {
            // value arrives at scale 2^2f; round-to-nearest shift down by f
            const std::int64_t bias = std::int64_t{1} << (cfg.frac_bits - 1);
            return static_cast<ring_t>((sz + bias) >> cfg.frac_bits);
        }
    }
    throw BadType("nonlin gate");
}

void respond_nonlin(Channel& ch0, Channel& ch1, const Frame& f0, const Frame& f1,
                    const FixedPointConfig& cfg, Rng& rng) {
    const NonlinRequest r0 = parse_nonlin(f0.payload);
    const NonlinRequest r1 = parse_nonlin(f1.payload);
    if (r0.gate != r1.gate || r0.rows != r1.rows || r0.cols != r1.cols ||
        r0.words.size() != r1.words.size())
        throw ChannelDesync("nonlin requests disagree");

    std::vector<std::uint8_t> out0, out1;
    out0.reserve(r0.words.size() * 8);
    out1.reserve(r0.words.size() * 8);
    for (std::size_t i = 0; i < r0.words.size(); ++i) {
        const ring_t z = r0.words[i] + r1.words[i];
        const int col = static_cast<int>(i % static_cast<std::size_t>(r0.cols));
        const double lo = r0.lo.empty() ? 0.0 : r0.lo[static_cast<std::size_t>(col)];
        const double hi = r0.hi.empty() ? 1.0 : r0.hi[static_cast<std::size_t>(col)];
        const ring_t y = eval_gate(r0.gate, z, cfg, lo, hi);
        const ring_t y0 = rng.next_u64();
        put_u64le(out0, y0);
        put_u64le(out1, y - y0);
    }
    ch0.send(MsgType::NonlinResp, std::move(out0));
    ch1.send(MsgType::NonlinResp, std::move(out1));
}

void respond_triple(Channel& ch0, Channel& ch1, const Frame& f0, const Frame& f1, Rng& rng) {
    if (f0.payload != f1.payload) throw ChannelDesync("triple requests disagree");
    std::size_t pos = 0;
    const std::uint8_t kind_raw = f0.payload.at(0);
    pos = 1;
    if (kind_raw > static_cast<std::uint8_t>(TripleKind::Elementwise))
        throw BadType("triple kind");
    const auto kind = static_cast<TripleKind>(kind_raw);
    const int m = static_cast<int>(get_u32be(f0.payload, pos));
    const int k = static_cast<int>(get_u32be(f0.payload, pos));
    const int n = static_cast<int>(get_u32be(f0.payload, pos));

    const std::size_t u_len = kind == TripleKind::MatMul
                                  ? static_cast<std::size_t>(m) * k
                                  : static_cast<std::size_t>(m) * k;
    const std::size_t v_len = kind == TripleKind::MatMul
                                  ? static_cast<std::size_t>(k) * n
                                  : u_len;
    const std::size_t c_len = kind == TripleKind::MatMul
                                  ? static_cast<std::size_t>(m) * n
                                  : u_len;

    std::vector<ring_t> u(u_len), v(v_len);
    for (auto& w : u) w = rng.next_u64();
    for (auto& w : v) w = rng.next_u64();
    std::vector<ring_t> c;
    if (kind == TripleKind::MatMul) {
        c = ring_matmul(u, v, m, k, n);
    } else {
        c.resize(c_len);
        for (std::size_t i = 0; i < c_len; ++i) c[i] = u[i] * v[i];
    }

    std::vector<std::uint8_t> out0, out1;
    auto emit = [&](const std::vector<ring_t>& full) {
        for (ring_t w : full) {
            const ring_t h0 = rng.next_u64();
            put_u64le(out0, h0);
            put_u64le(out1, w - h0);
        }
    };
    emit(u);
    emit(v);
    emit(c);
    ch0.send(MsgType::Triple, std::move(out0));
    ch1.send(MsgType::Triple, std::move(out1));
}

}  // namespace

void serve_dealer(Channel& ch0, Channel& ch1, const FixedPointConfig& cfg, Rng rng) {
    // hellos are exchanged by the connection wiring before this loop runs
    for (;;) {
        const Frame f0 = ch0.recv();
        if (f0.type == MsgType::Bye) {
            ch0.send(MsgType::Bye, {});
            const Frame last = ch1.recv();
            if (last.type != MsgType::Bye) throw ChannelDesync("party 1 still active");
            ch1.send(MsgType::Bye, {});
            return;
        }
        const Frame f1 = ch1.recv();
        if (f0.type != f1.type) throw ChannelDesync("dealer request types disagree");
        switch (f0.type) {
            case MsgType::Triple:
                respond_triple(ch0, ch1, f0, f1, rng);
                break;
            case MsgType::NonlinReq:
                respond_nonlin(ch0, ch1, f0, f1, cfg, rng);
                break;
            default:
                throw BadType("unexpected dealer request");
        }
    }
}

}  // namespace secmarl
