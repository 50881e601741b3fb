#include "secmarl/sharemat.h"

#include <cstring>

namespace secmarl {

std::vector<std::uint8_t> share_matrix_payload(const ShareMatrix& m) {
    std::vector<std::uint8_t> out;
    out.reserve(8 + m.v.size() * 8);
    put_u32be(out, static_cast<std::uint32_t>(m.rows));
    put_u32be(out, static_cast<std::uint32_t>(m.cols));
    for (ring_t w : m.v) put_u64le(out, w);
    return out;
}

ShareMatrix share_matrix_from_payload(const std::vector<std::uint8_t>& payload, int party) {
    std::size_t pos = 0;
    const std::uint32_t rows = get_u32be(payload, pos);
    const std::uint32_t cols = get_u32be(payload, pos);
    const std::size_t want = 8 + static_cast<std::size_t>(rows) * cols * 8;
    if (payload.size() != want) throw DimHeaderMismatch("share matrix payload size");
    ShareMatrix m(static_cast<int>(rows), static_cast<int>(cols), party);
    for (auto& w : m.v) w = get_u64le(payload, pos);
    return m;
}

void send_share_matrix(const ShareMatrix& m, Channel& ch) {
    ch.send(MsgType::ShareMatrix, share_matrix_payload(m));
}

ShareMatrix recv_share_matrix(Channel& ch, int party) {
    const Frame f = ch.expect(MsgType::ShareMatrix);
    return share_matrix_from_payload(f.payload, party);
}

std::vector<std::uint8_t> mat_payload(const Mat& m) {
    std::vector<std::uint8_t> out;
    out.reserve(8 + m.a.size() * 8);
    put_u32be(out, static_cast<std::uint32_t>(m.rows));
    put_u32be(out, static_cast<std::uint32_t>(m.cols));
    for (double d : m.a) {
        std::uint64_t w;
        std::memcpy(&w, &d, 8);
        put_u64le(out, w);
    }
    return out;
}

Mat mat_from_payload(const std::vector<std::uint8_t>& payload) {
    std::size_t pos = 0;
    const std::uint32_t rows = get_u32be(payload, pos);
    const std::uint32_t cols = get_u32be(payload, pos);
    const std::size_t want = 8 + static_cast<std::size_t>(rows) * cols * 8;
    if (payload.size() != want) throw DimHeaderMismatch("matrix payload size");
    Mat m(static_cast<int>(rows), static_cast<int>(cols));
    for (auto& d : m.a) {
        const std::uint64_t w = get_u64le(payload, pos);
        std::memcpy(&d, &w, 8);
    }
    return m;
}

void send_mat(const Mat& m, Channel& ch) { ch.send(MsgType::ShareMatrix, mat_payload(m)); }

Mat recv_mat(Channel& ch) {
    const Frame f = ch.expect(MsgType::ShareMatrix);
    return mat_from_payload(f.payload);
}

std::pair<ShareMatrix, ShareMatrix> share_additive(const Mat& x, const FixedPointConfig& cfg,
                                                   Rng& rng) {
    ShareMatrix s0(x.rows, x.cols, 0);
    ShareMatrix s1(x.rows, x.cols, 1);
    for (std::size_t i = 0; i < x.a.size(); ++i) {
        const ring_t enc = encode_fixed(x.a[i], cfg);
        const ring_t r = rng.next_u64();
        s0.v[i] = r;
        s1.v[i] = enc - r;
    }
    return {std::move(s0), std::move(s1)};
}

Mat open_clear(const ShareMatrix& s0, const ShareMatrix& s1, const FixedPointConfig& cfg) {
    if (s0.rows != s1.rows || s0.cols != s1.cols) throw DimMismatch("open_clear");
    Mat m(s0.rows, s0.cols);
    for (std::size_t i = 0; i < m.a.size(); ++i)
        m.a[i] = decode_fixed(s0.v[i] + s1.v[i], cfg);
    return m;
}

}  // namespace secmarl
