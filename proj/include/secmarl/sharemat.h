#pragma once

#include <cstdint>
#include <vector>

#include "secmarl/algebra.h"
#include "secmarl/mat.h"
#include "secmarl/transport.h"

namespace secmarl {

// One party's half of an additively shared matrix.
struct ShareMatrix {
    int rows = 0;
    int cols = 0;
    int party = 0;  // 0 or 1
    std::vector<ring_t> v;

    ShareMatrix() = default;
    ShareMatrix(int r, int c, int p)
        : rows(r), cols(c), party(p), v(static_cast<std::size_t>(r) * c, 0) {}

    ring_t& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
    ring_t at(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }
    std::size_t size() const { return v.size(); }
};

// Wire layout: rows, cols as 4-byte big-endian, then row-major 8-byte
// little-endian words.
std::vector<std::uint8_t> share_matrix_payload(const ShareMatrix& m);
ShareMatrix share_matrix_from_payload(const std::vector<std::uint8_t>& payload, int party);

void send_share_matrix(const ShareMatrix& m, Channel& ch);
ShareMatrix recv_share_matrix(Channel& ch, int party);

// Plain f64 matrices ride the same frame layout with IEEE-754 bit patterns in
// the word slots (used on harness channels, where no quantization may occur).
std::vector<std::uint8_t> mat_payload(const Mat& m);
Mat mat_from_payload(const std::vector<std::uint8_t>& payload);
void send_mat(const Mat& m, Channel& ch);
Mat recv_mat(Channel& ch);

// Entrywise additive sharing of a real matrix: (r, encode(x) - r).
std::pair<ShareMatrix, ShareMatrix> share_additive(const Mat& x, const FixedPointConfig& cfg,
                                                   Rng& rng);

// Sum of the two halves, decoded.
Mat open_clear(const ShareMatrix& s0, const ShareMatrix& s1, const FixedPointConfig& cfg);

}  // namespace secmarl
