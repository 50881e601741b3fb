#include "secmarl/backend.h"

#include <cmath>

namespace secmarl {

double sigmoid_scalar(double x) { return 1.0 / (1.0 + std::exp(-x)); }

SecMat sec_transpose(const SecMat& a) {
    if (!a.is_share) return SecMat::of(transpose(a.mat));
    ShareMatrix t(a.shares.cols, a.shares.rows, a.shares.party);
    for (int i = 0; i < a.shares.rows; ++i)
        for (int j = 0; j < a.shares.cols; ++j) t.at(j, i) = a.shares.at(i, j);
    return SecMat::of(std::move(t));
}

SecMat sec_col_sum(const SecMat& a) {
    if (!a.is_share) return SecMat::of(col_sum(a.mat));
    ShareMatrix s(1, a.shares.cols, a.shares.party);
    for (int i = 0; i < a.shares.rows; ++i)
        for (int j = 0; j < a.shares.cols; ++j) s.at(0, j) += a.shares.at(i, j);
    return SecMat::of(std::move(s));
}

SecMat sec_slice_cols(const SecMat& a, int c0, int c1) {
    if (!a.is_share) return SecMat::of(slice_cols(a.mat, c0, c1));
    if (c0 < 0 || c1 > a.shares.cols || c0 > c1) throw IndexOutOfRange("sec_slice_cols");
    ShareMatrix s(a.shares.rows, c1 - c0, a.shares.party);
    for (int i = 0; i < a.shares.rows; ++i)
        for (int j = c0; j < c1; ++j) s.at(i, j - c0) = a.shares.at(i, j);
    return SecMat::of(std::move(s));
}

namespace {

void check_clear(const SecMat& a) {
    if (a.is_share) throw DimMismatch("clear backend got a share matrix");
}

Mat apply_range(const Mat& s, const std::vector<double>& lo, const std::vector<double>& hi) {
    if (lo.empty()) return s;
    if (static_cast<int>(lo.size()) != s.cols || hi.size() != lo.size())
        throw DimMismatch("sigmoid range vectors");
    Mat out = s;
    for (int i = 0; i < s.rows; ++i)
        for (int j = 0; j < s.cols; ++j)
            out.at(i, j) = lo[static_cast<std::size_t>(j)] +
                           (hi[static_cast<std::size_t>(j)] - lo[static_cast<std::size_t>(j)]) *
                               s.at(i, j);
    return out;
}

}  // namespace

SecMat ClearBackend::priv_input(const Mat& m, int, int rows, int cols) {
    if (m.rows != rows || m.cols != cols) throw DimMismatch("priv_input dims");
    return SecMat::of(m);
}

SecMat ClearBackend::sec_add(const SecMat& a, const SecMat& b) {
    check_clear(a);
    check_clear(b);
    return SecMat::of(a.mat + b.mat);
}

SecMat ClearBackend::sec_sub(const SecMat& a, const SecMat& b) {
    check_clear(a);
    check_clear(b);
    return SecMat::of(a.mat - b.mat);
}

SecMat ClearBackend::sec_add_row(const SecMat& a, const SecMat& row) {
    check_clear(a);
    check_clear(row);
    if (row.mat.rows != 1 || row.mat.cols != a.mat.cols) throw DimMismatch("sec_add_row");
    Mat out = a.mat;
    for (int i = 0; i < out.rows; ++i)
        for (int j = 0; j < out.cols; ++j) out.at(i, j) += row.mat.at(0, j);
    return SecMat::of(std::move(out));
}

SecMat ClearBackend::sec_matmul(const SecMat& a, const SecMat& b) {
    check_clear(a);
    check_clear(b);
    return SecMat::of(matmul(a.mat, b.mat));
}

SecMat ClearBackend::sec_mul(const SecMat& a, const SecMat& b) {
    check_clear(a);
    check_clear(b);
    return SecMat::of(hadamard(a.mat, b.mat));
}

SecMat ClearBackend::sec_scale(const SecMat& a, double c) {
    check_clear(a);
    return SecMat::of(a.mat * c);
}

SecMat ClearBackend::sec_relu(const SecMat& a) {
    check_clear(a);
    Mat out = a.mat;
    for (auto& x : out.a) x = x > 0.0 ? x : 0.0;
    return SecMat::of(std::move(out));
}

SecMat ClearBackend::sec_relu_prime(const SecMat& a) {
    check_clear(a);
    Mat out = a.mat;
    for (auto& x : out.a) x = x > 0.0 ? 1.0 : 0.0;
    return SecMat::of(std::move(out));
}

SecMat ClearBackend::sec_sigmoid(const SecMat& a, const std::vector<double>& lo,
                                 const std::vector<double>& hi) {
    check_clear(a);
    Mat s = a.mat;
    for (auto& x : s.a) x = sigmoid_scalar(x);
    return SecMat::of(apply_range(s, lo, hi));
}

SecMat ClearBackend::sec_sigmoid_prime(const SecMat& a, const std::vector<double>& lo,
                                       const std::vector<double>& hi) {
    check_clear(a);
    Mat s = a.mat;
    for (auto& x : s.a) {
        const double v = sigmoid_scalar(x);
        x = v * (1.0 - v);
    }
    if (!lo.empty()) {
        if (static_cast<int>(lo.size()) != s.cols || hi.size() != lo.size())
            throw DimMismatch("sigmoid range vectors");
        for (int i = 0; i < s.rows; ++i)
            for (int j = 0; j < s.cols; ++j)
                s.at(i, j) *= hi[static_cast<std::size_t>(j)] - lo[static_cast<std::size_t>(j)];
    }
    return SecMat::of(std::move(s));
}

Mat ClearBackend::sec_open(const SecMat& a, OpenTo) {
    check_clear(a);
    return a.mat;
}

}  // namespace secmarl
