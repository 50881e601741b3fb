#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "secmarl/errors.h"
#include "secmarl/rng.h"

namespace secmarl {

// Dense row-major double matrix. Small enough everywhere in this project that
// plain loops beat any library dependency.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}
    Mat(int r, int c, std::vector<double> v) : rows(r), cols(c), a(std::move(v)) {}

    double& at(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }
    std::size_t size() const { return a.size(); }
    bool empty() const { return a.empty(); }

    static Mat zeros(int r, int c) { return Mat(r, c); }
    static Mat full(int r, int c, double v) {
        Mat m(r, c);
        for (auto& x : m.a) x = v;
        return m;
    }
    static Mat random_uniform(int r, int c, double lo, double hi, Rng& rng) {
        Mat m(r, c);
        for (auto& x : m.a) x = rng.next_range(lo, hi);
        return m;
    }

    bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }

    bool all_finite() const {
        for (double x : a)
            if (!std::isfinite(x)) return false;
        return true;
    }
};

inline Mat operator+(const Mat& x, const Mat& y) {
    if (!x.same_shape(y)) throw DimMismatch("mat add");
    Mat z = x;
    for (std::size_t i = 0; i < z.a.size(); ++i) z.a[i] += y.a[i];
    return z;
}

inline Mat operator-(const Mat& x, const Mat& y) {
    if (!x.same_shape(y)) throw DimMismatch("mat sub");
    Mat z = x;
    for (std::size_t i = 0; i < z.a.size(); ++i) z.a[i] -= y.a[i];
    return z;
}

inline Mat operator*(const Mat& x, double c) {
    Mat z = x;
    for (auto& v : z.a) v *= c;
    return z;
}

inline Mat hadamard(const Mat& x, const Mat& y) {
    if (!x.same_shape(y)) throw DimMismatch("hadamard");
    Mat z = x;
    for (std::size_t i = 0; i < z.a.size(); ++i) z.a[i] *= y.a[i];
    return z;
}

inline Mat matmul(const Mat& x, const Mat& y) {
    if (x.cols != y.rows) throw DimMismatch("matmul inner dims");
    Mat z(x.rows, y.cols);
    for (int i = 0; i < x.rows; ++i)
        for (int k = 0; k < x.cols; ++k) {
            const double xv = x.at(i, k);
            if (xv == 0.0) continue;
            for (int j = 0; j < y.cols; ++j) z.at(i, j) += xv * y.at(k, j);
        }
    return z;
}

inline Mat transpose(const Mat& x) {
    Mat z(x.cols, x.rows);
    for (int i = 0; i < x.rows; ++i)
        for (int j = 0; j < x.cols; ++j) z.at(j, i) = x.at(i, j);
    return z;
}

// column sums as a 1 x cols row vector
inline Mat col_sum(const Mat& x) {
    Mat z(1, x.cols);
    for (int i = 0; i < x.rows; ++i)
        for (int j = 0; j < x.cols; ++j) z.at(0, j) += x.at(i, j);
    return z;
}

// append y's columns to the right of x
inline Mat hcat(const Mat& x, const Mat& y) {
    if (x.rows != y.rows) throw DimMismatch("hcat rows");
    Mat z(x.rows, x.cols + y.cols);
    for (int i = 0; i < x.rows; ++i) {
        for (int j = 0; j < x.cols; ++j) z.at(i, j) = x.at(i, j);
        for (int j = 0; j < y.cols; ++j) z.at(i, x.cols + j) = y.at(i, j);
    }
    return z;
}

inline Mat slice_cols(const Mat& x, int c0, int c1) {
    if (c0 < 0 || c1 > x.cols || c0 > c1) throw IndexOutOfRange("slice_cols");
    Mat z(x.rows, c1 - c0);
    for (int i = 0; i < x.rows; ++i)
        for (int j = c0; j < c1; ++j) z.at(i, j - c0) = x.at(i, j);
    return z;
}

}  // namespace secmarl
