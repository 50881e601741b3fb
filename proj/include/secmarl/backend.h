#pragma once

#include <memory>
#include <string>
#include <vector>

#include "secmarl/sharemat.h"

namespace secmarl {

// A matrix-valued secret as seen by one engine: a plain matrix under the
// clear reference backend, this party's additive share half under the 2PC
// backend.
struct SecMat {
    Mat mat;
    ShareMatrix shares;
    bool is_share = false;

    int rows() const { return is_share ? shares.rows : mat.rows; }
    int cols() const { return is_share ? shares.cols : mat.cols; }

    static SecMat of(Mat m) {
        SecMat s;
        s.mat = std::move(m);
        return s;
    }
    static SecMat of(ShareMatrix m) {
        SecMat s;
        s.shares = std::move(m);
        s.is_share = true;
        return s;
    }
};

enum class OpenTo { Party0 = 0, Party1 = 1, Both = 2 };

// Backend contract: every op, after opening, must agree with the clear
// reference within the fixed-point tolerance. Two implementations:
// ClearBackend (below) and AdditiveBackend (additive.h).
class SecureBackend {
  public:
    virtual ~SecureBackend() = default;

    virtual int party() const = 0;  // 0/1 for a protocol party, -1 for the clear engine
    virtual const FixedPointConfig& fixed_cfg() const = 0;

    // `m` is read only when this engine holds the data (owner party or clear)
    virtual SecMat priv_input(const Mat& m, int owner, int rows, int cols) = 0;
    virtual SecMat pub_input(const Mat& m) = 0;

    virtual SecMat sec_add(const SecMat& a, const SecMat& b) = 0;
    virtual SecMat sec_sub(const SecMat& a, const SecMat& b) = 0;
    virtual SecMat sec_add_row(const SecMat& a, const SecMat& row) = 0;
    virtual SecMat sec_matmul(const SecMat& a, const SecMat& b) = 0;
    virtual SecMat sec_mul(const SecMat& a, const SecMat& b) = 0;  // elementwise
    virtual SecMat sec_scale(const SecMat& a, double c) = 0;
    virtual SecMat sec_relu(const SecMat& a) = 0;
    virtual SecMat sec_relu_prime(const SecMat& a) = 0;
    // logistic with an optional per-column affine range [lo, hi]; empty = (0, 1)
    virtual SecMat sec_sigmoid(const SecMat& a, const std::vector<double>& lo = {},
                               const std::vector<double>& hi = {}) = 0;
    virtual SecMat sec_sigmoid_prime(const SecMat& a, const std::vector<double>& lo = {},
                                     const std::vector<double>& hi = {}) = 0;

    // recipient(s) learn the value; others get an empty Mat
    virtual Mat sec_open(const SecMat& a, OpenTo recipient) = 0;

    virtual void set_tag(const std::string&) {}
};

// Linear structure-preserving ops need no communication in either
// representation.
SecMat sec_transpose(const SecMat& a);
SecMat sec_col_sum(const SecMat& a);
SecMat sec_slice_cols(const SecMat& a, int c0, int c1);

// Plaintext reference implementation; also the engine for the in-process
// execution modes.
class ClearBackend final : public SecureBackend {
  public:
    explicit ClearBackend(FixedPointConfig cfg = {}) : cfg_(cfg) {}

    int party() const override { return -1; }
    const FixedPointConfig& fixed_cfg() const override { return cfg_; }

    SecMat priv_input(const Mat& m, int, int rows, int cols) override;
    SecMat pub_input(const Mat& m) override { return SecMat::of(m); }

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

  private:
    FixedPointConfig cfg_;
};

double sigmoid_scalar(double x);

}  // namespace secmarl
