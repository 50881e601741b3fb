#include "secmarl/gadgets.h"

namespace secmarl {

PaddedInput preprocess(const Mat& half, int side, const std::string& tag,
                       PreprocessCounter* counter) {
    if (side != 0 && side != 1) throw SideConflict("side must be 0 or 1");
    if (!half.all_finite()) throw NonFinite("preprocess");
    PaddedInput p;
    p.side = side;
    p.rows = half.rows;
    p.cols = 2 * half.cols;
    p.present = true;
    p.local = Mat::zeros(half.rows, 2 * half.cols);
    const int off = side == 0 ? 0 : half.cols;
    for (int i = 0; i < half.rows; ++i)
        for (int j = 0; j < half.cols; ++j) p.local.at(i, off + j) = half.at(i, j);
    if (counter) counter->bump(tag);
    return p;
}

PaddedInput absent_padded(int rows, int cols_total, int side) {
    PaddedInput p;
    p.side = side;
    p.rows = rows;
    p.cols = cols_total;
    p.present = false;
    return p;
}

SecMat combine_padded(SecureBackend& be, const PaddedInput& x0, const PaddedInput& x1) {
    if (x0.side == x1.side) throw SideConflict("both halves claim the same side");
    const PaddedInput& left = x0.side == 0 ? x0 : x1;
    const PaddedInput& right = x0.side == 0 ? x1 : x0;
    if (left.rows != right.rows || left.cols != right.cols)
        throw DimMismatch("padded halves disagree on shape");
    const SecMat s0 = be.priv_input(left.local, 0, left.rows, left.cols);
    const SecMat s1 = be.priv_input(right.local, 1, right.rows, right.cols);
    return be.sec_add(s0, s1);
}

ForwardTrace f_secfloat_trace(SecureBackend& be, const PaddedInput& x0, const PaddedInput& x1,
                              const MlpParams& params, int owner) {
    const SecMat x = combine_padded(be, x0, x1);
    return forward(be, x, params, owner);
}

Mat f_secfloat(SecureBackend& be, const PaddedInput& x0, const PaddedInput& x1,
               const MlpParams& params, int owner) {
    const ForwardTrace tr = f_secfloat_trace(be, x0, x1, params, owner);
    return be.sec_open(tr.output(), owner == 0 ? OpenTo::Party0 : OpenTo::Party1);
}

GradSet b_secfloat_w(SecureBackend& be, const PaddedInput& x0, const PaddedInput& x1,
                     const MlpParams& params, int owner, const Mat* seed) {
    const ForwardTrace tr = f_secfloat_trace(be, x0, x1, params, owner);
    SecGrads g;
    if (seed) {
        const SecMat s = be.priv_input(*seed, owner, tr.batch, tr.out_dim);
        g = backward(be, tr, params, &s, owner, false);
    } else {
        g = backward(be, tr, params, nullptr, owner, false);
    }
    return open_grads(be, g, owner == 0 ? OpenTo::Party0 : OpenTo::Party1);
}

Mat b_secfloat_x(SecureBackend& be, const PaddedInput& x0, const PaddedInput& x1,
                 const MlpParams& params, int owner) {
    const ForwardTrace tr = f_secfloat_trace(be, x0, x1, params, owner);
    const SecGrads g = backward(be, tr, params, nullptr, owner, true);
    return be.sec_open(g.x, owner == 0 ? OpenTo::Party0 : OpenTo::Party1);
}

GradSet bl_secfloat_w(SecureBackend& be, const PaddedInput& x0, const PaddedInput& x1,
                      const MlpParams& params, const Mat& target, int owner) {
    const ForwardTrace tr = f_secfloat_trace(be, x0, x1, params, owner);
    const SecMat t = be.priv_input(target, owner, tr.batch, tr.out_dim);
    const SecMat seed = mse_loss_grad(be, tr.output(), t);
    const SecGrads g = backward(be, tr, params, &seed, owner, false);
    return open_grads(be, g, owner == 0 ? OpenTo::Party0 : OpenTo::Party1);
}

}  // namespace secmarl
