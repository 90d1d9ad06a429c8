#include <cmath>
#include <stdexcept>
#include <string>

#include "aoismpc/synthesis.hpp"

namespace aoismpc {
namespace {

// scalar (1x1 affine) times a constant matrix
AffineMatrix scalar_times(const AffineMatrix& s, const MatrixXd& m) {
    AffineMatrix out(s.constant()(0, 0) * m);
    for (const auto& [v, c] : s.coeffs()) out.add_term(v, c(0, 0) * m);
    return out;
}

LmiBlock chance_block(std::string name, const AffineMatrix& slack, const AffineMatrix& spread, const MatrixXd& W) {
    const AffineMatrix lower = spread.transpose();
    return LmiBlock::from_affine(std::move(name),
                                 AffineMatrix::blocks(slack, spread, lower, scalar_times(slack, W)));
}

}  // namespace

LmiBlock build_input_lmi(int k, int i, const Polytope& input_set, const AffineMatrix& V_k,
                         const AffineMatrix& M_row_k, const IndicatorMatrix& P_beta, const MatrixXd& bigW,
                         const VectorXd& x0, double c_u) {
    const MatrixXd Ci = input_set.C.row(i);
    const int nu = static_cast<int>(V_k.rows());
    const MatrixXd mask = P_beta.expand().middleRows(k * nu, nu);
    if (mask.cols() != M_row_k.cols()) throw std::invalid_argument("build_input_lmi: mask/M shape mismatch");

    AffineMatrix slack(MatrixXd::Constant(1, 1, input_set.b(i)));
    slack = slack - Ci * (V_k * MatrixXd(x0));
    const AffineMatrix spread = std::sqrt(c_u) * ((Ci * M_row_k.hadamard(mask)) * bigW);
    return chance_block("Lu[k=" + std::to_string(k) + ",i=" + std::to_string(i) + "]", slack, spread, bigW);
}

LmiBlock build_state_lmi(int k, int j, const Polytope& state_set_next, const AffineMatrix& calA_next,
                         const AffineMatrix& scrE_next, const MatrixXd& bigW, const VectorXd& x0, double c_x) {
    const MatrixXd Cj = state_set_next.C.row(j);
    AffineMatrix slack(MatrixXd::Constant(1, 1, state_set_next.b(j)));
    slack = slack - Cj * (calA_next * MatrixXd(x0));
    const AffineMatrix spread = std::sqrt(c_x) * ((Cj * scrE_next) * bigW);
    return chance_block("Lx[k=" + std::to_string(k + 1) + ",j=" + std::to_string(j) + "]", slack, spread, bigW);
}

LmiBlock build_covariance_lmi(const AffineMatrix& scrE_beta, const MatrixXd& bigW, const AffineMatrix& S) {
    const AffineMatrix EW = scrE_beta * bigW;
    return LmiBlock::from_affine("Ls", AffineMatrix::blocks(S, EW, EW.transpose(), AffineMatrix(bigW)));
}

}  // namespace aoismpc
