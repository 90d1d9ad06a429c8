#include "aoismpc/affine.hpp"

#include <stdexcept>

namespace aoismpc {

void AffineMatrix::add_term(int var, const MatrixXd& coeff) {
    if (coeff.rows() != rows() || coeff.cols() != cols()) {
        throw std::invalid_argument("AffineMatrix::add_term: shape mismatch");
    }
    auto [it, inserted] = coeffs_.try_emplace(var, coeff);
    if (!inserted) it->second += coeff;
}

void AffineMatrix::add_entry(int var, Eigen::Index i, Eigen::Index j, double scale) {
    auto [it, inserted] = coeffs_.try_emplace(var, MatrixXd::Zero(rows(), cols()));
    it->second(i, j) += scale;
}

MatrixXd AffineMatrix::evaluate(const VectorXd& z) const {
    MatrixXd out = constant_;
    for (const auto& [v, c] : coeffs_) out += z(v) * c;
    return out;
}

AffineMatrix AffineMatrix::transpose() const {
    AffineMatrix out(constant_.transpose());
    for (const auto& [v, c] : coeffs_) out.coeffs_.emplace(v, c.transpose());
    return out;
}

AffineMatrix AffineMatrix::middle_rows(Eigen::Index start, Eigen::Index n) const {
    AffineMatrix out(constant_.middleRows(start, n));
    for (const auto& [v, c] : coeffs_) {
        MatrixXd part = c.middleRows(start, n);
        if (!part.isZero(0.0)) out.coeffs_.emplace(v, std::move(part));
    }
    return out;
}

AffineMatrix AffineMatrix::middle_cols(Eigen::Index start, Eigen::Index n) const {
    AffineMatrix out(constant_.middleCols(start, n));
    for (const auto& [v, c] : coeffs_) {
        MatrixXd part = c.middleCols(start, n);
        if (!part.isZero(0.0)) out.coeffs_.emplace(v, std::move(part));
    }
    return out;
}

AffineMatrix AffineMatrix::hadamard(const MatrixXd& mask) const {
    AffineMatrix out((constant_.array() * mask.array()).matrix());
    for (const auto& [v, c] : coeffs_) {
        MatrixXd part = (c.array() * mask.array()).matrix();
        if (!part.isZero(0.0)) out.coeffs_.emplace(v, std::move(part));
    }
    return out;
}

AffineMatrix& AffineMatrix::operator+=(const AffineMatrix& o) {
    if (o.rows() != rows() || o.cols() != cols()) {
        throw std::invalid_argument("AffineMatrix::operator+=: shape mismatch");
    }
    constant_ += o.constant_;
    for (const auto& [v, c] : o.coeffs_) add_term(v, c);
    return *this;
}

AffineMatrix& AffineMatrix::operator*=(double s) {
    constant_ *= s;
    for (auto& [v, c] : coeffs_) c *= s;
    return *this;
}

AffineMatrix operator*(const MatrixXd& left, const AffineMatrix& a) {
    AffineMatrix out(left * a.constant_);
    for (const auto& [v, c] : a.coeffs_) {
        MatrixXd part = left * c;
        if (!part.isZero(0.0)) out.coeffs_.emplace(v, std::move(part));
    }
    return out;
}

AffineMatrix operator*(const AffineMatrix& a, const MatrixXd& right) {
    AffineMatrix out(a.constant_ * right);
    for (const auto& [v, c] : a.coeffs_) {
        MatrixXd part = c * right;
        if (!part.isZero(0.0)) out.coeffs_.emplace(v, std::move(part));
    }
    return out;
}

AffineMatrix AffineMatrix::blocks(const AffineMatrix& a, const AffineMatrix& b, const AffineMatrix& c,
                                  const AffineMatrix& d) {
    if (a.rows() != b.rows() || c.rows() != d.rows() || a.cols() != c.cols() || b.cols() != d.cols()) {
        throw std::invalid_argument("AffineMatrix::blocks: inconsistent block shapes");
    }
    const auto r1 = a.rows(), r2 = c.rows(), c1 = a.cols(), c2 = b.cols();
    MatrixXd k(r1 + r2, c1 + c2);
    k << a.constant_, b.constant_, c.constant_, d.constant_;
    AffineMatrix out(std::move(k));
    auto place = [&](const AffineMatrix& part, Eigen::Index i, Eigen::Index j) {
        for (const auto& [v, coeff] : part.coeffs_) {
            auto [it, inserted] = out.coeffs_.try_emplace(v, MatrixXd::Zero(r1 + r2, c1 + c2));
            it->second.block(i, j, coeff.rows(), coeff.cols()) += coeff;
        }
    };
    place(a, 0, 0);
    place(b, 0, c1);
    place(c, r1, 0);
    place(d, r1, c1);
    return out;
}

}  // namespace aoismpc
