#pragma once

#include <Eigen/Dense>
#include <map>

namespace aoismpc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Matrix-valued affine function of the decision vector z:
///   value(z) = constant + sum_v z_v * coeffs[v].
/// Coefficient matrices share the shape of the constant.
class AffineMatrix {
public:
    AffineMatrix() = default;
    explicit AffineMatrix(MatrixXd constant) : constant_(std::move(constant)) {}
    static AffineMatrix zero(Eigen::Index rows, Eigen::Index cols) {
        return AffineMatrix(MatrixXd::Zero(rows, cols));
    }

    Eigen::Index rows() const { return constant_.rows(); }
    Eigen::Index cols() const { return constant_.cols(); }
    const MatrixXd& constant() const { return constant_; }
    const std::map<int, MatrixXd>& coeffs() const { return coeffs_; }

    /// Adds z_var * coeff.
    void add_term(int var, const MatrixXd& coeff);
    /// Adds z_var at entry (i, j).
    void add_entry(int var, Eigen::Index i, Eigen::Index j, double scale = 1.0);

    MatrixXd evaluate(const VectorXd& z) const;

    AffineMatrix transpose() const;
    AffineMatrix middle_rows(Eigen::Index start, Eigen::Index n) const;
    AffineMatrix middle_cols(Eigen::Index start, Eigen::Index n) const;
    /// Elementwise product with a constant mask; terms that vanish are dropped.
    AffineMatrix hadamard(const MatrixXd& mask) const;

    AffineMatrix& operator+=(const AffineMatrix& o);
    AffineMatrix& operator*=(double s);
    friend AffineMatrix operator+(AffineMatrix a, const AffineMatrix& b) { return a += b; }
    friend AffineMatrix operator-(AffineMatrix a, const AffineMatrix& b) {
        AffineMatrix nb = b;
        nb *= -1.0;
        return a += nb;
    }
    friend AffineMatrix operator*(AffineMatrix a, double s) { return a *= s; }
    friend AffineMatrix operator*(double s, AffineMatrix a) { return a *= s; }
    friend AffineMatrix operator*(const MatrixXd& left, const AffineMatrix& a);
    friend AffineMatrix operator*(const AffineMatrix& a, const MatrixXd& right);

    /// [[a, b], [c, d]]
    static AffineMatrix blocks(const AffineMatrix& a, const AffineMatrix& b, const AffineMatrix& c,
                               const AffineMatrix& d);

private:
    MatrixXd constant_;
    std::map<int, MatrixXd> coeffs_;
};

}  // namespace aoismpc
