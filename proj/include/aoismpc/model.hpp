#pragma once

#include <Eigen/Dense>
#include <vector>

namespace aoismpc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// x_{k+1} = A x_k + B u_k + E w_k
struct LinearPlant {
    MatrixXd A;
    MatrixXd B;
    MatrixXd E;

    int nx() const { return static_cast<int>(A.rows()); }
    int nu() const { return static_cast<int>(B.cols()); }
    int nw() const { return static_cast<int>(E.cols()); }
};

/// Zero-mean disturbance with per-step covariances W_0..W_{H-1}.
struct DisturbanceModel {
    std::vector<MatrixXd> covariances;

    /// blkdiag(W_0, ..., W_{H-1})
    MatrixXd stacked() const;
};

/// { x : C x <= b }
struct Polytope {
    MatrixXd C;
    VectorXd b;

    int num_halfspaces() const { return static_cast<int>(C.rows()); }
    bool contains(const VectorXd& x, double tol = 0.0) const;

    /// Axis-aligned box lo <= x <= hi as 2n half-spaces.
    static Polytope box(const VectorXd& lo, const VectorXd& hi);
};

struct CostWeights {
    std::vector<MatrixXd> Q;  // H+1 state weights
    std::vector<MatrixXd> R;  // H input weights
    double S = 0.0;           // weight on trace of the covariance bound
};

/// Raw problem data as supplied by the user. Lists of length one are
/// broadcast over the horizon by validate().
struct ProblemSpec {
    LinearPlant plant;
    DisturbanceModel disturbance;
    int horizon = 0;
    VectorXd x0;
    std::vector<Polytope> state_sets;  // X_0..X_H
    Polytope input_set;
    double delta_x = 0.0;
    double delta_u = 0.0;
    CostWeights weights;
};

struct Dimensions {
    int nx = 0;
    int nu = 0;
    int nw = 0;
    int H = 0;

    bool operator==(const Dimensions&) const = default;
};

/// A ProblemSpec whose invariants have been checked. Only validate() creates one.
class ValidatedProblem {
public:
    const ProblemSpec& spec() const { return spec_; }
    const Dimensions& dims() const { return dims_; }

    const LinearPlant& plant() const { return spec_.plant; }
    int horizon() const { return dims_.H; }
    const VectorXd& x0() const { return spec_.x0; }
    const Polytope& state_set(int k) const { return spec_.state_sets.at(k); }
    const Polytope& input_set() const { return spec_.input_set; }
    double delta_x() const { return spec_.delta_x; }
    double delta_u() const { return spec_.delta_u; }

private:
    friend ValidatedProblem validate(const ProblemSpec& spec);
    ValidatedProblem(ProblemSpec spec, Dimensions dims) : spec_(std::move(spec)), dims_(dims) {}

    ProblemSpec spec_;
    Dimensions dims_;
};

/// Checks all problem invariants, broadcasts single-entry lists and returns the
/// validated instance. Throws DimensionMismatch, NotPsd or RiskOutOfRange.
ValidatedProblem validate(const ProblemSpec& spec);
ValidatedProblem validate(const ValidatedProblem& problem);

/// Smallest eigenvalue of the symmetric part of m.
double min_eigenvalue(const MatrixXd& m);

/// Symmetric within 1e-12 and smallest eigenvalue >= -1e-10.
bool is_psd(const MatrixXd& m, double* min_eig = nullptr);

/// Exact equality including shape.
bool same_matrix(const MatrixXd& a, const MatrixXd& b);

bool operator==(const Polytope& a, const Polytope& b);
bool operator==(const ProblemSpec& a, const ProblemSpec& b);

}  // namespace aoismpc
