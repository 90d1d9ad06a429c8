#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>

#include "aoismpc/aoi.hpp"
#include "aoismpc/model.hpp"

namespace aoismpc {

/// Stacked prediction matrices: x = bigA x0 + bigB u + bigE w over k = 0..H.
struct StackedSystem {
    int nx = 0;
    int nu = 0;
    int nw = 0;
    int H = 0;
    MatrixXd bigA;  // (H+1)nx x nx, block rows A^k
    MatrixXd bigC;  // (H+1)nx x H nx, block (i,j) = A^{i-j-1} for i > j
    MatrixXd bigB;  // bigC (I_H kron B)
    MatrixXd bigE;  // bigC (I_H kron E)
    MatrixXd bigW;  // blkdiag(W_0..W_{H-1})
};

StackedSystem build_stacked(const LinearPlant& plant, const DisturbanceModel& disturbance, int H);

/// x = bigA x0 + bigB u + bigE w. Throws DimensionMismatch.
VectorXd stacked_trajectory(const StackedSystem& ss, const VectorXd& x0, const VectorXd& u,
                            const VectorXd& w);

/// Disturbance-feedback policy u = V x0 + (P o M) w.
struct FeedbackPolicy {
    MatrixXd V;                    // H nu x nx
    MatrixXd M;                    // H nu x H nw, strictly block lower triangular
    IndicatorMatrix support_mask;  // the beta pattern M was synthesized under

    /// Block (k, r) of M.
    MatrixXd block(int k, int r) const;
    /// Block row k of V.
    MatrixXd V_row(int k) const;
    /// True when every M block outside support_mask (and on/above the diagonal) is zero.
    bool respects_mask() const;
};

/// P o M with P expanded to full blocks.
MatrixXd masked_feedback(const MatrixXd& M, const IndicatorMatrix& P);

/// calA = bigA + bigB V, scrE = bigE + bigB (P o M).
struct ClosedLoop {
    MatrixXd calA;
    MatrixXd scrE;
    std::string realization_tag;
};

ClosedLoop close_loop(const StackedSystem& ss, const FeedbackPolicy& policy, const IndicatorMatrix& P);

/// Mean and covariance of the stacked state for one fixed realization.
struct TrajectoryMoments {
    VectorXd mean;        // calA x0
    MatrixXd covariance;  // scrE W scrE^T
};

TrajectoryMoments trajectory_moments(const ClosedLoop& cl, const MatrixXd& bigW, const VectorXd& x0);

/// Block row k (state x_k) of a stacked matrix with block height n.
inline auto block_row(const MatrixXd& m, int k, int n) { return m.middleRows(k * n, n); }

/// Nominal state x_bar_{l+a|l} = A^a x_l + sum_{j=1}^{a} A^{a-j} B u(l+j-1),
/// predicted from the last certain state x_l with the inputs applied since.
VectorXd nominal_state(const LinearPlant& plant, const VectorXd& x_l, std::span<const VectorXd> inputs);

/// Compact tag such as "P[1|11|111]" listing the indicator rows.
std::string realization_tag(const IndicatorMatrix& P);

}  // namespace aoismpc
