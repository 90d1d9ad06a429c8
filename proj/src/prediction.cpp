#include "aoismpc/prediction.hpp"

#include <vector>

#include "aoismpc/errors.hpp"

namespace aoismpc {

StackedSystem build_stacked(const LinearPlant& plant, const DisturbanceModel& disturbance, int H) {
    if (H < 1) throw DimensionMismatch("horizon", ">= 1", std::to_string(H));
    StackedSystem ss;
    ss.nx = plant.nx();
    ss.nu = plant.nu();
    ss.nw = plant.nw();
    ss.H = H;
    const int nx = ss.nx;

    std::vector<MatrixXd> powers{MatrixXd::Identity(nx, nx)};
    for (int k = 1; k <= H; ++k) powers.push_back(plant.A * powers.back());

    ss.bigA.resize((H + 1) * nx, nx);
    for (int k = 0; k <= H; ++k) ss.bigA.middleRows(k * nx, nx) = powers[static_cast<std::size_t>(k)];

    ss.bigC = MatrixXd::Zero((H + 1) * nx, H * nx);
    for (int i = 1; i <= H; ++i) {
        for (int j = 0; j < i; ++j) {
            ss.bigC.block(i * nx, j * nx, nx, nx) = powers[static_cast<std::size_t>(i - j - 1)];
        }
    }

    MatrixXd blkB = MatrixXd::Zero(H * nx, H * ss.nu);
    MatrixXd blkE = MatrixXd::Zero(H * nx, H * ss.nw);
    for (int k = 0; k < H; ++k) {
        blkB.block(k * nx, k * ss.nu, nx, ss.nu) = plant.B;
        blkE.block(k * nx, k * ss.nw, nx, ss.nw) = plant.E;
    }
    ss.bigB = ss.bigC * blkB;
    ss.bigE = ss.bigC * blkE;

    if (static_cast<int>(disturbance.covariances.size()) != H) {
        throw DimensionMismatch("disturbance.covariances", std::to_string(H),
                                std::to_string(disturbance.covariances.size()));
    }
    ss.bigW = disturbance.stacked();
    return ss;
}

VectorXd stacked_trajectory(const StackedSystem& ss, const VectorXd& x0, const VectorXd& u, const VectorXd& w) {
    if (x0.size() != ss.nx) throw DimensionMismatch("x0", std::to_string(ss.nx), std::to_string(x0.size()));
    if (u.size() != ss.H * ss.nu) {
        throw DimensionMismatch("u", std::to_string(ss.H * ss.nu), std::to_string(u.size()));
    }
    if (w.size() != ss.H * ss.nw) {
        throw DimensionMismatch("w", std::to_string(ss.H * ss.nw), std::to_string(w.size()));
    }
    VectorXd x = ss.bigA * x0 + ss.bigB * u + ss.bigE * w;
    x.head(ss.nx) = x0;
    return x;
}

MatrixXd FeedbackPolicy::block(int k, int r) const {
    const int nu = support_mask.nu();
    const int nw = support_mask.nw();
    return M.block(k * nu, r * nw, nu, nw);
}

MatrixXd FeedbackPolicy::V_row(int k) const {
    const int nu = support_mask.nu();
    return V.middleRows(k * nu, nu);
}

bool FeedbackPolicy::respects_mask() const {
    const MatrixXd outside = (1.0 - support_mask.expand().array()).matrix();
    return (outside.array() * M.array() == 0.0).all();
}

MatrixXd masked_feedback(const MatrixXd& M, const IndicatorMatrix& P) {
    const MatrixXd mask = P.expand();
    if (mask.rows() != M.rows() || mask.cols() != M.cols()) {
        throw DimensionMismatch("P", std::to_string(M.rows()) + "x" + std::to_string(M.cols()),
                                std::to_string(mask.rows()) + "x" + std::to_string(mask.cols()));
    }
    return (mask.array() * M.array()).matrix();
}

ClosedLoop close_loop(const StackedSystem& ss, const FeedbackPolicy& policy, const IndicatorMatrix& P) {
    if (policy.V.rows() != ss.H * ss.nu || policy.V.cols() != ss.nx) {
        throw DimensionMismatch("V", std::to_string(ss.H * ss.nu) + "x" + std::to_string(ss.nx),
                                std::to_string(policy.V.rows()) + "x" + std::to_string(policy.V.cols()));
    }
    const IndicatorMatrix mask = P.with_block_dims(ss.nu, ss.nw);
    ClosedLoop cl;
    cl.calA = ss.bigA + ss.bigB * policy.V;
    cl.scrE = ss.bigE + ss.bigB * masked_feedback(policy.M, mask);
    cl.realization_tag = realization_tag(P);
    return cl;
}

TrajectoryMoments trajectory_moments(const ClosedLoop& cl, const MatrixXd& bigW, const VectorXd& x0) {
    return {cl.calA * x0, cl.scrE * bigW * cl.scrE.transpose()};
}

VectorXd nominal_state(const LinearPlant& plant, const VectorXd& x_l, std::span<const VectorXd> inputs) {
    VectorXd x = x_l;
    for (const auto& u : inputs) x = plant.A * x + plant.B * u;
    return x;
}

std::string realization_tag(const IndicatorMatrix& P) {
    std::string tag = "P[";
    for (int k = 1; k < P.horizon(); ++k) {
        if (k > 1) tag += '|';
        for (int r = 0; r < k; ++r) tag += P.bit(k, r) ? '1' : '0';
    }
    tag += ']';
    return tag;
}

}  // namespace aoismpc
