#include "aoismpc/model.hpp"

#include <cmath>
#include <string>

#include "aoismpc/errors.hpp"

namespace aoismpc {
namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kPsdTol = -1e-10;

std::string shape(Eigen::Index r, Eigen::Index c) {
    return std::to_string(r) + "x" + std::to_string(c);
}

void require_shape(const MatrixXd& m, Eigen::Index rows, Eigen::Index cols, const std::string& name) {
    if (m.rows() != rows || m.cols() != cols) {
        throw DimensionMismatch(name, shape(rows, cols), shape(m.rows(), m.cols()));
    }
    if (!m.allFinite()) {
        throw DimensionMismatch(name, "finite entries", "non-finite entry");
    }
}

void require_psd(const MatrixXd& m, const std::string& name) {
    double eig = 0.0;
    if (!is_psd(m, &eig)) {
        throw NotPsd(name, eig);
    }
}

template <typename T>
void broadcast(std::vector<T>& list, std::size_t n, const std::string& name) {
    if (list.size() == 1 && n > 1) {
        list.assign(n, list.front());
    }
    if (list.size() != n) {
        throw DimensionMismatch(name, std::to_string(n) + " entries", std::to_string(list.size()));
    }
}

void check_polytope(const Polytope& p, int n, const std::string& name) {
    if (p.C.rows() < 1) {
        throw DimensionMismatch(name + ".C", "at least one half-space", "0");
    }
    require_shape(p.C, p.C.rows(), n, name + ".C");
    if (p.b.size() != p.C.rows()) {
        throw DimensionMismatch(name + ".b", std::to_string(p.C.rows()), std::to_string(p.b.size()));
    }
    for (Eigen::Index i = 0; i < p.C.rows(); ++i) {
        if (p.C.row(i).squaredNorm() == 0.0) {
            throw DimensionMismatch(name + ".C", "nonzero rows", "zero row " + std::to_string(i));
        }
    }
}

}  // namespace

MatrixXd DisturbanceModel::stacked() const {
    Eigen::Index n = 0;
    for (const auto& w : covariances) n += w.rows();
    MatrixXd out = MatrixXd::Zero(n, n);
    Eigen::Index off = 0;
    for (const auto& w : covariances) {
        out.block(off, off, w.rows(), w.cols()) = w;
        off += w.rows();
    }
    return out;
}

bool Polytope::contains(const VectorXd& x, double tol) const {
    return ((C * x - b).array() <= tol).all();
}

Polytope Polytope::box(const VectorXd& lo, const VectorXd& hi) {
    const auto n = lo.size();
    Polytope p;
    p.C = MatrixXd::Zero(2 * n, n);
    p.b = VectorXd::Zero(2 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        p.C(2 * i, i) = 1.0;
        p.b(2 * i) = hi(i);
        p.C(2 * i + 1, i) = -1.0;
        p.b(2 * i + 1) = -lo(i);
    }
    return p;
}

double min_eigenvalue(const MatrixXd& m) {
    if (m.size() == 0) return 0.0;
    const MatrixXd sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

bool is_psd(const MatrixXd& m, double* min_eig) {
    if (m.rows() != m.cols()) return false;
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale) {
        if (min_eig) *min_eig = std::nan("");
        return false;
    }
    const double eig = min_eigenvalue(m);
    if (min_eig) *min_eig = eig;
    return eig >= kPsdTol;
}

ValidatedProblem validate(const ProblemSpec& input) {
    ProblemSpec spec = input;
    const auto& plant = spec.plant;
    const int H = spec.horizon;
    if (H < 1) {
        throw DimensionMismatch("horizon", ">= 1", std::to_string(H));
    }
    const auto nx = plant.A.rows();
    if (nx < 1) throw DimensionMismatch("A", "nonempty square matrix", shape(plant.A.rows(), plant.A.cols()));
    require_shape(plant.A, nx, nx, "A");
    if (plant.B.cols() < 1) throw DimensionMismatch("B", "at least one column", "0");
    require_shape(plant.B, nx, plant.B.cols(), "B");
    if (plant.E.cols() < 1) throw DimensionMismatch("E", "at least one column", "0");
    require_shape(plant.E, nx, plant.E.cols(), "E");
    const auto nu = plant.B.cols();
    const auto nw = plant.E.cols();

    broadcast(spec.disturbance.covariances, H, "disturbance.covariances");
    for (int k = 0; k < H; ++k) {
        const std::string name = "W_" + std::to_string(k);
        require_shape(spec.disturbance.covariances[k], nw, nw, name);
        require_psd(spec.disturbance.covariances[k], name);
    }

    if (spec.x0.size() != nx) {
        throw DimensionMismatch("x0", std::to_string(nx), std::to_string(spec.x0.size()));
    }
    if (!spec.x0.allFinite()) throw DimensionMismatch("x0", "finite entries", "non-finite entry");

    broadcast(spec.state_sets, H + 1, "state_sets");
    for (int k = 0; k <= H; ++k) {
        check_polytope(spec.state_sets[k], static_cast<int>(nx), "X_" + std::to_string(k));
    }
    check_polytope(spec.input_set, static_cast<int>(nu), "U");

    if (!(spec.delta_x > 0.0 && spec.delta_x < 1.0)) {
        throw RiskOutOfRange("delta_x must lie in (0,1), got " + std::to_string(spec.delta_x));
    }
    if (!(spec.delta_u > 0.0 && spec.delta_u < 1.0)) {
        throw RiskOutOfRange("delta_u must lie in (0,1), got " + std::to_string(spec.delta_u));
    }

    broadcast(spec.weights.Q, H + 1, "weights.Q");
    broadcast(spec.weights.R, H, "weights.R");
    for (int k = 0; k <= H; ++k) {
        const std::string name = "Q_" + std::to_string(k);
        require_shape(spec.weights.Q[k], nx, nx, name);
        require_psd(spec.weights.Q[k], name);
    }
    for (int k = 0; k < H; ++k) {
        const std::string name = "R_" + std::to_string(k);
        require_shape(spec.weights.R[k], nu, nu, name);
        require_psd(spec.weights.R[k], name);
    }
    if (!(spec.weights.S >= 0.0) || !std::isfinite(spec.weights.S)) {
        throw NotPsd("S_weight", spec.weights.S);
    }

    if (!spec.state_sets[0].contains(spec.x0, 1e-12)) {
        throw DimensionMismatch("x0", "x0 inside X_0", "x0 outside X_0");
    }

    Dimensions dims{static_cast<int>(nx), static_cast<int>(nu), static_cast<int>(nw), H};
    return ValidatedProblem(std::move(spec), dims);
}

ValidatedProblem validate(const ValidatedProblem& problem) { return validate(problem.spec()); }

bool same_matrix(const MatrixXd& a, const MatrixXd& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

namespace {

bool same_list(const std::vector<MatrixXd>& a, const std::vector<MatrixXd>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!same_matrix(a[i], b[i])) return false;
    }
    return true;
}

}  // namespace

bool operator==(const Polytope& a, const Polytope& b) {
    return same_matrix(a.C, b.C) && same_matrix(a.b, b.b);
}

bool operator==(const ProblemSpec& a, const ProblemSpec& b) {
    return same_matrix(a.plant.A, b.plant.A) && same_matrix(a.plant.B, b.plant.B) &&
           same_matrix(a.plant.E, b.plant.E) &&
           same_list(a.disturbance.covariances, b.disturbance.covariances) &&
           a.horizon == b.horizon && same_matrix(a.x0, b.x0) && a.state_sets == b.state_sets &&
           a.input_set == b.input_set && a.delta_x == b.delta_x && a.delta_u == b.delta_u &&
           same_list(a.weights.Q, b.weights.Q) && same_list(a.weights.R, b.weights.R) &&
           a.weights.S == b.weights.S;
}

}  // namespace aoismpc
