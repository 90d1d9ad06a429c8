#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "aoismpc/affine.hpp"

namespace aoismpc {

/// F0 + sum_v z_v F_v >= 0 (PSD), all matrices symmetric of equal size.
struct LmiBlock {
    std::string name;
    MatrixXd F0;
    std::vector<std::pair<int, MatrixXd>> terms;

    int dim() const { return static_cast<int>(F0.rows()); }
    MatrixXd evaluate(const VectorXd& z) const;

    /// Symmetric affine matrix to block; terms with zero coefficients are skipped.
    static LmiBlock from_affine(std::string name, const AffineMatrix& m);
};

/// t(z) >= ||y(z)||_2 with t and y affine.
struct SocBlock {
    std::string name;
    double t0 = 0.0;
    VectorXd y0;
    std::vector<std::pair<int, double>> t_terms;
    std::vector<std::pair<int, VectorXd>> y_terms;

    int dim() const { return static_cast<int>(y0.size()); }
    double t(const VectorXd& z) const;
    VectorXd y(const VectorXd& z) const;
};

/// a0 + sum_v a_v z_v >= 0
struct LinearInequality {
    std::string name;
    double a0 = 0.0;
    std::vector<std::pair<int, double>> terms;

    double evaluate(const VectorXd& z) const;
};

enum class VarKind { V, M, S, Epigraph };

/// Where a scalar decision variable comes from. For V and M: (row, col) of the
/// stacked matrix; for S: (row, col) with row <= col.
struct VariableOrigin {
    VarKind kind = VarKind::V;
    int row = 0;
    int col = 0;

    std::string label() const;
    bool operator==(const VariableOrigin&) const = default;
};

/// minimize c^T z subject to PSD, SOC and nonnegativity blocks.
struct ConicProblem {
    std::vector<VariableOrigin> variables;
    VectorXd objective;
    std::vector<LmiBlock> psd_blocks;
    std::vector<SocBlock> soc_blocks;
    std::vector<LinearInequality> nonneg;

    int num_vars() const { return static_cast<int>(variables.size()); }
    /// Throws std::invalid_argument if a term addresses a missing variable or a
    /// PSD matrix is not symmetric.
    void check() const;
};

enum class SolveStatus { Optimal, Infeasible, NumericalFailure };

std::string to_string(SolveStatus s);

struct Solution {
    VectorXd values;
    double objective = 0.0;
    SolveStatus status = SolveStatus::NumericalFailure;
    int iterations = 0;
    double primal_infeasibility = 0.0;
    double dual_infeasibility = 0.0;
    double duality_gap = 0.0;
    double min_block_eigenvalue = 0.0;
    /// For Infeasible: the block with the most negative eigenvalue at the best point found.
    std::string violated_block;
};

struct SolverSettings {
    double tol = 1e-9;
    int max_iter = 200;
    /// Box |z_i| <= bound imposed on every kept variable.
    double variable_bound = 1e6;
    bool verbose = false;
};

struct BlockCheck {
    std::string name;
    double margin = 0.0;  // min eigenvalue, SOC slack t - ||y||, or linear value
    bool passed = false;
};

struct VerificationReport {
    bool passed = true;
    double worst_margin = 0.0;
    std::string worst_block;
    std::vector<BlockCheck> blocks;
};

/// Recomputes every block at solution.values; never looks at solution.status.
VerificationReport verify_solution(const ConicProblem& problem, const Solution& solution, double tol);

/// Any conic solver able to handle PSD, SOC and nonnegative cones.
class ConicBackend {
public:
    virtual ~ConicBackend() = default;
    virtual std::string name() const = 0;
    virtual Solution solve(const ConicProblem& problem, const SolverSettings& settings) const = 0;
};

/// Dense primal-dual interior-point method (HKM direction, Mehrotra correction).
/// Sized for small desk-scale problems.
class InteriorPointBackend final : public ConicBackend {
public:
    std::string name() const override { return "dense-ipm"; }
    Solution solve(const ConicProblem& problem, const SolverSettings& settings) const override;
};

/// Solves with the default backend and cross-checks Optimal results with verify_solution.
Solution solve(const ConicProblem& problem, const SolverSettings& settings = {});
Solution solve(const ConicProblem& problem, const SolverSettings& settings, const ConicBackend& backend);

/// Text interchange format, 17 significant digits; load(dump(p)) == p bit for bit.
void dump_problem(const ConicProblem& problem, std::ostream& out);
ConicProblem load_problem(std::istream& in);

bool operator==(const ConicProblem& a, const ConicProblem& b);

}  // namespace aoismpc
