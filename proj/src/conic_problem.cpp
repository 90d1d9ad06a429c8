#include "aoismpc/conic.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "aoismpc/model.hpp"

namespace aoismpc {

MatrixXd LmiBlock::evaluate(const VectorXd& z) const {
    MatrixXd out = F0;
    for (const auto& [v, F] : terms) out += z(v) * F;
    return out;
}

LmiBlock LmiBlock::from_affine(std::string name, const AffineMatrix& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("LmiBlock::from_affine: block must be square");
    LmiBlock block;
    block.name = std::move(name);
    block.F0 = 0.5 * (m.constant() + m.constant().transpose());
    for (const auto& [v, c] : m.coeffs()) {
        if (c.isZero(0.0)) continue;
        block.terms.emplace_back(v, 0.5 * (c + c.transpose()));
    }
    return block;
}

double SocBlock::t(const VectorXd& z) const {
    double out = t0;
    for (const auto& [v, a] : t_terms) out += a * z(v);
    return out;
}

VectorXd SocBlock::y(const VectorXd& z) const {
    VectorXd out = y0;
    for (const auto& [v, a] : y_terms) out += z(v) * a;
    return out;
}

double LinearInequality::evaluate(const VectorXd& z) const {
    double out = a0;
    for (const auto& [v, a] : terms) out += a * z(v);
    return out;
}

std::string VariableOrigin::label() const {
    const std::string idx = "(" + std::to_string(row) + "," + std::to_string(col) + ")";
    switch (kind) {
        case VarKind::V: return "V" + idx;
        case VarKind::M: return "M" + idx;
        case VarKind::S: return "S" + idx;
        case VarKind::Epigraph: return "tau";
    }
    return "?";
}

void ConicProblem::check() const {
    const int n = num_vars();
    if (objective.size() != n) throw std::invalid_argument("objective length differs from variable count");
    auto check_var = [&](int v, const std::string& block) {
        if (v < 0 || v >= n) throw std::invalid_argument("block " + block + " addresses variable " + std::to_string(v));
    };
    for (const auto& b : psd_blocks) {
        if (b.F0.rows() != b.F0.cols() || !(b.F0 - b.F0.transpose()).isZero(0.0)) {
            throw std::invalid_argument("block " + b.name + ": F0 not symmetric");
        }
        for (const auto& [v, F] : b.terms) {
            check_var(v, b.name);
            if (F.rows() != b.F0.rows() || F.cols() != b.F0.cols() || !(F - F.transpose()).isZero(0.0)) {
                throw std::invalid_argument("block " + b.name + ": coefficient not symmetric or wrong size");
            }
        }
    }
    for (const auto& b : soc_blocks) {
        for (const auto& [v, a] : b.t_terms) check_var(v, b.name);
        for (const auto& [v, a] : b.y_terms) {
            check_var(v, b.name);
            if (a.size() != b.y0.size()) throw std::invalid_argument("block " + b.name + ": y term size");
        }
    }
    for (const auto& b : nonneg) {
        for (const auto& [v, a] : b.terms) check_var(v, b.name);
    }
}

std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "Optimal";
        case SolveStatus::Infeasible: return "Infeasible";
        case SolveStatus::NumericalFailure: return "NumericalFailure";
    }
    return "?";
}

VerificationReport verify_solution(const ConicProblem& problem, const Solution& solution, double tol) {
    VerificationReport report;
    report.worst_margin = std::numeric_limits<double>::infinity();
    if (solution.values.size() != problem.num_vars()) {
        report.passed = false;
        report.worst_margin = -std::numeric_limits<double>::infinity();
        report.worst_block = "<values>";
        return report;
    }
    const VectorXd& z = solution.values;
    auto record = [&](const std::string& name, double margin) {
        const bool ok = margin >= -tol;
        report.blocks.push_back({name, margin, ok});
        report.passed = report.passed && ok;
        if (margin < report.worst_margin) {
            report.worst_margin = margin;
            report.worst_block = name;
        }
    };
    for (const auto& b : problem.psd_blocks) record(b.name, min_eigenvalue(b.evaluate(z)));
    for (const auto& b : problem.soc_blocks) record(b.name, b.t(z) - b.y(z).norm());
    for (const auto& b : problem.nonneg) record(b.name, b.evaluate(z));
    if (report.blocks.empty()) report.worst_margin = 0.0;
    return report;
}

Solution solve(const ConicProblem& problem, const SolverSettings& settings, const ConicBackend& backend) {
    problem.check();
    Solution sol = backend.solve(problem, settings);
    if (sol.status == SolveStatus::Optimal) {
        const auto report = verify_solution(problem, sol, std::max(settings.tol, 1e-8) * 10.0);
        sol.min_block_eigenvalue = report.worst_margin;
        if (!report.passed) sol.status = SolveStatus::NumericalFailure;
    }
    return sol;
}

Solution solve(const ConicProblem& problem, const SolverSettings& settings) {
    static const InteriorPointBackend backend;
    return solve(problem, settings, backend);
}

namespace {

bool same_terms(const std::vector<std::pair<int, MatrixXd>>& a, const std::vector<std::pair<int, MatrixXd>>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].first != b[i].first || !same_matrix(a[i].second, b[i].second)) return false;
    }
    return true;
}

}  // namespace

bool operator==(const ConicProblem& a, const ConicProblem& b) {
    if (a.variables != b.variables || !same_matrix(a.objective, b.objective)) return false;
    if (a.psd_blocks.size() != b.psd_blocks.size() || a.soc_blocks.size() != b.soc_blocks.size() ||
        a.nonneg.size() != b.nonneg.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.psd_blocks.size(); ++i) {
        const auto& x = a.psd_blocks[i];
        const auto& y = b.psd_blocks[i];
        if (x.name != y.name || !same_matrix(x.F0, y.F0) || !same_terms(x.terms, y.terms)) return false;
    }
    for (std::size_t i = 0; i < a.soc_blocks.size(); ++i) {
        const auto& x = a.soc_blocks[i];
        const auto& y = b.soc_blocks[i];
        if (x.name != y.name || x.t0 != y.t0 || !same_matrix(x.y0, y.y0) || x.t_terms != y.t_terms) return false;
        if (x.y_terms.size() != y.y_terms.size()) return false;
        for (std::size_t j = 0; j < x.y_terms.size(); ++j) {
            if (x.y_terms[j].first != y.y_terms[j].first || !same_matrix(x.y_terms[j].second, y.y_terms[j].second)) {
                return false;
            }
        }
    }
    for (std::size_t i = 0; i < a.nonneg.size(); ++i) {
        const auto& x = a.nonneg[i];
        const auto& y = b.nonneg[i];
        if (x.name != y.name || x.a0 != y.a0 || x.terms != y.terms) return false;
    }
    return true;
}

}  // namespace aoismpc
