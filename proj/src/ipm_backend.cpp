// Dense primal-dual interior-point method for
//
//   minimize c^T y  s.t.  S_b = F_b0 + sum_j y_j F_bj >= 0   (PSD blocks)
//                         s_i = a_i0 + sum_j y_j a_ij >= 0  (linear rows)
//
// with dual  maximize -<F0, X>  s.t.  <F_j, X> = c_j,  X >= 0.
// Infeasible start, HKM search direction, Mehrotra predictor-corrector.

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>

#include "aoismpc/conic.hpp"
#include "aoismpc/model.hpp"

namespace aoismpc {
namespace {

struct DenseBlock {
    std::string name;
    MatrixXd F0;
    std::vector<int> vars;  // reduced variable indices
    std::vector<MatrixXd> F;
};

struct LinearRow {
    std::string name;
    double a0 = 0.0;
    std::vector<std::pair<int, double>> terms;
    bool artificial = false;  // box bound added by the backend
};

struct StandardForm {
    int n = 0;
    VectorXd c;
    std::vector<DenseBlock> blocks;
    std::vector<LinearRow> rows;
};

struct CoreResult {
    VectorXd y;
    bool converged = false;
    int iterations = 0;
    double pinf = 0.0;
    double dinf = 0.0;
    double gap = 0.0;
    VectorXd row_duals;
    // iterate with the smallest max(pinf, dinf, gap)
    VectorXd best_y;
    double best_merit = std::numeric_limits<double>::infinity();
    double best_dual_objective = 0.0;
};

// Drops rows/columns that vanish in F0 and every coefficient.
DenseBlock prune_block(DenseBlock b) {
    const auto d = b.F0.rows();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < d; ++i) {
        bool zero = b.F0.row(i).isZero(0.0);
        for (const auto& F : b.F) zero = zero && F.row(i).isZero(0.0);
        if (!zero) keep.push_back(i);
    }
    if (static_cast<Eigen::Index>(keep.size()) == d) return b;
    auto select = [&](const MatrixXd& m) {
        MatrixXd out(keep.size(), keep.size());
        for (std::size_t i = 0; i < keep.size(); ++i) {
            for (std::size_t j = 0; j < keep.size(); ++j) out(i, j) = m(keep[i], keep[j]);
        }
        return out;
    };
    b.F0 = select(b.F0);
    for (auto& F : b.F) F = select(F);
    return b;
}

// Arrow matrix [[t, y^T], [y, t I]] is PSD iff t >= ||y||.
DenseBlock arrow_block(const SocBlock& soc, std::vector<std::pair<int, MatrixXd>>& terms_out) {
    const int m = soc.dim();
    auto arrow = [m](double t, const VectorXd& y) {
        MatrixXd a = MatrixXd::Zero(m + 1, m + 1);
        a(0, 0) = t;
        a.block(1, 1, m, m).diagonal().setConstant(t);
        a.block(1, 0, m, 1) = y;
        a.block(0, 1, 1, m) = y.transpose();
        return a;
    };
    DenseBlock b;
    b.name = soc.name;
    b.F0 = arrow(soc.t0, soc.y0);
    std::map<int, MatrixXd> acc;
    for (const auto& [v, a] : soc.t_terms) {
        auto [it, ins] = acc.try_emplace(v, MatrixXd::Zero(m + 1, m + 1));
        it->second += arrow(a, VectorXd::Zero(m));
    }
    for (const auto& [v, y] : soc.y_terms) {
        auto [it, ins] = acc.try_emplace(v, MatrixXd::Zero(m + 1, m + 1));
        it->second += arrow(0.0, y);
    }
    for (auto& [v, F] : acc) terms_out.emplace_back(v, std::move(F));
    return b;
}

struct Reduction {
    std::vector<int> kept;  // original indices of reduced variables
    std::vector<int> to_reduced;
    MatrixXd A;             // column v: every coefficient of variable v, plus its cost
};

// Picks a maximal linearly independent set of variables (pivoted QR on the
// coefficient columns). Dropped variables are fixed at zero during the solve.
Reduction reduce_variables(const ConicProblem& p, const std::vector<DenseBlock>& blocks,
                           const std::vector<std::vector<std::pair<int, MatrixXd>>>& block_terms,
                           const std::vector<LinearRow>& rows) {
    const int n = p.num_vars();
    Eigen::Index m = 1;
    for (const auto& b : blocks) m += b.F0.rows() * (b.F0.rows() + 1) / 2;
    m += static_cast<Eigen::Index>(rows.size());
    Reduction red;
    red.A = MatrixXd::Zero(m, n);
    red.A.row(0) = p.objective.transpose();
    Eigen::Index off = 1;
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
        const auto d = blocks[bi].F0.rows();
        for (const auto& [v, F] : block_terms[bi]) {
            Eigen::Index k = off;
            for (Eigen::Index i = 0; i < d; ++i) {
                for (Eigen::Index j = 0; j <= i; ++j) red.A(k++, v) += F(i, j);
            }
        }
        off += d * (d + 1) / 2;
    }
    for (const auto& r : rows) {
        for (const auto& [v, a] : r.terms) red.A(off, v) += a;
        ++off;
    }

    red.to_reduced.assign(static_cast<std::size_t>(n), -1);
    if (n == 0) return red;
    // column scaling so that the rank decision is scale free
    VectorXd norms = red.A.colwise().norm().transpose();
    MatrixXd scaled = red.A;
    for (int v = 0; v < n; ++v) {
        if (norms(v) > 0.0) scaled.col(v) /= norms(v);
    }
    Eigen::ColPivHouseholderQR<MatrixXd> qr(scaled);
    qr.setThreshold(1e-10);
    const auto rank = qr.rank();
    for (Eigen::Index i = 0; i < rank; ++i) {
        const int v = qr.colsPermutation().indices()(i);
        if (norms(v) > 0.0) red.kept.push_back(v);
    }
    std::sort(red.kept.begin(), red.kept.end());
    for (std::size_t i = 0; i < red.kept.size(); ++i) red.to_reduced[static_cast<std::size_t>(red.kept[i])] = static_cast<int>(i);
    return red;
}

double frob(const MatrixXd& m) { return m.norm(); }

// Largest step alpha with X + alpha dX >= 0 (infinity when unbounded).
double max_step(const MatrixXd& X, const MatrixXd& dX) {
    Eigen::LLT<MatrixXd> llt(X);
    if (llt.info() != Eigen::Success) return 0.0;
    const MatrixXd L = llt.matrixL();
    MatrixXd tmp = L.triangularView<Eigen::Lower>().solve(dX);
    MatrixXd M = L.triangularView<Eigen::Lower>().solve(tmp.transpose()).transpose();
    M = 0.5 * (M + M.transpose());
    const double lmin = Eigen::SelfAdjointEigenSolver<MatrixXd>(M, Eigen::EigenvaluesOnly).eigenvalues()(0);
    return lmin >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

MatrixXd eval_block(const DenseBlock& b, const VectorXd& y) {
    MatrixXd S = b.F0;
    for (std::size_t k = 0; k < b.vars.size(); ++k) S += y(b.vars[k]) * b.F[k];
    return S;
}

double eval_row(const LinearRow& r, const VectorXd& y) {
    double s = r.a0;
    for (const auto& [v, a] : r.terms) s += a * y(v);
    return s;
}

CoreResult run_ipm(const StandardForm& sf, const SolverSettings& settings) {
    const int n = sf.n;
    const auto nb = sf.blocks.size();
    const auto nr = sf.rows.size();
    CoreResult res;
    res.y = VectorXd::Zero(n);

    std::vector<MatrixXd> X(nb), S(nb);
    VectorXd x(nr), s(nr);
    double total_dim = static_cast<double>(nr);
    double scale_F0 = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
        const auto& blk = sf.blocks[b];
        const double d = static_cast<double>(blk.F0.rows());
        total_dim += d;
        double fmax = frob(blk.F0);
        double ratio = 0.0;
        for (std::size_t k = 0; k < blk.vars.size(); ++k) {
            const double fn = frob(blk.F[k]);
            fmax = std::max(fmax, fn);
            ratio = std::max(ratio, (1.0 + std::abs(sf.c(blk.vars[k]))) / (1.0 + fn));
        }
        const double xi = std::max({10.0, std::sqrt(d), d * ratio});
        const double eta = std::max({10.0, std::sqrt(d), fmax});
        X[b] = xi * MatrixXd::Identity(blk.F0.rows(), blk.F0.rows());
        S[b] = eta * MatrixXd::Identity(blk.F0.rows(), blk.F0.rows());
        scale_F0 += blk.F0.squaredNorm();
    }
    for (std::size_t i = 0; i < nr; ++i) {
        const auto& r = sf.rows[i];
        double amax = std::abs(r.a0);
        double ratio = 0.0;
        for (const auto& [v, a] : r.terms) {
            amax = std::max(amax, std::abs(a));
            ratio = std::max(ratio, (1.0 + std::abs(sf.c(v))) / (1.0 + std::abs(a)));
        }
        x(i) = std::max(10.0, ratio);
        s(i) = std::max(10.0, amax);
        scale_F0 += r.a0 * r.a0;
    }
    scale_F0 = 1.0 + std::sqrt(scale_F0);
    const double scale_c = 1.0 + sf.c.norm();

    std::vector<MatrixXd> Rp(nb), Sinv(nb);
    VectorXd rp(nr);
    VectorXd rd(n);
    int stalls = 0;

    for (int iter = 0; iter < settings.max_iter; ++iter) {
        res.iterations = iter;
        // residuals
        double pinf2 = 0.0;
        rd = -sf.c;
        double gap = 0.0;
        double dobj = 0.0;
        for (std::size_t b = 0; b < nb; ++b) {
            const auto& blk = sf.blocks[b];
            Rp[b] = eval_block(blk, res.y) - S[b];
            pinf2 += Rp[b].squaredNorm();
            for (std::size_t k = 0; k < blk.vars.size(); ++k) rd(blk.vars[k]) += blk.F[k].cwiseProduct(X[b]).sum();
            gap += S[b].cwiseProduct(X[b]).sum();
            dobj -= blk.F0.cwiseProduct(X[b]).sum();
        }
        for (std::size_t i = 0; i < nr; ++i) {
            const auto& r = sf.rows[i];
            rp(i) = eval_row(r, res.y) - s(i);
            pinf2 += rp(i) * rp(i);
            for (const auto& [v, a] : r.terms) rd(v) += a * x(i);
            gap += s(i) * x(i);
            dobj -= r.a0 * x(i);
        }
        const double pobj = sf.c.dot(res.y);
        res.pinf = std::sqrt(pinf2) / scale_F0;
        res.dinf = rd.norm() / scale_c;
        res.gap = gap / (1.0 + std::abs(pobj) + std::abs(dobj));
        if (settings.verbose) {
            std::cerr << "ipm " << iter << " pobj " << pobj << " dobj " << dobj << " pinf " << res.pinf
                      << " dinf " << res.dinf << " gap " << res.gap << '\n';
        }
        const double merit = std::max({res.pinf, res.dinf, res.gap});
        if (merit < res.best_merit) {
            res.best_merit = merit;
            res.best_y = res.y;
            res.best_dual_objective = dobj;
        }
        if (merit <= settings.tol) {
            res.converged = true;
            break;
        }
        const double mu = gap / total_dim;

        // Schur complement matrix
        MatrixXd G = MatrixXd::Zero(n, n);
        std::vector<std::vector<MatrixXd>> T(nb);
        bool factor_ok = true;
        for (std::size_t b = 0; b < nb; ++b) {
            const auto& blk = sf.blocks[b];
            Eigen::LLT<MatrixXd> llt(S[b]);
            if (llt.info() != Eigen::Success) {
                factor_ok = false;
                break;
            }
            Sinv[b] = llt.solve(MatrixXd::Identity(S[b].rows(), S[b].cols()));
            T[b].resize(blk.vars.size());
            for (std::size_t k = 0; k < blk.vars.size(); ++k) T[b][k] = X[b] * blk.F[k] * Sinv[b];
            for (std::size_t i = 0; i < blk.vars.size(); ++i) {
                for (std::size_t j = i; j < blk.vars.size(); ++j) {
                    const double g = blk.F[i].cwiseProduct(T[b][j]).sum();
                    G(blk.vars[i], blk.vars[j]) += g;
                    if (i != j) G(blk.vars[j], blk.vars[i]) += g;
                }
            }
        }
        if (!factor_ok) break;
        for (std::size_t i = 0; i < nr; ++i) {
            const double w = x(i) / s(i);
            for (const auto& [u, au] : sf.rows[i].terms) {
                for (const auto& [v, av] : sf.rows[i].terms) G(u, v) += w * au * av;
            }
        }
        G = 0.5 * (G + G.transpose());
        Eigen::LLT<MatrixXd> gfac(G);
        if (gfac.info() != Eigen::Success) {
            const double ridge = 1e-14 * std::max(1.0, G.diagonal().cwiseAbs().maxCoeff());
            gfac.compute(G + ridge * MatrixXd::Identity(n, n));
            if (gfac.info() != Eigen::Success) break;
        }

        struct Direction {
            VectorXd dy;
            std::vector<MatrixXd> dS, dX;
            VectorXd ds, dx;
        };
        auto direction = [&](double target, const Direction* corr) {
            Direction d;
            VectorXd rhs = rd;
            std::vector<MatrixXd> Y(nb);
            for (std::size_t b = 0; b < nb; ++b) {
                MatrixXd inner = target * MatrixXd::Identity(S[b].rows(), S[b].cols()) - X[b] * Rp[b];
                if (corr) inner -= corr->dX[b] * corr->dS[b];
                Y[b] = inner * Sinv[b] - X[b];
                const auto& blk = sf.blocks[b];
                for (std::size_t k = 0; k < blk.vars.size(); ++k) rhs(blk.vars[k]) += blk.F[k].cwiseProduct(Y[b]).sum();
            }
            VectorXd ylin(nr);
            for (std::size_t i = 0; i < nr; ++i) {
                double inner = target - x(i) * rp(i);
                if (corr) inner -= corr->dx(i) * corr->ds(i);
                ylin(i) = inner / s(i) - x(i);
                for (const auto& [v, a] : sf.rows[i].terms) rhs(v) += a * ylin(i);
            }
            d.dy = gfac.solve(rhs);
            d.dS.resize(nb);
            d.dX.resize(nb);
            for (std::size_t b = 0; b < nb; ++b) {
                const auto& blk = sf.blocks[b];
                d.dS[b] = Rp[b];
                for (std::size_t k = 0; k < blk.vars.size(); ++k) d.dS[b] += d.dy(blk.vars[k]) * blk.F[k];
                MatrixXd dX = Y[b] + X[b] * Rp[b] * Sinv[b] - X[b] * d.dS[b] * Sinv[b];
                d.dX[b] = 0.5 * (dX + dX.transpose());
            }
            d.ds.resize(nr);
            d.dx.resize(nr);
            for (std::size_t i = 0; i < nr; ++i) {
                d.ds(i) = rp(i) + eval_row(sf.rows[i], d.dy) - sf.rows[i].a0;
                d.dx(i) = ylin(i) + x(i) * rp(i) / s(i) - x(i) * d.ds(i) / s(i);
            }
            return d;
        };
        auto steps = [&](const Direction& d) {
            double ap = std::numeric_limits<double>::infinity();
            double ad = ap;
            for (std::size_t b = 0; b < nb; ++b) {
                ap = std::min(ap, max_step(S[b], d.dS[b]));
                ad = std::min(ad, max_step(X[b], d.dX[b]));
            }
            for (std::size_t i = 0; i < nr; ++i) {
                if (d.ds(i) < 0.0) ap = std::min(ap, -s(i) / d.ds(i));
                if (d.dx(i) < 0.0) ad = std::min(ad, -x(i) / d.dx(i));
            }
            return std::pair{ap, ad};
        };

        const Direction pred = direction(0.0, nullptr);
        auto [ap_a, ad_a] = steps(pred);
        ap_a = std::min(1.0, ap_a);
        ad_a = std::min(1.0, ad_a);
        double gap_aff = 0.0;
        for (std::size_t b = 0; b < nb; ++b) {
            gap_aff += (S[b] + ap_a * pred.dS[b]).cwiseProduct(X[b] + ad_a * pred.dX[b]).sum();
        }
        for (std::size_t i = 0; i < nr; ++i) gap_aff += (s(i) + ap_a * pred.ds(i)) * (x(i) + ad_a * pred.dx(i));
        const double sigma = std::clamp(std::pow(std::max(gap_aff, 0.0) / gap, 3.0), 0.0, 1.0);

        Direction corrected = direction(sigma * mu, &pred);
        auto [ap, ad] = steps(corrected);
        constexpr double kFraction = 0.95;
        ap = std::min(1.0, kFraction * ap);
        ad = std::min(1.0, kFraction * ad);

        res.y += ap * corrected.dy;
        for (std::size_t b = 0; b < nb; ++b) {
            S[b] += ap * corrected.dS[b];
            X[b] += ad * corrected.dX[b];
            S[b] = 0.5 * (S[b] + S[b].transpose());
            X[b] = 0.5 * (X[b] + X[b].transpose());
        }
        s += ap * corrected.ds;
        x += ad * corrected.dx;

        stalls = (ap < 1e-8 && ad < 1e-8) ? stalls + 1 : 0;
        if (stalls >= 3) break;
        if (!res.y.allFinite()) break;
    }
    res.row_duals = x;
    return res;
}

StandardForm build_standard_form(const ConicProblem& p, const Reduction& red,
                                 const std::vector<DenseBlock>& blocks,
                                 const std::vector<std::vector<std::pair<int, MatrixXd>>>& block_terms,
                                 const std::vector<LinearRow>& rows, double bound) {
    StandardForm sf;
    sf.n = static_cast<int>(red.kept.size());
    sf.c.resize(sf.n);
    for (int i = 0; i < sf.n; ++i) sf.c(i) = p.objective(red.kept[static_cast<std::size_t>(i)]);
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
        DenseBlock b;
        b.name = blocks[bi].name;
        b.F0 = blocks[bi].F0;
        for (const auto& [v, F] : block_terms[bi]) {
            const int rv = red.to_reduced[static_cast<std::size_t>(v)];
            if (rv < 0) continue;
            b.vars.push_back(rv);
            b.F.push_back(F);
        }
        b = prune_block(std::move(b));
        if (b.F0.rows() > 0) sf.blocks.push_back(std::move(b));
    }
    for (const auto& r : rows) {
        LinearRow out{r.name, r.a0, {}, r.artificial};
        for (const auto& [v, a] : r.terms) {
            const int rv = red.to_reduced[static_cast<std::size_t>(v)];
            if (rv >= 0) out.terms.emplace_back(rv, a);
        }
        sf.rows.push_back(std::move(out));
    }
    for (int i = 0; i < sf.n; ++i) {
        sf.rows.push_back({"lower", bound, {{i, 1.0}}, true});
        sf.rows.push_back({"upper", bound, {{i, -1.0}}, true});
    }
    return sf;
}

// min t  s.t.  every original cone shifted by t I is PSD, t >= -1.
StandardForm phase_one(const StandardForm& sf) {
    StandardForm ph;
    ph.n = sf.n + 1;
    const int t = sf.n;
    ph.c = VectorXd::Zero(ph.n);
    ph.c(t) = 1.0;
    for (const auto& b : sf.blocks) {
        DenseBlock nb = b;
        nb.vars.push_back(t);
        nb.F.push_back(MatrixXd::Identity(b.F0.rows(), b.F0.cols()));
        ph.blocks.push_back(std::move(nb));
    }
    for (const auto& r : sf.rows) {
        LinearRow nr = r;
        if (!r.artificial) nr.terms.emplace_back(t, 1.0);
        ph.rows.push_back(std::move(nr));
    }
    ph.rows.push_back({"t-lower", 1.0, {{t, 1.0}}, true});
    return ph;
}

}  // namespace

Solution InteriorPointBackend::solve(const ConicProblem& problem, const SolverSettings& settings) const {
    const int n = problem.num_vars();
    Solution sol;
    sol.values = VectorXd::Zero(n);

    std::vector<DenseBlock> blocks;
    std::vector<std::vector<std::pair<int, MatrixXd>>> block_terms;
    for (const auto& b : problem.psd_blocks) {
        blocks.push_back({b.name, b.F0, {}, {}});
        block_terms.push_back(b.terms);
    }
    for (const auto& soc : problem.soc_blocks) {
        std::vector<std::pair<int, MatrixXd>> terms;
        blocks.push_back(arrow_block(soc, terms));
        block_terms.push_back(std::move(terms));
    }
    std::vector<LinearRow> rows;
    for (const auto& r : problem.nonneg) rows.push_back({r.name, r.a0, r.terms, false});

    const Reduction red = reduce_variables(problem, blocks, block_terms, rows);
    const StandardForm sf = build_standard_form(problem, red, blocks, block_terms, rows, settings.variable_bound);

    auto expand = [&](const VectorXd& y) {
        VectorXd z = VectorXd::Zero(n);
        for (std::size_t i = 0; i < red.kept.size(); ++i) z(red.kept[i]) = y(static_cast<Eigen::Index>(i));
        if (n == 0) return z;
        // minimum-norm representative with the same coefficients and cost
        Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(red.A);
        VectorXd zmn = cod.solve(red.A * z);
        return ((red.A * zmn - red.A * z).norm() <= 1e-12 * (1.0 + (red.A * z).norm())) ? zmn : z;
    };

    CoreResult core = run_ipm(sf, settings);
    sol.iterations = core.iterations;
    sol.primal_infeasibility = core.pinf;
    sol.dual_infeasibility = core.dinf;
    sol.duality_gap = core.gap;

    if (core.converged) {
        double worst_bound = 0.0;
        for (std::size_t i = 0; i < sf.rows.size(); ++i) {
            if (sf.rows[i].artificial) worst_bound = std::max(worst_bound, core.row_duals(static_cast<Eigen::Index>(i)));
        }
        sol.values = expand(core.y);
        sol.objective = problem.objective.dot(sol.values);
        const bool bound_binding = worst_bound > 1e-6 * (1.0 + sf.c.norm());
        sol.status = bound_binding ? SolveStatus::NumericalFailure : SolveStatus::Optimal;
        return sol;
    }

    // classify the failure with a phase-one solve
    const StandardForm ph = phase_one(sf);
    SolverSettings ph_settings = settings;
    ph_settings.verbose = settings.verbose;
    CoreResult pc = run_ipm(ph, ph_settings);
    // Phase one only has to show t* > 0, so a loosely converged iterate suffices;
    // the dual objective is then a lower bound on t*.
    constexpr double kPhaseOneTol = 1e-6;
    const bool certified = pc.best_merit <= std::max(settings.tol, kPhaseOneTol) && pc.best_y.size() > 0;
    const VectorXd& yp = certified ? pc.best_y : pc.y;
    const double t = yp.size() > 0 ? yp(sf.n) : 0.0;
    VectorXd yfeas = yp.head(sf.n);
    sol.values = expand(yfeas);
    sol.objective = problem.objective.dot(sol.values);
    if (certified && t > 10.0 * settings.tol && pc.best_dual_objective > 10.0 * settings.tol) {
        sol.status = SolveStatus::Infeasible;
        double worst = std::numeric_limits<double>::infinity();
        for (const auto& b : sf.blocks) {
            const double e = min_eigenvalue(eval_block(b, yfeas));
            if (e < worst) {
                worst = e;
                sol.violated_block = b.name;
            }
        }
        for (const auto& r : sf.rows) {
            if (r.artificial) continue;
            const double e = eval_row(r, yfeas);
            if (e < worst) {
                worst = e;
                sol.violated_block = r.name;
            }
        }
        sol.min_block_eigenvalue = worst;
    } else {
        sol.status = SolveStatus::NumericalFailure;
    }
    return sol;
}

}  // namespace aoismpc
