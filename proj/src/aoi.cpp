#include "aoismpc/aoi.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "aoismpc/errors.hpp"

namespace aoismpc {
namespace {

constexpr double kStochasticTol = 1e-12;
constexpr int kMaxEnumerationHorizon = 12;

void check_probability(double q, const char* name) {
    if (!(q >= 0.0 && q <= 1.0)) {
        throw InvalidProbability(std::string(name) + " must lie in [0,1], got " + std::to_string(q));
    }
}

}  // namespace

AoiChain::AoiChain(MatrixXd transition, VectorXd mu0) : T_(std::move(transition)), mu0_(std::move(mu0)) {
    const auto n = T_.rows();
    if (n < 1 || T_.cols() != n) {
        throw InvalidChain("transition matrix must be square and nonempty");
    }
    if (mu0_.size() != n) {
        throw InvalidChain("mu0 has " + std::to_string(mu0_.size()) + " entries, expected " + std::to_string(n));
    }
    if (!T_.allFinite() || (T_.array() < 0.0).any()) {
        throw InvalidChain("transition entries must be finite and nonnegative");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::abs(T_.col(i).sum() - 1.0) > kStochasticTol) {
            throw InvalidChain("column " + std::to_string(i) + " of T does not sum to 1");
        }
        for (Eigen::Index j = i + 2; j < n; ++j) {
            if (T_(j, i) != 0.0) {
                throw InvalidChain("AoI may grow by at most one per step (T(" + std::to_string(j) + "," +
                                   std::to_string(i) + ") != 0)");
            }
        }
    }
    if (!mu0_.allFinite() || (mu0_.array() < 0.0).any() || std::abs(mu0_.sum() - 1.0) > kStochasticTol) {
        throw InvalidChain("mu0 must be a probability distribution");
    }
}

AoiChain one_link_chain(double q, int a_max) {
    check_probability(q, "q");
    if (a_max < 1) {
        throw InvalidChain("a_max must be >= 1");
    }
    const int n = a_max + 1;
    MatrixXd T = MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        T(0, i) += q;
        T(std::min(i + 1, a_max), i) += 1.0 - q;
    }
    VectorXd mu0 = VectorXd::Zero(n);
    mu0(0) = 1.0;
    return AoiChain(std::move(T), std::move(mu0));
}

VectorXd predict_distribution(const AoiChain& chain, int k) {
    if (k < 0) throw std::invalid_argument("predict_distribution: k must be >= 0");
    VectorXd mu = chain.mu0();
    for (int step = 0; step < k; ++step) {
        mu = chain.transition() * mu;
    }
    return mu;
}

double availability_probability(const VectorXd& mu_k, int k, int r) {
    const int last = std::min<int>(k - r - 1, static_cast<int>(mu_k.size()) - 1);
    double p = 0.0;
    for (int l = 0; l <= last; ++l) p += mu_k(l);
    return std::clamp(p, 0.0, 1.0);
}

AoiTable build_aoi_table(const AoiChain& chain, int H) {
    if (H < 1) throw std::invalid_argument("build_aoi_table: H must be >= 1");
    AoiTable table;
    table.H = H;
    table.mu.reserve(static_cast<std::size_t>(H));
    table.mu.push_back(chain.mu0());
    for (int k = 1; k < H; ++k) {
        table.mu.push_back(chain.transition() * table.mu.back());
    }
    table.p = MatrixXd::Zero(H, H);
    for (int k = 1; k < H; ++k) {
        for (int r = 0; r < k; ++r) {
            table.p(k, r) = availability_probability(table.mu[static_cast<std::size_t>(k)], k, r);
        }
    }
    return table;
}

// ---------------------------------------------------------------------------

IndicatorMatrix::IndicatorMatrix(int H, int nu, int nw)
    : H_(H), nu_(nu), nw_(nw), bits_(static_cast<std::size_t>(H * H), 0) {
    if (H < 0 || nu < 1 || nw < 1) throw std::invalid_argument("IndicatorMatrix: invalid dimensions");
}

IndicatorMatrix IndicatorMatrix::from_aoi_path(const std::vector<int>& aoi, int nu, int nw) {
    const int H = static_cast<int>(aoi.size());
    IndicatorMatrix m(H, nu, nw);
    for (int k = 0; k < H; ++k) {
        for (int r = 0; r < k - aoi[static_cast<std::size_t>(k)]; ++r) m.set(k, r, true);
    }
    return m;
}

IndicatorMatrix IndicatorMatrix::full(int H, int nu, int nw) {
    IndicatorMatrix m(H, nu, nw);
    for (int k = 0; k < H; ++k) {
        for (int r = 0; r < k; ++r) m.set(k, r, true);
    }
    return m;
}

void IndicatorMatrix::set(int k, int r, bool value) {
    if (k < 0 || k >= H_ || r < 0 || r >= k) {
        throw std::out_of_range("indicator bit (" + std::to_string(k) + "," + std::to_string(r) +
                                ") outside the strict lower triangle");
    }
    bits_[static_cast<std::size_t>(k * H_ + r)] = value ? 1 : 0;
}

int IndicatorMatrix::support_size() const {
    return static_cast<int>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

int IndicatorMatrix::row_count(int k) const {
    int n = 0;
    while (n < k && bit(k, n)) ++n;
    return n;
}

bool IndicatorMatrix::is_staircase() const {
    for (int k = 0; k < H_; ++k) {
        for (int r = k; r < H_; ++r) {
            if (bit(k, r)) return false;
        }
        for (int r = 0; r + 1 < k; ++r) {
            if (bit(k, r + 1) && !bit(k, r)) return false;
        }
        if (k + 1 < H_) {
            for (int r = 0; r < k; ++r) {
                if (bit(k, r) && !bit(k + 1, r)) return false;
            }
        }
    }
    return true;
}

bool IndicatorMatrix::dominates(const IndicatorMatrix& other) const {
    if (H_ != other.H_) throw std::invalid_argument("dominates: horizon mismatch");
    for (std::size_t i = 0; i < bits_.size(); ++i) {
        if (bits_[i] < other.bits_[i]) return false;
    }
    return true;
}

IndicatorMatrix IndicatorMatrix::with_block_dims(int nu, int nw) const {
    IndicatorMatrix m = *this;
    if (nu < 1 || nw < 1) throw std::invalid_argument("with_block_dims: invalid dimensions");
    m.nu_ = nu;
    m.nw_ = nw;
    return m;
}

MatrixXd IndicatorMatrix::expand() const {
    MatrixXd out = MatrixXd::Zero(H_ * nu_, H_ * nw_);
    for (int k = 0; k < H_; ++k) {
        for (int r = 0; r < k; ++r) {
            if (bit(k, r)) out.block(k * nu_, r * nw_, nu_, nw_).setOnes();
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

BetaSelection select_beta(const AoiTable& table, double delta_u, double delta_x, BetaRule rule) {
    check_probability(delta_u, "delta_u");
    check_probability(delta_x, "delta_x");
    const int H = table.H;
    BetaSelection sel;
    sel.delta_u = delta_u;
    sel.delta_x = delta_x;
    sel.P_beta = IndicatorMatrix(H);
    sel.alpha.assign(static_cast<std::size_t>(H), 1.0);
    sel.alpha_products.assign(static_cast<std::size_t>(H), 1.0);

    double product = 1.0;  // prod_{t=1}^{k-1} alpha_t
    for (int k = 1; k < H; ++k) {
        sel.alpha_products[static_cast<std::size_t>(k)] = product;
        if (product < delta_x) {
            throw InfeasibleRiskChain(k, product, delta_x);
        }

        std::vector<double> candidates{1.0};
        for (int r = 0; r < k; ++r) {
            const double p = table.p(k, r);
            if (p > delta_u) candidates.push_back(std::min(p, 1.0));
        }
        std::sort(candidates.begin(), candidates.end());
        candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

        double alpha = candidates.front();
        if (rule == BetaRule::Adaptive) {
            const bool last = (k == H - 1);
            auto ok = [&](double c) { return c > delta_x && (last || product * c >= delta_x); };
            auto it = std::find_if(candidates.begin(), candidates.end(), ok);
            alpha = (it == candidates.end()) ? 1.0 : *it;
        }
        if (!(alpha > delta_x)) {
            throw InfeasibleRiskChain(k, alpha, delta_x);
        }
        sel.alpha[static_cast<std::size_t>(k)] = alpha;
        for (int r = 0; r < k; ++r) {
            if (table.p(k, r) >= alpha) sel.P_beta.set(k, r, true);
        }
        product *= alpha;
    }

    sel.gamma_u.resize(static_cast<std::size_t>(H));
    sel.gamma_x.resize(static_cast<std::size_t>(H));
    for (int k = 0; k < H; ++k) {
        const auto i = static_cast<std::size_t>(k);
        sel.gamma_u[i] = delta_u / sel.alpha[i];
        sel.gamma_x[i] = delta_x / sel.alpha_products[i];
    }
    return sel;
}

std::uint64_t catalan(int H) {
    // C_{n+1} = C_n * 2(2n+1) / (n+2), exact in integers up to H ~ 33
    std::uint64_t c = 1;
    for (int n = 0; n < H; ++n) {
        c = c * 2 * static_cast<std::uint64_t>(2 * n + 1) / static_cast<std::uint64_t>(n + 2);
    }
    return c;
}

std::set<IndicatorMatrix> enumerate_realizations(const AoiChain& chain, int H) {
    if (H < 1) throw std::invalid_argument("enumerate_realizations: H must be >= 1");
    if (H > kMaxEnumerationHorizon) {
        throw HorizonTooLarge("enumeration limited to H <= " + std::to_string(kMaxEnumerationHorizon) +
                              ", got " + std::to_string(H));
    }
    const auto& T = chain.transition();
    const int n = chain.a_max() + 1;

    // frontier: (current AoI, partial matrix) pairs reachable after step k
    std::set<std::pair<int, IndicatorMatrix>> frontier;
    for (int a = 0; a < n; ++a) {
        if (chain.mu0()(a) > 0.0) frontier.emplace(a, IndicatorMatrix(H));
    }
    for (int k = 1; k < H; ++k) {
        std::set<std::pair<int, IndicatorMatrix>> next;
        for (const auto& [a, m] : frontier) {
            for (int b = 0; b < n; ++b) {
                if (T(b, a) <= 0.0) continue;
                IndicatorMatrix grown = m;
                for (int r = 0; r < k - b; ++r) grown.set(k, r, true);
                next.emplace(b, std::move(grown));
            }
        }
        frontier = std::move(next);
    }
    std::set<IndicatorMatrix> out;
    for (const auto& [a, m] : frontier) out.insert(m);
    return out;
}

AoiSample sample_aoi_path(const AoiChain& chain, int H, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    auto draw = [&](const auto& column) {
        const double u = uniform(rng);
        double acc = 0.0;
        int last_positive = 0;
        for (int j = 0; j < static_cast<int>(column.size()); ++j) {
            if (column(j) <= 0.0) continue;
            last_positive = j;
            acc += column(j);
            if (u < acc) return j;
        }
        return last_positive;
    };

    AoiSample s;
    s.path.resize(static_cast<std::size_t>(H));
    int a = draw(chain.mu0());
    for (int k = 0; k < H; ++k) {
        if (k > 0) a = draw(chain.transition().col(a));
        s.path[static_cast<std::size_t>(k)] = a;
    }
    s.realization = IndicatorMatrix::from_aoi_path(s.path);
    return s;
}

std::set<IndicatorMatrix> dominating_set(const std::set<IndicatorMatrix>& p_omega,
                                         const IndicatorMatrix& p_beta) {
    std::set<IndicatorMatrix> out;
    for (const auto& m : p_omega) {
        if (m.dominates(p_beta)) out.insert(m);
    }
    return out;
}

}  // namespace aoismpc
