#pragma once

#include <Eigen/Dense>
#include <compare>
#include <cstdint>
#include <random>
#include <set>
#include <vector>

namespace aoismpc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Markov chain over AoI values {0..a_max}. T(j, i) = P(a_{k+1} = j | a_k = i),
/// so T is column stochastic and mu_{k+1} = T mu_k.
class AoiChain {
public:
    /// Validates column stochasticity, the at-most-one-step increase rule and mu0.
    /// Throws InvalidChain.
    AoiChain(MatrixXd transition, VectorXd mu0);

    int a_max() const { return static_cast<int>(T_.rows()) - 1; }
    const MatrixXd& transition() const { return T_; }
    const VectorXd& mu0() const { return mu0_; }

private:
    MatrixXd T_;
    VectorXd mu0_;
};

/// Single lossy link: a delivery with probability q resets the AoI to 0,
/// otherwise the AoI grows by one (saturating at a_max).
AoiChain one_link_chain(double q, int a_max);

/// mu_k = T^k mu_0.
VectorXd predict_distribution(const AoiChain& chain, int k);

/// p_{k,r} = sum_{l=0}^{k-r-1} mu_k[l]; zero for an empty sum.
double availability_probability(const VectorXd& mu_k, int k, int r);

/// AoI distributions mu_0..mu_{H-1} and the availability table p_{k,r}.
struct AoiTable {
    int H = 0;
    std::vector<VectorXd> mu;
    MatrixXd p;  // H x H, strictly lower triangular
};

AoiTable build_aoi_table(const AoiChain& chain, int H);

/// Lower staircase {0,1} table of indicator bits 1_{k,r}, r < k. Each bit
/// stands for an nu x nw all-ones block of the full matrix.
class IndicatorMatrix {
public:
    IndicatorMatrix() = default;
    IndicatorMatrix(int H, int nu = 1, int nw = 1);

    /// Bits from an AoI path: 1_{k,r} = 1 iff r < k - a_k.
    static IndicatorMatrix from_aoi_path(const std::vector<int>& aoi, int nu = 1, int nw = 1);
    /// Every r < k set.
    static IndicatorMatrix full(int H, int nu = 1, int nw = 1);

    int horizon() const { return H_; }
    int nu() const { return nu_; }
    int nw() const { return nw_; }

    bool bit(int k, int r) const { return bits_[static_cast<std::size_t>(k * H_ + r)] != 0; }
    /// Throws std::out_of_range for r >= k.
    void set(int k, int r, bool value);

    /// Number of set bits.
    int support_size() const;
    /// Number of leading set bits in row k (the row is a prefix for valid matrices).
    int row_count(int k) const;

    /// Both monotonicity invariants: nondecreasing in k, nonincreasing in r.
    bool is_staircase() const;
    /// Entrywise this >= other.
    bool dominates(const IndicatorMatrix& other) const;

    IndicatorMatrix with_block_dims(int nu, int nw) const;
    /// (H nu) x (H nw) 0/1 matrix.
    MatrixXd expand() const;

    const std::vector<std::uint8_t>& bits() const { return bits_; }

    bool operator==(const IndicatorMatrix& o) const {
        return H_ == o.H_ && bits_ == o.bits_;
    }
    auto operator<=>(const IndicatorMatrix& o) const {
        if (auto c = H_ <=> o.H_; c != 0) return c;
        return bits_ <=> o.bits_;
    }

private:
    int H_ = 0;
    int nu_ = 1;
    int nw_ = 1;
    std::vector<std::uint8_t> bits_;
};

enum class BetaRule {
    /// alpha_k = min{p_{k,r} : p_{k,r} > delta_u} (or 1); fails when the chain breaks.
    Strict,
    /// As Strict, but alpha_k is raised to the next candidate level while the running
    /// product would drop below delta_x.
    Adaptive,
};

struct BetaSelection {
    IndicatorMatrix P_beta;
    std::vector<double> alpha;           // alpha_0..alpha_{H-1}, alpha_0 = 1
    std::vector<double> gamma_u;         // delta_u / alpha_k
    std::vector<double> gamma_x;         // delta_x / alpha_products[k]
    std::vector<double> alpha_products;  // prod_{t=1}^{k-1} alpha_t
    double delta_u = 0.0;
    double delta_x = 0.0;
};

/// Chooses the beta-case indicator matrix and the tailored likelihoods.
/// Throws InfeasibleRiskChain.
BetaSelection select_beta(const AoiTable& table, double delta_u, double delta_x,
                          BetaRule rule = BetaRule::Strict);

/// All indicator matrices reachable with positive probability. Throws HorizonTooLarge for H > 12.
std::set<IndicatorMatrix> enumerate_realizations(const AoiChain& chain, int H);

/// (2H)! / (H! (H+1)!)
std::uint64_t catalan(int H);

struct AoiSample {
    std::vector<int> path;
    IndicatorMatrix realization;
};

AoiSample sample_aoi_path(const AoiChain& chain, int H, std::mt19937_64& rng);

/// Members of p_omega that dominate p_beta entrywise.
std::set<IndicatorMatrix> dominating_set(const std::set<IndicatorMatrix>& p_omega,
                                         const IndicatorMatrix& p_beta);

}  // namespace aoismpc
