#include "aoismpc/chi2.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "aoismpc/errors.hpp"

namespace aoismpc {
namespace {

constexpr double kEps = 1e-16;
constexpr int kMaxTerms = 1000;

// P(a, x) by its power series, valid for x < a + 1.
double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < kMaxTerms; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::abs(term) < std::abs(sum) * kEps) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Q(a, x) by the modified Lentz continued fraction, valid for x >= a + 1.
double gamma_q_fraction(double a, double x) {
    constexpr double tiny = std::numeric_limits<double>::min() / kEps;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxTerms; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kEps) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

double chi2_pdf(double c, int dof) {
    if (c <= 0.0) return dof == 2 ? 0.5 : (dof == 1 ? std::numeric_limits<double>::infinity() : 0.0);
    const double half = 0.5 * dof;
    return std::exp((half - 1.0) * std::log(c) - 0.5 * c - half * std::log(2.0) - std::lgamma(half));
}

}  // namespace

double regularized_gamma_p(double a, double x) {
    if (x <= 0.0) return 0.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_fraction(a, x);
}

double chi2_cdf(double c, int dof) { return regularized_gamma_p(0.5 * dof, 0.5 * c); }

double chi2_quantile(double gamma, int dof) {
    if (!(gamma >= 0.0 && gamma < 1.0)) {
        throw InvalidProbability("chi2_quantile: gamma must lie in [0,1), got " + std::to_string(gamma));
    }
    if (dof < 1) {
        throw InvalidProbability("chi2_quantile: dof must be >= 1, got " + std::to_string(dof));
    }
    if (gamma == 0.0) return 0.0;

    double lo = 0.0;
    double hi = std::max(1.0, static_cast<double>(dof));
    while (chi2_cdf(hi, dof) < gamma) {
        lo = hi;
        hi *= 2.0;
    }

    double c = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
        const double f = chi2_cdf(c, dof) - gamma;
        if (f == 0.0) return c;
        if (f < 0.0) lo = c; else hi = c;
        if (std::abs(f) < 1e-15 || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;

        const double slope = chi2_pdf(c, dof);
        double next = (slope > 0.0 && std::isfinite(slope)) ? c - f / slope : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        c = next;
    }
    return c;
}

}  // namespace aoismpc
