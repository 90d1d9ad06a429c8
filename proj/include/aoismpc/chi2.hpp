#pragma once

namespace aoismpc {

/// Regularized lower incomplete gamma P(a, x).
double regularized_gamma_p(double a, double x);

/// Chi-squared CDF F(c; dof) = P(dof/2, c/2).
double chi2_cdf(double c, int dof);

/// Inverse chi-squared CDF: the c >= 0 with F(c; dof) = gamma.
/// Throws InvalidProbability unless gamma in [0,1) and dof >= 1.
double chi2_quantile(double gamma, int dof);

}  // namespace aoismpc
