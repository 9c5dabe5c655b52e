#pragma once

namespace vrclt {

// log Beta(a, b); a, b > 0.
double log_beta(double a, double b);

// Regularized incomplete beta I_x(a, b), a, b > 0, x in [0, 1].
// Continued fraction (modified Lentz) with the symmetry switch at
// x > (a+1)/(a+b+2); absolute error ~1e-14.
double regularized_incomplete_beta(double a, double b, double x);

// F(d1, d2) distribution; d1, d2 > 0.
double f_cdf(double d1, double d2, double x);
double f_pdf(double d1, double d2, double x);
// Inverse cdf by bracket doubling + safeguarded Newton; |f_cdf(q) - p| <= 1e-10.
double f_quantile(double d1, double d2, double p);

// Standard normal cdf.
double normal_cdf(double x);

}  // namespace vrclt
