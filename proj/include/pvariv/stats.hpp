#pragma once

#include <span>

namespace pvariv {

/// Standard normal CDF.
double norm_cdf(double x);

/// Standard normal upper tail probability, accurate for large x.
double norm_sf(double x);

/// Standard normal quantile (Wichura's AS 241 PPND16, double precision).
/// p must lie in (0,1).
double norm_quantile(double p);

/// chi-square(1) quantile, via the square of the normal quantile.
double chi2_1_quantile(double p);

struct ShapiroWilkResult {
    double w;
    double p_value;
};

/// Shapiro-Wilk normality test (Royston 1995 / AS R94 approximation),
/// valid for 3 <= n <= 5000. Throws DegenerateResiduals on a constant
/// sample and InvalidArgument outside the supported range.
ShapiroWilkResult shapiro_wilk(std::span<const double> sample);

}  // namespace pvariv
