#include "pvariv/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "pvariv/errors.hpp"

namespace pvariv {

double norm_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

double norm_sf(double x) { return 0.5 * std::erfc(x * M_SQRT1_2); }

double norm_quantile(double p) {
    require(p > 0.0 && p < 1.0, errc::invalid_argument, "quantile probability must be in (0,1)");

    // AS 241 PPND16.
    const double q = p - 0.5;
    double r;
    if (std::fabs(q) <= 0.425) {
        r = 0.180625 - q * q;
        const double num = q * (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                                     6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                                   1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
                                 1.3314166789178437745e2) * r + 3.3871328727963666080e0);
        const double den = (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                                 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                               5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
                             4.2313330701600911252e1) * r + 1.0);
        return num / den;
    }
    r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        const double num = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                                 2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                               3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
                             4.63033784615654529590e0) * r + 1.42343711074968357734e0);
        const double den = (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                                 1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                               6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
                             2.05319162663775882187e0) * r + 1.0);
        val = num / den;
    } else {
        r -= 5.0;
        const double num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                                 1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                               2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
                             5.46378491116411436990e0) * r + 6.65790464350110377720e0);
        const double den = (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                                 1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                               1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                             5.99832206555887937690e-1) * r + 1.0);
        val = num / den;
    }
    return (q < 0.0) ? -val : val;
}

double chi2_1_quantile(double p) {
    const double z = norm_quantile(0.5 * (1.0 + p));
    return z * z;
}

namespace {

double poly(const double* c, int n, double x) {
    double v = c[0];
    double xp = 1.0;
    for (int i = 1; i < n; ++i) {
        xp *= x;
        v += c[i] * xp;
    }
    return v;
}

}  // namespace

ShapiroWilkResult shapiro_wilk(std::span<const double> sample) {
    const int n = static_cast<int>(sample.size());
    require(n >= 3, errc::invalid_argument, "Shapiro-Wilk needs at least 3 observations");
    require(n <= 5000, errc::invalid_argument, "Shapiro-Wilk supports at most 5000 observations");

    std::vector<double> x(sample.begin(), sample.end());
    std::sort(x.begin(), x.end());
    const double range = x.back() - x.front();
    require(range > 0.0, errc::degenerate_residuals, "Shapiro-Wilk sample is constant");

    // Expected normal order statistics m_i and the approximate weights a_i
    // (antisymmetric; only the upper half is stored).
    const int nn2 = n / 2;
    std::vector<double> a(nn2);
    if (n == 3) {
        a[0] = M_SQRT1_2;
    } else {
        const double an = n;
        double summ2 = 0.0;
        for (int i = 1; i <= nn2; ++i) {
            a[i - 1] = norm_quantile((i - 0.375) / (an + 0.25));
            summ2 += 2.0 * a[i - 1] * a[i - 1];
        }
        const double ssumm2 = std::sqrt(summ2);
        const double rsn = 1.0 / std::sqrt(an);
        static const double c1[6] = {0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056};
        static const double c2[6] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
        const double a1 = poly(c1, 6, rsn) - a[0] / ssumm2;
        int i1;
        double fac;
        if (n > 5) {
            i1 = 3;
            const double a2 = poly(c2, 6, rsn) - a[1] / ssumm2;
            fac = std::sqrt((summ2 - 2.0 * a[0] * a[0] - 2.0 * a[1] * a[1]) /
                            (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
            a[1] = a2;
        } else {
            i1 = 2;
            fac = std::sqrt((summ2 - 2.0 * a[0] * a[0]) / (1.0 - 2.0 * a1 * a1));
        }
        a[0] = a1;
        for (int i = i1; i <= nn2; ++i) a[i - 1] = -a[i - 1] / fac;
        // a[k] is now the positive weight pairing the (k+1)-th largest with
        // the (k+1)-th smallest order statistic.
    }

    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double ssq = 0.0;
    for (double v : x) ssq += (v - mean) * (v - mean);
    require(ssq > 0.0, errc::degenerate_residuals, "Shapiro-Wilk sample is constant");

    double sa = 0.0;
    for (int i = 0; i < nn2; ++i) sa += a[i] * (x[n - 1 - i] - x[i]);
    double w = sa * sa / ssq;
    if (w > 1.0) w = 1.0;

    // Royston's p-value approximation.
    double pw;
    if (n == 3) {
        const double pi6 = 1.90985931710274;   // 6/pi
        const double stqr = 1.04719755119660;  // asin(sqrt(3/4))
        pw = pi6 * (std::asin(std::sqrt(w)) - stqr);
        pw = std::clamp(pw, 0.0, 1.0);
    } else {
        const double y = std::log(1.0 - w);
        const double an = n;
        double m, s, zval;
        if (n <= 11) {
            static const double c3[4] = {0.5440, -0.39978, 0.025054, -6.714e-4};
            static const double c4[4] = {1.3822, -0.77857, 0.062767, -0.0020322};
            const double gamma = -2.273 + 0.459 * an;
            if (y >= gamma) return {w, 1e-99};  // w extremely small
            const double yy = -std::log(gamma - y);
            m = poly(c3, 4, an);
            s = std::exp(poly(c4, 4, an));
            zval = (yy - m) / s;
        } else {
            static const double c5[4] = {-1.5861, -0.31082, -0.083751, 0.0038915};
            static const double c6[3] = {-0.4803, -0.082676, 0.0030302};
            const double ln_n = std::log(an);
            m = poly(c5, 4, ln_n);
            s = std::exp(poly(c6, 3, ln_n));
            zval = (y - m) / s;
        }
        pw = norm_sf(zval);
    }
    return {w, pw};
}

}  // namespace pvariv
