#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <utility>
#include <vector>

#include "pvariv/irf.hpp"
#include "pvariv/pvar.hpp"
#include "pvariv/svar_iv.hpp"

namespace pvariv {

struct GridSpec {
    double lo = std::nan("");  // nan = auto-center at the point estimate
    double hi = std::nan("");
    int n_points = 2001;

    bool is_auto() const { return std::isnan(lo) || std::isnan(hi); }
};

/// Union of disjoint ordered intervals; endpoints may be +-infinity.
struct ConfidenceSet {
    double level = 0.95;
    std::vector<std::pair<double, double>> segments;
    GridSpec grid;
    bool unbounded = false;
    bool empty_on_grid = false;
    bool weak_warning = false;

    bool contains(double x) const {
        for (const auto& [lo, hi] : segments)
            if (x >= lo && x <= hi) return true;
        return false;
    }
    /// Total length; infinite when any segment is unbounded.
    double width() const {
        double w = 0.0;
        for (const auto& [lo, hi] : segments) w += hi - lo;
        return w;
    }
};

struct InferenceOptions {
    VarianceMode variance = VarianceMode::iid;
    double shock_size = 1.0;  // reporting scale for the IRF
    GridSpec grid;
    bool cumulative = false;  // invert on the cumulative IRF instead
    int max_expansions = 1;   // x4 widenings of the auto grid
};

/// Delta-method machinery for IRF coefficients, shared across horizons.
/// The AR statistic for candidate lambda0 is n*(a - lambda0*b)^2 / s2 with
/// s2 = qa - 2*lambda0*qab + lambda0^2*qb, so test inversion reduces to a
/// quadratic in lambda0 evaluated over a grid.
class IrfInference {
public:
    IrfInference(const PvarModel& model, const AlignedSample& sample,
                 VarianceMode mode = VarianceMode::iid);

    struct Quadratic {
        double a = 0.0;   // e_s' C_h(Phi) Gamma (or its cumulative sum)
        double b = 0.0;   // e_1' Gamma
        double qa = 0.0, qb = 0.0, qab = 0.0;
        long long n = 0;

        double lambda_hat() const { return a / b; }
        double sigma2(double lambda0) const { return qa - 2.0 * lambda0 * qab + lambda0 * lambda0 * qb; }
        double ar_stat(double lambda0) const;
        double se_wald() const;
    };

    Quadratic lambda_quadratic(int h, int response_var, bool cumulative = false) const;

    double first_stage_f() const { return first_stage_f_; }
    long long n() const { return n_; }
    const Eigen::VectorXd& gamma() const { return gamma_; }

private:
    int m_ = 0, p_ = 0, k_ = 0;
    long long n_ = 0;
    std::vector<Eigen::MatrixXd> phi_;
    Eigen::MatrixXd slopes_;
    Eigen::VectorXd gamma_;
    Eigen::MatrixXd v_;  // joint avar of sqrt(n)*(slopes, gamma)
    double first_stage_f_ = 0.0;
};

/// AR confidence set for the horizon-h response of variable s, by test
/// inversion over a grid. The auto grid spans lambda_hat +- 20 Wald se and
/// widens x4 when an endpoint is still accepted; segments touching the grid
/// edge after expansion extend to +-infinity.
ConfidenceSet ar_confidence_set(const PvarModel& model, const AlignedSample& sample, int h,
                                int response_var, double alpha,
                                const InferenceOptions& opts = {});

ConfidenceSet ar_confidence_set(const PvarModel& model, const InstrumentSeries& z, int h,
                                int response_var, double alpha,
                                const InferenceOptions& opts = {});

/// Delta-method Wald interval around the point IRF; always bounded.
ConfidenceSet plug_in_confidence_set(const PvarModel& model, const AlignedSample& sample, int h,
                                     int response_var, double alpha,
                                     const InferenceOptions& opts = {});

ConfidenceSet plug_in_confidence_set(const PvarModel& model, const InstrumentSeries& z, int h,
                                     int response_var, double alpha,
                                     const InferenceOptions& opts = {});

/// Estimated asymptotic variance of sqrt(n) * (e_s'C_h Gamma - lambda0 e_1'Gamma).
double variance_lambda(const PvarModel& model, const AlignedSample& sample, int h,
                       int response_var, double lambda0, const InferenceOptions& opts = {});

/// Internal inversion step shared by the public entry points; exposed for
/// the Monte Carlo harness, which reuses one IrfInference across horizons.
ConfidenceSet invert_ar_quadratic(const IrfInference::Quadratic& quad, double alpha,
                                  const InferenceOptions& opts);

ConfidenceSet wald_interval(const IrfInference::Quadratic& quad, double alpha, double shock_size,
                            double first_stage_f);

}  // namespace pvariv
