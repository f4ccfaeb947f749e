#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "pvariv/panel_data.hpp"

namespace pvariv {

/// Fitted fixed-effects PVAR. The estimation sample per unit is
/// t = p .. T-1; residuals and the demeaned design are stored row-major by
/// unit (row = i * sample_len + s). Immutable after construction.
struct PvarModel {
    int p = 0;
    int n_units = 0;
    int sample_len = 0;  // T - p
    long long nobs = 0;  // n_units * sample_len

    std::vector<Eigen::MatrixXd> phi;  // p slope matrices, m x m
    Eigen::MatrixXd mu;                // N x m fixed effects
    Eigen::MatrixXd sigma;             // m x m residual covariance
    std::vector<Eigen::MatrixXd> residuals;  // per unit, sample_len x m

    Eigen::MatrixXd design;  // nobs x (m*p) demeaned lag regressors
    Eigen::MatrixXd slopes;  // (m*p) x m coefficient matrix B, phi_l(s,r) = B((l-1)m+r, s)
    Eigen::MatrixXd xtx;     // design' * design

    std::vector<std::string> var_names;
    std::vector<long long> sample_time_ids;

    double spectral_radius = 0.0;
    bool stationary = false;
    bool dof_corrected = true;

    int n_vars() const { return static_cast<int>(var_names.size()); }
    int n_regressors() const { return n_vars() * p; }

    Eigen::MatrixXd companion() const;
    /// Residual panel stacked into nobs x m (unit-major).
    Eigen::MatrixXd residual_matrix() const;
};

Eigen::MatrixXd companion_matrix(const std::vector<Eigen::MatrixXd>& phi);
double companion_spectral_radius(const std::vector<Eigen::MatrixXd>& phi);

struct FitOptions {
    bool dof_correction = true;  // divisor N(T-p) - m*p; false -> N(T-p)
};

/// Within (LSDV) estimator: per-unit demeaning over the estimation sample,
/// then equation-by-equation OLS on demeaned lags.
PvarModel fit_pvar(const PanelDataset& ds, int p, const FitOptions& opts = {});

struct LagSelectionReport {
    std::vector<int> lags;
    std::vector<double> mbic, maic, mqic;
    int best_mbic = 0, best_maic = 0, best_mqic = 0;  // recommended p per criterion
    long long common_nobs = 0;
};

/// Quasi-likelihood information criteria for p = 1..p_max, all fitted on the
/// common sample implied by p_max and reported relative to the p_max model.
LagSelectionReport select_lag(const PanelDataset& ds, int p_max);

struct AutocorrRow {
    std::string var;
    double coef = 0.0, ci_lo = 0.0, ci_hi = 0.0;
};

struct NormalityRow {
    std::string var;
    double w = 0.0, p_value = 0.0;
};

struct DiagnosticsReport {
    std::vector<AutocorrRow> autocorr;
    bool clean = false;  // every autocorrelation CI contains zero
    std::vector<NormalityRow> normality;
};

/// Pooled OLS of each residual on its own first lag, with 95% CIs.
DiagnosticsReport residual_autocorrelation_check(const PvarModel& model);

/// Shapiro-Wilk per variable on the pooled residuals.
DiagnosticsReport normality_test(const PvarModel& model);

}  // namespace pvariv
