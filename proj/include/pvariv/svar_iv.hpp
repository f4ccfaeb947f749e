#pragma once

#include <Eigen/Dense>
#include <optional>

#include "pvariv/panel_data.hpp"
#include "pvariv/pvar.hpp"

namespace pvariv {

enum class Normalization { unit, standardized };
enum class VarianceMode { iid, cluster };

const char* normalization_name(Normalization n);
const char* variance_mode_name(VarianceMode v);

/// Residual panel stacked next to the instrument over the estimation sample.
/// Rows are unit-major; z is in deviation from its sample grand mean.
struct AlignedSample {
    Eigen::MatrixXd resid;  // n x m, policy variable first
    Eigen::VectorXd z;      // n
    int n_units = 0;
    int per_unit = 0;
    double z_mean = 0.0;

    long long n() const { return static_cast<long long>(n_units) * per_unit; }
};

/// Matches the instrument to the model's estimation sample by time id.
AlignedSample align_instrument(const PvarModel& model, const InstrumentSeries& z);

struct FirstStage {
    double delta = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0;
    double se = 0.0;
    double f_stat = 0.0;
    bool f_capped = false;  // exact first-stage fit, F reported as +inf
};

/// Pooled projection of the policy residual on the instrument:
/// delta = cov(W,Z)/var(Z), homoskedastic or by-unit clustered CI, and
/// F = (delta/se)^2.
FirstStage first_stage(const Eigen::VectorXd& w, const Eigen::VectorXd& z,
                       VarianceMode mode = VarianceMode::iid, int n_units = 0, int per_unit = 0);

/// rho_j = cov(Y_j, Z)/var(Z).
double reduced_form(const Eigen::VectorXd& y, const Eigen::VectorXd& z);

/// beta_j = rho_j / delta. Throws WeakDenominator when delta is numerically
/// zero relative to the scales of W and Z.
Eigen::VectorXd iv_ratio(const Eigen::VectorXd& rho, double delta, double sd_w, double sd_z);

/// AR statistic for H0: beta = beta0 — the squared t statistic of
/// regressing (Y - beta0 W) on Z; chi-square(1) under the null.
double ar_statistic_point(const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                          const Eigen::VectorXd& z, double beta0,
                          VarianceMode mode = VarianceMode::iid, int n_units = 0,
                          int per_unit = 0);

/// First structural column. gamma_vec stacks the instrument projections
/// (delta, rho_1..rho_J); r_col is (delta, beta_1..beta_J) under unit
/// normalization and (r11, beta_j * r11) under the standardized one.
struct StructuralColumn {
    Eigen::VectorXd r_col;
    Eigen::VectorXd gamma_vec;
    Normalization normalization = Normalization::unit;
};

struct ShockScale {
    Eigen::VectorXd c;  // length J+1
    double r11 = 0.0;
    double r12_sq = 0.0;
};

/// Standardized-shock scale from the partition of Sigma: the scale c such
/// that (delta*c_1, rho_j*c_j) is the impact column of a unit-variance
/// structural shock.
std::pair<ShockScale, StructuralColumn> standardized_shock_scale(const Eigen::MatrixXd& sigma,
                                                                 double delta,
                                                                 const Eigen::VectorXd& rho);

struct IvEstimate {
    double delta = 0.0;
    double delta_ci_lo = 0.0, delta_ci_hi = 0.0;
    double f_stat = 0.0;
    bool f_capped = false;
    Eigen::VectorXd rho;          // length J
    Eigen::VectorXd beta;         // length J, beta_j * delta == rho_j
    double ar_stat = 0.0;         // AR at beta0 = 0 for the first outcome
    Eigen::VectorXd ar_stat_all;  // AR at beta0 = 0 per outcome
    std::optional<Eigen::VectorXd> shock_scale;
    Normalization normalization = Normalization::unit;
    VarianceMode variance = VarianceMode::iid;
};

struct IdentifyResult {
    IvEstimate iv;
    StructuralColumn column;
};

/// Full identification pass: first stage, reduced forms, IV ratios, AR
/// statistics, and the structural column under the requested normalization.
IdentifyResult identify(const PvarModel& model, const InstrumentSeries& z,
                        Normalization normalization = Normalization::unit,
                        VarianceMode variance = VarianceMode::iid);

IdentifyResult identify(const PvarModel& model, const AlignedSample& sample,
                        Normalization normalization = Normalization::unit,
                        VarianceMode variance = VarianceMode::iid);

}  // namespace pvariv
