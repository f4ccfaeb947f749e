#pragma once

#include <string>
#include <vector>

#include "pvariv/inference.hpp"
#include "pvariv/irf.hpp"
#include "pvariv/montecarlo.hpp"
#include "pvariv/pvar.hpp"
#include "pvariv/svar_iv.hpp"

namespace pvariv {

/// Model JSON document with stable field names (phi and sigma row-major).
std::string model_to_json_string(const PvarModel& model);

/// Rebuilds the structural fields of a model from its JSON document; the
/// residual panel and design are not part of the wire format.
PvarModel model_from_json_string(const std::string& text);

std::string iv_estimate_to_json_string(const IvEstimate& iv);

std::string lag_report_to_csv(const LagSelectionReport& rep);

std::string diagnostics_to_csv(const DiagnosticsReport& autocorr,
                               const DiagnosticsReport& normality);

/// Fig-3-style plot data: horizon, variable, response, cumulative, cs_lo,
/// cs_hi, segment. Extra segments of a disconnected set add rows with
/// segment >= 1; infinite endpoints serialize as "inf"/"-inf".
std::string irf_to_csv(const IrfResult& irf,
                       const std::vector<std::vector<ConfidenceSet>>& cs_per_h_var);

/// First-stage / second-stage summary (delta, CI, F; per-outcome beta, AR
/// statistic and AR confidence set).
std::string table2_csv(const IvEstimate& iv, const std::vector<ConfidenceSet>& beta_cs,
                       const std::vector<std::string>& outcome_names);

/// Slope coefficients with 95% confidence intervals.
std::string table3_csv(const PvarModel& model, VarianceMode mode);

/// Per-equation slope standard errors (K x m), homoskedastic or clustered.
Eigen::MatrixXd slope_standard_errors(const PvarModel& model, VarianceMode mode);

std::string mc_report_to_csv(const McReport& rep);
std::string mc_report_to_json_string(const McReport& rep, const McConfig& cfg);

}  // namespace pvariv
