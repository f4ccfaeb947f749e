#pragma once

#include <vector>

#include "pvariv/inference.hpp"
#include "pvariv/irf.hpp"
#include "pvariv/panel_data.hpp"
#include "pvariv/pvar.hpp"
#include "pvariv/svar_iv.hpp"

namespace pvariv {

struct PipelineOptions {
    double alpha = 0.05;
    int horizon = 8;
    double shock_size = 0.01;
    Normalization normalization = Normalization::unit;
    VarianceMode variance = VarianceMode::iid;
    int grid_points = 2001;
};

/// The paper-style analysis panel from a raw (spending, gdp) levels panel:
/// k-period growth rates of both variables (spending growth scaled by
/// lagged gdp) plus the aggregate instrument on the growth sample.
std::pair<PanelDataset, InstrumentSeries> prepare_fiscal_panel(
    const PanelDataset& raw, int growth_k, InstrumentMode mode,
    const std::string& spending_var = "", const std::string& gdp_var = "");

struct EstimateBundle {
    PvarModel model;
    IdentifyResult ident;
    DiagnosticsReport autocorr;
    DiagnosticsReport normality;
    std::vector<ConfidenceSet> beta_ar_cs;  // AR set for each beta_j at h = 0
};

EstimateBundle run_estimate(const PanelDataset& growth, const InstrumentSeries& z, int lags,
                            const PipelineOptions& opts = {});

struct IrfBundle {
    IrfResult irf;
    std::vector<std::vector<ConfidenceSet>> cs;  // [horizon][variable], response units
};

IrfBundle run_irf(const PvarModel& model, const InstrumentSeries& z,
                  const PipelineOptions& opts = {});

}  // namespace pvariv
