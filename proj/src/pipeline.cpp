#include "pvariv/pipeline.hpp"

#include "pvariv/errors.hpp"

namespace pvariv {

std::pair<PanelDataset, InstrumentSeries> prepare_fiscal_panel(const PanelDataset& raw,
                                                               int growth_k, InstrumentMode mode,
                                                               const std::string& spending_var,
                                                               const std::string& gdp_var) {
    raw.validate();
    require(raw.n_vars() >= 2, errc::invalid_argument,
            "need a spending and a gdp column in the raw panel");
    const std::string spend = spending_var.empty() ? raw.var_names[0] : spending_var;
    const std::string gdp = gdp_var.empty() ? raw.var_names[1] : gdp_var;
    require(spend != gdp, errc::invalid_argument, "spending and gdp variables must differ");

    std::vector<GrowthSpec> specs;
    specs.push_back({growth_k, spend, gdp, spend + "_growth"});
    specs.push_back({growth_k, gdp, gdp, gdp + "_growth"});
    PanelDataset growth = growth_transform(raw, specs);
    InstrumentSeries z = build_instrument(raw, spend, gdp, mode, growth_k);
    return {std::move(growth), std::move(z)};
}

EstimateBundle run_estimate(const PanelDataset& growth, const InstrumentSeries& z, int lags,
                            const PipelineOptions& opts) {
    EstimateBundle out;
    out.model = fit_pvar(growth, lags);
    const AlignedSample sample = align_instrument(out.model, z);
    out.ident = identify(out.model, sample, opts.normalization, opts.variance);
    out.autocorr = residual_autocorrelation_check(out.model);
    out.normality = normality_test(out.model);

    InferenceOptions inf_opts;
    inf_opts.variance = opts.variance;
    inf_opts.grid.n_points = opts.grid_points;
    inf_opts.shock_size = 1.0;  // beta units
    const int m = out.model.n_vars();
    for (int j = 1; j < m; ++j)
        out.beta_ar_cs.push_back(
            ar_confidence_set(out.model, sample, 0, j, opts.alpha, inf_opts));
    return out;
}

IrfBundle run_irf(const PvarModel& model, const InstrumentSeries& z,
                  const PipelineOptions& opts) {
    const AlignedSample sample = align_instrument(model, z);
    const IdentifyResult ident = identify(model, sample, opts.normalization, opts.variance);

    IrfBundle out;
    out.irf = irf_point(model, ident.column, opts.horizon, opts.shock_size);

    const IrfInference inf(model, sample, opts.variance);
    InferenceOptions inf_opts;
    inf_opts.variance = opts.variance;
    inf_opts.grid.n_points = opts.grid_points;
    // The inversion runs on the unit-normalized ratio; under the
    // standardized normalization responses are that ratio times the policy
    // impact r11, which scales the bands (r11 treated as fixed).
    inf_opts.shock_size = opts.normalization == Normalization::unit
                              ? opts.shock_size
                              : opts.shock_size * ident.column.r_col(0);

    const int m = model.n_vars();
    out.cs.assign(opts.horizon + 1, std::vector<ConfidenceSet>(m));
    for (int h = 0; h <= opts.horizon; ++h)
        for (int v = 0; v < m; ++v)
            out.cs[h][v] =
                invert_ar_quadratic(inf.lambda_quadratic(h, v, false), opts.alpha, inf_opts);
    return out;
}

}  // namespace pvariv
