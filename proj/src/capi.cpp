#include "pvariv/pvariv.h"

#include <cstring>
#include <json.hpp>
#include <string>

#include "pvariv/config.hpp"
#include "pvariv/errors.hpp"
#include "pvariv/inference.hpp"
#include "pvariv/montecarlo.hpp"
#include "pvariv/panel_data.hpp"
#include "pvariv/pipeline.hpp"
#include "pvariv/pvar.hpp"
#include "pvariv/serialize.hpp"

using nlohmann::json;

struct pvariv_panel {
    pvariv::PanelDataset ds;
};
struct pvariv_instrument {
    pvariv::InstrumentSeries z;
};
struct pvariv_model {
    pvariv::PvarModel m;
};

namespace {

thread_local std::string g_last_error;

template <typename Fn>
pvariv_status guarded(Fn&& fn) {
    try {
        fn();
        return PVARIV_OK;
    } catch (const pvariv::Error& e) {
        g_last_error = e.what();
        return e.data_error() ? PVARIV_ERR_DATA : PVARIV_ERR_NUMERIC;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return PVARIV_ERR_NUMERIC;
    } catch (...) {
        g_last_error = "unknown error";
        return PVARIV_ERR_NUMERIC;
    }
}

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void check_ptr(const void* p, const char* what) {
    pvariv::require(p != nullptr, pvariv::errc::invalid_argument,
                    std::string(what) + " must not be NULL");
}

pvariv::PipelineOptions options_from_json_text(const char* options_json) {
    pvariv::PipelineOptions opts;
    if (options_json == nullptr || *options_json == '\0') return opts;
    json j;
    try {
        j = json::parse(options_json);
    } catch (const json::exception& e) {
        pvariv::fail(pvariv::errc::parse_error, std::string("options JSON: ") + e.what());
    }
    if (j.contains("alpha")) opts.alpha = j["alpha"].get<double>();
    if (j.contains("horizon")) opts.horizon = j["horizon"].get<int>();
    if (j.contains("shock_size")) opts.shock_size = j["shock_size"].get<double>();
    if (j.contains("grid_points")) opts.grid_points = j["grid_points"].get<int>();
    if (j.contains("normalization")) {
        const std::string v = j["normalization"].get<std::string>();
        pvariv::require(v == "unit" || v == "standardized", pvariv::errc::parse_error,
                        "normalization must be 'unit' or 'standardized'");
        opts.normalization = v == "unit" ? pvariv::Normalization::unit
                                         : pvariv::Normalization::standardized;
    }
    if (j.contains("variance")) {
        const std::string v = j["variance"].get<std::string>();
        pvariv::require(v == "iid" || v == "cluster", pvariv::errc::parse_error,
                        "variance must be 'iid' or 'cluster'");
        opts.variance =
            v == "iid" ? pvariv::VarianceMode::iid : pvariv::VarianceMode::cluster;
    }
    return opts;
}

pvariv_status mc_run(pvariv::McConfig cfg, int64_t seed_override, char** report_csv_out,
                     char** summary_json_out) {
    if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
    const pvariv::McReport rep = pvariv::coverage_experiment(cfg);
    if (report_csv_out != nullptr) *report_csv_out = dup_string(pvariv::mc_report_to_csv(rep));
    if (summary_json_out != nullptr)
        *summary_json_out = dup_string(pvariv::mc_report_to_json_string(rep, cfg));
    return PVARIV_OK;
}

}  // namespace

extern "C" {

const char* pvariv_version(void) { return "0.1.0"; }

const char* pvariv_last_error(void) { return g_last_error.c_str(); }

void pvariv_string_free(char* s) { delete[] s; }
void pvariv_panel_free(pvariv_panel* p) { delete p; }
void pvariv_instrument_free(pvariv_instrument* z) { delete z; }
void pvariv_model_free(pvariv_model* m) { delete m; }

pvariv_status pvariv_panel_read_csv(const char* path, pvariv_panel** out) {
    return guarded([&] {
        check_ptr(path, "path");
        check_ptr(out, "out");
        *out = new pvariv_panel{pvariv::load_csv(path)};
    });
}

pvariv_status pvariv_panel_parse_csv(const char* text, pvariv_panel** out) {
    return guarded([&] {
        check_ptr(text, "text");
        check_ptr(out, "out");
        *out = new pvariv_panel{pvariv::parse_csv(text)};
    });
}

pvariv_status pvariv_panel_dims(const pvariv_panel* p, int* n_units, int* n_periods,
                                int* n_vars) {
    return guarded([&] {
        check_ptr(p, "panel");
        if (n_units != nullptr) *n_units = p->ds.n_units();
        if (n_periods != nullptr) *n_periods = p->ds.n_periods();
        if (n_vars != nullptr) *n_vars = p->ds.n_vars();
    });
}

pvariv_status pvariv_panel_growth_transform(const pvariv_panel* p, const char* specs_json,
                                            pvariv_panel** out) {
    return guarded([&] {
        check_ptr(p, "panel");
        check_ptr(specs_json, "specs_json");
        check_ptr(out, "out");
        json j;
        try {
            j = json::parse(specs_json);
        } catch (const json::exception& e) {
            pvariv::fail(pvariv::errc::parse_error, std::string("specs JSON: ") + e.what());
        }
        pvariv::require(j.is_array() && !j.empty(), pvariv::errc::parse_error,
                        "specs JSON must be a non-empty array");
        std::vector<pvariv::GrowthSpec> specs;
        for (const auto& s : j) {
            pvariv::GrowthSpec gs;
            gs.horizon_k = s.value("k", 1);
            gs.numerator_var = s.at("num").get<std::string>();
            gs.denominator_var = s.at("den").get<std::string>();
            gs.output_name = s.value("name", std::string());
            specs.push_back(std::move(gs));
        }
        *out = new pvariv_panel{pvariv::growth_transform(p->ds, specs)};
    });
}

pvariv_status pvariv_instrument_build(const pvariv_panel* raw, const char* spending_var,
                                      const char* gdp_var, pvariv_instrument_mode mode,
                                      int horizon_k, pvariv_instrument** out) {
    return guarded([&] {
        check_ptr(raw, "panel");
        check_ptr(spending_var, "spending_var");
        check_ptr(gdp_var, "gdp_var");
        check_ptr(out, "out");
        const auto m = mode == PVARIV_INSTRUMENT_AGGREGATE
                           ? pvariv::InstrumentMode::common_aggregate
                           : pvariv::InstrumentMode::share_weighted;
        *out = new pvariv_instrument{
            pvariv::build_instrument(raw->ds, spending_var, gdp_var, m, horizon_k)};
    });
}

pvariv_status pvariv_prepare_fiscal(const pvariv_panel* raw, int growth_k,
                                    pvariv_instrument_mode mode, const char* spending_var,
                                    const char* gdp_var, pvariv_panel** growth_out,
                                    pvariv_instrument** z_out) {
    return guarded([&] {
        check_ptr(raw, "panel");
        check_ptr(growth_out, "growth_out");
        check_ptr(z_out, "z_out");
        const auto m = mode == PVARIV_INSTRUMENT_AGGREGATE
                           ? pvariv::InstrumentMode::common_aggregate
                           : pvariv::InstrumentMode::share_weighted;
        auto [growth, z] = pvariv::prepare_fiscal_panel(
            raw->ds, growth_k, m, spending_var != nullptr ? spending_var : "",
            gdp_var != nullptr ? gdp_var : "");
        *growth_out = new pvariv_panel{std::move(growth)};
        *z_out = new pvariv_instrument{std::move(z)};
    });
}

pvariv_status pvariv_fit(const pvariv_panel* growth, int lags, pvariv_model** out) {
    return guarded([&] {
        check_ptr(growth, "panel");
        check_ptr(out, "out");
        *out = new pvariv_model{pvariv::fit_pvar(growth->ds, lags)};
    });
}

pvariv_status pvariv_lag_select_csv(const pvariv_panel* growth, int p_max, char** csv_out) {
    return guarded([&] {
        check_ptr(growth, "panel");
        check_ptr(csv_out, "csv_out");
        *csv_out = dup_string(pvariv::lag_report_to_csv(pvariv::select_lag(growth->ds, p_max)));
    });
}

pvariv_status pvariv_lag_select_best(const pvariv_panel* growth, int p_max,
                                     const char* criterion, int* best_p) {
    return guarded([&] {
        check_ptr(growth, "panel");
        check_ptr(criterion, "criterion");
        check_ptr(best_p, "best_p");
        const pvariv::LagSelectionReport rep = pvariv::select_lag(growth->ds, p_max);
        const std::string c = criterion;
        if (c == "mbic") {
            *best_p = rep.best_mbic;
        } else if (c == "maic") {
            *best_p = rep.best_maic;
        } else if (c == "mqic") {
            *best_p = rep.best_mqic;
        } else {
            pvariv::fail(pvariv::errc::invalid_argument,
                         "criterion must be 'mbic', 'maic' or 'mqic'");
        }
    });
}

pvariv_status pvariv_model_to_json(const pvariv_model* m, char** json_out) {
    return guarded([&] {
        check_ptr(m, "model");
        check_ptr(json_out, "json_out");
        *json_out = dup_string(pvariv::model_to_json_string(m->m));
    });
}

pvariv_status pvariv_identify_json(const pvariv_model* m, const pvariv_instrument* z,
                                   const char* options_json, char** iv_json_out) {
    return guarded([&] {
        check_ptr(m, "model");
        check_ptr(z, "instrument");
        check_ptr(iv_json_out, "iv_json_out");
        const auto opts = options_from_json_text(options_json);
        const auto res = pvariv::identify(m->m, z->z, opts.normalization, opts.variance);
        *iv_json_out = dup_string(pvariv::iv_estimate_to_json_string(res.iv));
    });
}

pvariv_status pvariv_estimate_tables(const pvariv_model* m, const pvariv_instrument* z,
                                     const char* options_json, char** table2_csv_out,
                                     char** table3_csv_out, char** diagnostics_csv_out) {
    return guarded([&] {
        check_ptr(m, "model");
        check_ptr(z, "instrument");
        const auto opts = options_from_json_text(options_json);

        const pvariv::AlignedSample sample = pvariv::align_instrument(m->m, z->z);
        const auto ident = pvariv::identify(m->m, sample, opts.normalization, opts.variance);

        if (table2_csv_out != nullptr) {
            pvariv::InferenceOptions inf_opts;
            inf_opts.variance = opts.variance;
            inf_opts.grid.n_points = opts.grid_points;
            std::vector<pvariv::ConfidenceSet> beta_cs;
            for (int j = 1; j < m->m.n_vars(); ++j)
                beta_cs.push_back(
                    pvariv::ar_confidence_set(m->m, sample, 0, j, opts.alpha, inf_opts));
            std::vector<std::string> outcomes(m->m.var_names.begin() + 1,
                                              m->m.var_names.end());
            *table2_csv_out = dup_string(pvariv::table2_csv(ident.iv, beta_cs, outcomes));
        }
        if (table3_csv_out != nullptr)
            *table3_csv_out = dup_string(pvariv::table3_csv(m->m, opts.variance));
        if (diagnostics_csv_out != nullptr)
            *diagnostics_csv_out = dup_string(pvariv::diagnostics_to_csv(
                pvariv::residual_autocorrelation_check(m->m), pvariv::normality_test(m->m)));
    });
}

pvariv_status pvariv_irf_csv(const pvariv_model* m, const pvariv_instrument* z,
                             const char* options_json, char** csv_out) {
    return guarded([&] {
        check_ptr(m, "model");
        check_ptr(z, "instrument");
        check_ptr(csv_out, "csv_out");
        const auto opts = options_from_json_text(options_json);
        const pvariv::IrfBundle bundle = pvariv::run_irf(m->m, z->z, opts);
        *csv_out = dup_string(pvariv::irf_to_csv(bundle.irf, bundle.cs));
    });
}

pvariv_status pvariv_mc_run_file(const char* config_path, int64_t seed_override,
                                 char** report_csv_out, char** summary_json_out) {
    return guarded([&] {
        check_ptr(config_path, "config_path");
        mc_run(pvariv::load_mc_config(config_path), seed_override, report_csv_out,
               summary_json_out);
    });
}

pvariv_status pvariv_mc_run_json(const char* config_json, int64_t seed_override,
                                 char** report_csv_out, char** summary_json_out) {
    return guarded([&] {
        check_ptr(config_json, "config_json");
        json j;
        try {
            j = json::parse(config_json);
        } catch (const json::exception& e) {
            pvariv::fail(pvariv::errc::parse_error, std::string("config JSON: ") + e.what());
        }
        mc_run(pvariv::mc_config_from_json(j), seed_override, report_csv_out, summary_json_out);
    });
}

}  // extern "C"
