/* C interface to the pvariv library: panel-VAR estimation with external
 * instrument identification, impulse responses with Anderson-Rubin
 * confidence sets, and the Monte Carlo coverage harness.
 *
 * Conventions:
 *   - Every entry point returns a pvariv_status; results come back through
 *     out-parameters.
 *   - Objects are opaque handles released with the matching _free function;
 *     freeing NULL is a no-op.
 *   - Strings returned through char** are owned by the caller and released
 *     with pvariv_string_free.
 *   - On failure, pvariv_last_error() describes the problem for the calling
 *     thread.
 */
#ifndef PVARIV_H
#define PVARIV_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pvariv_status {
    PVARIV_OK = 0,
    PVARIV_ERR_DATA = 2,    /* data or configuration problem */
    PVARIV_ERR_NUMERIC = 3  /* numerical failure */
} pvariv_status;

typedef enum pvariv_instrument_mode {
    PVARIV_INSTRUMENT_AGGREGATE = 0,
    PVARIV_INSTRUMENT_SHARE_WEIGHTED = 1
} pvariv_instrument_mode;

typedef struct pvariv_panel pvariv_panel;
typedef struct pvariv_instrument pvariv_instrument;
typedef struct pvariv_model pvariv_model;

const char* pvariv_version(void);

/* Message for the most recent failure on this thread. */
const char* pvariv_last_error(void);

void pvariv_string_free(char* s);
void pvariv_panel_free(pvariv_panel* p);
void pvariv_instrument_free(pvariv_instrument* z);
void pvariv_model_free(pvariv_model* m);

/* -- data ---------------------------------------------------------------- */

/* Long-format CSV with a header row `unit,time,<var>...`. */
pvariv_status pvariv_panel_read_csv(const char* path, pvariv_panel** out);
pvariv_status pvariv_panel_parse_csv(const char* text, pvariv_panel** out);

pvariv_status pvariv_panel_dims(const pvariv_panel* p, int* n_units, int* n_periods,
                                int* n_vars);

/* specs_json: array of {"k":int,"num":name,"den":name[,"name":out_name]}. */
pvariv_status pvariv_panel_growth_transform(const pvariv_panel* p, const char* specs_json,
                                            pvariv_panel** out);

pvariv_status pvariv_instrument_build(const pvariv_panel* raw, const char* spending_var,
                                      const char* gdp_var, pvariv_instrument_mode mode,
                                      int horizon_k, pvariv_instrument** out);

/* Growth panel plus instrument in one step. Empty variable names pick the
 * first (spending) and second (gdp) CSV columns. */
pvariv_status pvariv_prepare_fiscal(const pvariv_panel* raw, int growth_k,
                                    pvariv_instrument_mode mode, const char* spending_var,
                                    const char* gdp_var, pvariv_panel** growth_out,
                                    pvariv_instrument** z_out);

/* -- estimation ---------------------------------------------------------- */

pvariv_status pvariv_fit(const pvariv_panel* growth, int lags, pvariv_model** out);

pvariv_status pvariv_lag_select_csv(const pvariv_panel* growth, int p_max, char** csv_out);

/* criterion: "mbic", "maic" or "mqic". */
pvariv_status pvariv_lag_select_best(const pvariv_panel* growth, int p_max,
                                     const char* criterion, int* best_p);

pvariv_status pvariv_model_to_json(const pvariv_model* m, char** json_out);

/* options_json keys (all optional): alpha, horizon, shock_size,
 * normalization ("unit"|"standardized"), variance ("iid"|"cluster"),
 * grid_points. */
pvariv_status pvariv_identify_json(const pvariv_model* m, const pvariv_instrument* z,
                                   const char* options_json, char** iv_json_out);

/* Estimation tables: first/second stage, slope coefficients with CIs, and
 * residual diagnostics. Any of the out-pointers may be NULL. */
pvariv_status pvariv_estimate_tables(const pvariv_model* m, const pvariv_instrument* z,
                                     const char* options_json, char** table2_csv_out,
                                     char** table3_csv_out, char** diagnostics_csv_out);

/* Plot data: horizon, variable, response, cumulative, cs_lo, cs_hi, segment. */
pvariv_status pvariv_irf_csv(const pvariv_model* m, const pvariv_instrument* z,
                             const char* options_json, char** csv_out);

/* -- Monte Carlo --------------------------------------------------------- */

/* config_path: .json or .toml; seed_override >= 0 replaces the config seed. */
pvariv_status pvariv_mc_run_file(const char* config_path, int64_t seed_override,
                                 char** report_csv_out, char** summary_json_out);

pvariv_status pvariv_mc_run_json(const char* config_json, int64_t seed_override,
                                 char** report_csv_out, char** summary_json_out);

#ifdef __cplusplus
}
#endif

#endif /* PVARIV_H */
