#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace pvariv {

/// Balanced N x T x m panel. data[i] is the T x m block of unit i; every
/// cell is present and finite, time ids are strictly increasing.
struct PanelDataset {
    std::vector<std::string> unit_ids;
    std::vector<long long> time_ids;
    std::vector<std::string> var_names;
    std::vector<Eigen::MatrixXd> data;  // data[i](t, v)

    int n_units() const { return static_cast<int>(unit_ids.size()); }
    int n_periods() const { return static_cast<int>(time_ids.size()); }
    int n_vars() const { return static_cast<int>(var_names.size()); }

    double value(int i, int t, int v) const { return data[i](t, v); }
    int var_index(const std::string& name) const;

    /// Enforces the dataset invariants; throws on violation.
    void validate() const;
};

struct GrowthSpec {
    int horizon_k = 1;
    std::string numerator_var;
    std::string denominator_var;
    std::string output_name;  // defaults to "<numerator>_growth"
};

enum class InstrumentMode { common_aggregate, share_weighted, synthetic };

const char* instrument_mode_name(InstrumentMode m);

/// Instrument panel aligned to a (growth-transformed) dataset's time ids.
struct InstrumentSeries {
    Eigen::MatrixXd values;  // N x T'
    std::vector<long long> time_ids;
    InstrumentMode construction = InstrumentMode::common_aggregate;
};

struct CsvSchema {
    std::string unit_col = "unit";
    std::string time_col = "time";
    std::vector<std::string> value_cols;  // empty = every other column
};

/// Reads a long-format CSV (header `unit,time,<var>...`) into a balanced
/// panel. Rows are sorted by (unit, time).
PanelDataset load_csv(const std::string& path, const CsvSchema& schema = {});

/// Parses CSV text instead of a file; same contract as load_csv.
PanelDataset parse_csv(const std::string& text, const CsvSchema& schema = {});

/// Applies k-period growth transforms: out = (num_t - num_{t-k}) / den_{t-k}.
/// All specs must share the same horizon; the result has T - k periods.
PanelDataset growth_transform(const PanelDataset& ds, const std::vector<GrowthSpec>& specs);

/// Builds the external instrument from national aggregates of the raw panel.
/// common_aggregate: Z_{i,t} = national spending growth (identical across i);
/// share_weighted:   Z_{i,t} = s_i * national growth, s_i the unit's
/// sample-mean share of national spending.
InstrumentSeries build_instrument(const PanelDataset& ds, const std::string& spending_var,
                                  const std::string& gdp_var, InstrumentMode mode,
                                  int horizon_k = 1);

}  // namespace pvariv
