#include "pvariv/panel_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "pvariv/errors.hpp"

namespace pvariv {

int PanelDataset::var_index(const std::string& name) const {
    for (int v = 0; v < n_vars(); ++v)
        if (var_names[v] == name) return v;
    fail(errc::invalid_argument, "unknown variable '" + name + "'");
}

void PanelDataset::validate() const {
    require(n_units() >= 2, errc::unbalanced_panel, "panel needs at least 2 units");
    require(n_periods() >= 1, errc::unbalanced_panel, "panel needs at least 1 period");
    require(n_vars() >= 1, errc::invalid_argument, "panel needs at least 1 variable");
    for (int t = 1; t < n_periods(); ++t)
        require(time_ids[t] > time_ids[t - 1], errc::invalid_argument,
                "time ids must be strictly increasing");
    require(static_cast<int>(data.size()) == n_units(), errc::unbalanced_panel,
            "unit count mismatch");
    for (int i = 0; i < n_units(); ++i) {
        require(data[i].rows() == n_periods() && data[i].cols() == n_vars(),
                errc::unbalanced_panel, "block shape mismatch for unit " + unit_ids[i]);
        require(data[i].allFinite(), errc::parse_error,
                "non-finite value for unit " + unit_ids[i]);
    }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    for (auto& s : out) {
        const auto b = s.find_first_not_of(" \t");
        const auto e = s.find_last_not_of(" \t");
        s = (b == std::string::npos) ? std::string() : s.substr(b, e - b + 1);
    }
    return out;
}

double parse_double(const std::string& s, int line_no, const std::string& col) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v))
        fail(errc::parse_error, "line " + std::to_string(line_no) + ", column '" + col +
                                    "': cannot parse '" + s + "' as a finite number");
    return v;
}

long long parse_time(const std::string& s, int line_no) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        fail(errc::parse_error,
             "line " + std::to_string(line_no) + ": cannot parse time '" + s + "' as an integer");
    return v;
}

}  // namespace

PanelDataset parse_csv(const std::string& text, const CsvSchema& schema) {
    std::istringstream in(text);
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), errc::parse_error, "missing header row");
    const auto header = split_csv_line(line);

    int unit_col = -1, time_col = -1;
    std::vector<int> value_idx;
    std::vector<std::string> value_names;
    for (int c = 0; c < static_cast<int>(header.size()); ++c) {
        if (header[c] == schema.unit_col) {
            unit_col = c;
        } else if (header[c] == schema.time_col) {
            time_col = c;
        } else if (schema.value_cols.empty() ||
                   std::find(schema.value_cols.begin(), schema.value_cols.end(), header[c]) !=
                       schema.value_cols.end()) {
            value_idx.push_back(c);
            value_names.push_back(header[c]);
        }
    }
    require(unit_col >= 0, errc::parse_error, "missing '" + schema.unit_col + "' column");
    require(time_col >= 0, errc::parse_error, "missing '" + schema.time_col + "' column");
    for (const auto& want : schema.value_cols)
        require(std::find(value_names.begin(), value_names.end(), want) != value_names.end(),
                errc::parse_error, "missing variable column '" + want + "'");
    require(!value_idx.empty(), errc::parse_error, "no variable columns found");

    struct Row {
        std::string unit;
        long long time;
        std::vector<double> vals;
    };
    std::vector<Row> rows;
    std::set<std::string> units;
    std::set<long long> times;
    std::set<std::pair<std::string, long long>> seen;

    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        require(fields.size() == header.size(), errc::parse_error,
                "line " + std::to_string(line_no) + ": expected " +
                    std::to_string(header.size()) + " fields, got " +
                    std::to_string(fields.size()));
        Row r;
        r.unit = fields[unit_col];
        require(!r.unit.empty(), errc::parse_error,
                "line " + std::to_string(line_no) + ": empty unit id");
        r.time = parse_time(fields[time_col], line_no);
        if (!seen.insert({r.unit, r.time}).second)
            fail(errc::duplicate_key, "duplicate (unit,time) = (" + r.unit + "," +
                                          std::to_string(r.time) + ")");
        r.vals.reserve(value_idx.size());
        for (size_t v = 0; v < value_idx.size(); ++v)
            r.vals.push_back(parse_double(fields[value_idx[v]], line_no, value_names[v]));
        rows.push_back(std::move(r));
        units.insert(rows.back().unit);
        times.insert(rows.back().time);
    }
    require(!rows.empty(), errc::parse_error, "no data rows");

    PanelDataset ds;
    ds.unit_ids.assign(units.begin(), units.end());
    ds.time_ids.assign(times.begin(), times.end());
    ds.var_names = value_names;

    const int N = ds.n_units();
    const int T = ds.n_periods();
    const int m = ds.n_vars();
    if (static_cast<long long>(rows.size()) != static_cast<long long>(N) * T)
        fail(errc::unbalanced_panel, "panel is unbalanced: " + std::to_string(rows.size()) +
                                         " rows for " + std::to_string(N) + " units x " +
                                         std::to_string(T) + " periods");

    std::map<std::string, int> unit_pos;
    for (int i = 0; i < N; ++i) unit_pos[ds.unit_ids[i]] = i;
    std::map<long long, int> time_pos;
    for (int t = 0; t < T; ++t) time_pos[ds.time_ids[t]] = t;

    ds.data.assign(N, Eigen::MatrixXd::Constant(T, m, std::numeric_limits<double>::quiet_NaN()));
    for (const auto& r : rows) {
        auto& block = ds.data[unit_pos[r.unit]];
        const int t = time_pos[r.time];
        for (int v = 0; v < m; ++v) block(t, v) = r.vals[v];
    }
    for (int i = 0; i < N; ++i)
        if (!ds.data[i].allFinite())
            fail(errc::unbalanced_panel, "panel is unbalanced: missing cells for unit " +
                                             ds.unit_ids[i]);
    ds.validate();
    return ds;
}

PanelDataset load_csv(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), errc::io_error, "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), schema);
}

const char* instrument_mode_name(InstrumentMode m) {
    switch (m) {
        case InstrumentMode::common_aggregate: return "common_aggregate";
        case InstrumentMode::share_weighted: return "share_weighted";
        case InstrumentMode::synthetic: return "synthetic";
    }
    return "?";
}

PanelDataset growth_transform(const PanelDataset& ds, const std::vector<GrowthSpec>& specs) {
    ds.validate();
    require(!specs.empty(), errc::invalid_argument, "no growth specs given");
    const int k = specs.front().horizon_k;
    require(k >= 1, errc::invalid_argument, "growth horizon must be >= 1");
    for (const auto& s : specs)
        require(s.horizon_k == k, errc::invalid_argument,
                "all growth specs must share one horizon");
    require(ds.n_periods() > k, errc::too_few_periods,
            "need more than " + std::to_string(k) + " periods for a k=" + std::to_string(k) +
                " growth transform");

    const int N = ds.n_units();
    const int Tp = ds.n_periods() - k;

    PanelDataset out;
    out.unit_ids = ds.unit_ids;
    out.time_ids.assign(ds.time_ids.begin() + k, ds.time_ids.end());
    for (const auto& s : specs)
        out.var_names.push_back(s.output_name.empty() ? s.numerator_var + "_growth"
                                                      : s.output_name);
    {
        std::set<std::string> names(out.var_names.begin(), out.var_names.end());
        require(names.size() == out.var_names.size(), errc::invalid_argument,
                "duplicate output variable names");
    }

    out.data.assign(N, Eigen::MatrixXd(Tp, static_cast<int>(specs.size())));
    for (size_t sidx = 0; sidx < specs.size(); ++sidx) {
        const int num = ds.var_index(specs[sidx].numerator_var);
        const int den = ds.var_index(specs[sidx].denominator_var);
        for (int i = 0; i < N; ++i) {
            for (int t = 0; t < Tp; ++t) {
                const double d = ds.data[i](t, den);
                if (!(d > 0.0))
                    fail(errc::degenerate_denominator,
                         "non-positive denominator for unit " + ds.unit_ids[i] + " at time " +
                             std::to_string(ds.time_ids[t]));
                out.data[i](t, static_cast<int>(sidx)) =
                    (ds.data[i](t + k, num) - ds.data[i](t, num)) / d;
            }
        }
    }
    out.validate();
    return out;
}

InstrumentSeries build_instrument(const PanelDataset& ds, const std::string& spending_var,
                                  const std::string& gdp_var, InstrumentMode mode, int horizon_k) {
    ds.validate();
    require(mode != InstrumentMode::synthetic, errc::invalid_argument,
            "synthetic instruments come from the simulation harness");
    require(horizon_k >= 1, errc::invalid_argument, "growth horizon must be >= 1");
    require(ds.n_periods() > horizon_k, errc::too_few_periods, "too few periods for instrument");
    const int exp_v = ds.var_index(spending_var);
    const int gdp_v = ds.var_index(gdp_var);

    const int N = ds.n_units();
    const int T = ds.n_periods();
    const int Tp = T - horizon_k;

    Eigen::VectorXd nat_exp = Eigen::VectorXd::Zero(T);
    Eigen::VectorXd nat_gdp = Eigen::VectorXd::Zero(T);
    for (int i = 0; i < N; ++i) {
        nat_exp += ds.data[i].col(exp_v);
        nat_gdp += ds.data[i].col(gdp_v);
    }

    Eigen::VectorXd growth(Tp);
    for (int t = 0; t < Tp; ++t) {
        if (!(nat_gdp(t) > 0.0))
            fail(errc::degenerate_denominator,
                 "non-positive national gdp at time " + std::to_string(ds.time_ids[t]));
        growth(t) = (nat_exp(t + horizon_k) - nat_exp(t)) / nat_gdp(t);
    }

    InstrumentSeries z;
    z.construction = mode;
    z.time_ids.assign(ds.time_ids.begin() + horizon_k, ds.time_ids.end());
    z.values.resize(N, Tp);
    if (mode == InstrumentMode::common_aggregate) {
        for (int i = 0; i < N; ++i) z.values.row(i) = growth.transpose();
    } else {
        // sample-mean share of national spending per unit
        Eigen::VectorXd share = Eigen::VectorXd::Zero(N);
        for (int t = 0; t < T; ++t) {
            if (!(nat_exp(t) > 0.0))
                fail(errc::degenerate_denominator,
                     "non-positive national spending at time " + std::to_string(ds.time_ids[t]));
            for (int i = 0; i < N; ++i) share(i) += ds.data[i](t, exp_v) / nat_exp(t);
        }
        share /= static_cast<double>(T);
        for (int i = 0; i < N; ++i) z.values.row(i) = share(i) * growth.transpose();
    }
    require(z.values.allFinite(), errc::degenerate_denominator, "instrument has non-finite values");
    return z;
}

}  // namespace pvariv
