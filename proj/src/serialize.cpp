#include "pvariv/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <sstream>

#include "pvariv/config.hpp"
#include "pvariv/errors.hpp"
#include "pvariv/stats.hpp"

namespace pvariv {

namespace {

using nlohmann::json;

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

json row_major(const Eigen::MatrixXd& m) {
    json arr = json::array();
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) arr.push_back(m(r, c));
    return arr;
}

Eigen::MatrixXd from_row_major(const json& arr, int rows, int cols, const std::string& what) {
    require(static_cast<int>(arr.size()) == rows * cols, errc::parse_error,
            what + " has wrong length");
    Eigen::MatrixXd m(rows, cols);
    int k = 0;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = arr[k++].get<double>();
    return m;
}

}  // namespace

std::string model_to_json_string(const PvarModel& model) {
    json j;
    j["p"] = model.p;
    j["m"] = model.n_vars();
    j["n_units"] = model.n_units;
    j["var_names"] = model.var_names;
    json phi = json::array();
    for (const auto& ph : model.phi) phi.push_back(row_major(ph));
    j["phi"] = phi;
    j["sigma"] = row_major(model.sigma);
    j["mu"] = row_major(model.mu);
    j["nobs"] = model.nobs;
    j["sample_len"] = model.sample_len;
    j["sample_time_ids"] = model.sample_time_ids;
    j["spectral_radius"] = model.spectral_radius;
    j["stationary"] = model.stationary;
    j["dof_corrected"] = model.dof_corrected;
    return j.dump(2);
}

PvarModel model_from_json_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        fail(errc::parse_error, std::string("model JSON: ") + e.what());
    }
    PvarModel m;
    try {
        m.p = j.at("p").get<int>();
        const int mv = j.at("m").get<int>();
        m.n_units = j.at("n_units").get<int>();
        m.var_names = j.at("var_names").get<std::vector<std::string>>();
        require(static_cast<int>(m.var_names.size()) == mv, errc::parse_error,
                "var_names length mismatch");
        for (const auto& lag : j.at("phi")) m.phi.push_back(from_row_major(lag, mv, mv, "phi"));
        require(static_cast<int>(m.phi.size()) == m.p, errc::parse_error, "phi lag count");
        m.sigma = from_row_major(j.at("sigma"), mv, mv, "sigma");
        m.mu = from_row_major(j.at("mu"), m.n_units, mv, "mu");
        m.nobs = j.at("nobs").get<long long>();
        m.sample_len = j.at("sample_len").get<int>();
        m.sample_time_ids = j.at("sample_time_ids").get<std::vector<long long>>();
        m.spectral_radius = j.at("spectral_radius").get<double>();
        m.stationary = j.at("stationary").get<bool>();
        m.dof_corrected = j.at("dof_corrected").get<bool>();
    } catch (const json::exception& e) {
        fail(errc::parse_error, std::string("model JSON: ") + e.what());
    }
    return m;
}

std::string iv_estimate_to_json_string(const IvEstimate& iv) {
    json j;
    j["delta"] = iv.delta;
    j["ci"] = {iv.delta_ci_lo, iv.delta_ci_hi};
    j["f"] = iv.f_capped ? json("inf") : json(iv.f_stat);
    j["f_capped"] = iv.f_capped;
    j["rho"] = std::vector<double>(iv.rho.begin(), iv.rho.end());
    j["beta"] = std::vector<double>(iv.beta.begin(), iv.beta.end());
    j["ar"] = iv.ar_stat;
    j["ar_all"] = std::vector<double>(iv.ar_stat_all.begin(), iv.ar_stat_all.end());
    j["normalization"] = normalization_name(iv.normalization);
    j["variance"] = variance_mode_name(iv.variance);
    if (iv.shock_scale)
        j["shock_scale"] = std::vector<double>(iv.shock_scale->begin(), iv.shock_scale->end());
    return j.dump(2);
}

std::string lag_report_to_csv(const LagSelectionReport& rep) {
    std::ostringstream out;
    out << "p,mbic,maic,mqic,selected_mbic,selected_maic,selected_mqic\n";
    for (size_t i = 0; i < rep.lags.size(); ++i) {
        const int p = rep.lags[i];
        out << p << ',' << fmt(rep.mbic[i]) << ',' << fmt(rep.maic[i]) << ',' << fmt(rep.mqic[i])
            << ',' << (p == rep.best_mbic ? 1 : 0) << ',' << (p == rep.best_maic ? 1 : 0) << ','
            << (p == rep.best_mqic ? 1 : 0) << '\n';
    }
    return out.str();
}

std::string diagnostics_to_csv(const DiagnosticsReport& autocorr,
                               const DiagnosticsReport& normality) {
    std::ostringstream out;
    out << "check,variable,statistic,ci_lo,ci_hi,p_value,clean\n";
    for (const auto& row : autocorr.autocorr)
        out << "residual_autocorrelation," << row.var << ',' << fmt(row.coef) << ','
            << fmt(row.ci_lo) << ',' << fmt(row.ci_hi) << ",," << (autocorr.clean ? 1 : 0)
            << '\n';
    for (const auto& row : normality.normality)
        out << "shapiro_wilk," << row.var << ',' << fmt(row.w) << ",,," << fmt(row.p_value)
            << ",\n";
    return out.str();
}

std::string irf_to_csv(const IrfResult& irf,
                       const std::vector<std::vector<ConfidenceSet>>& cs_per_h_var) {
    std::ostringstream out;
    out << "horizon,variable,response,cumulative,cs_lo,cs_hi,segment\n";
    const int m = static_cast<int>(irf.var_names.size());
    for (int h = 0; h <= irf.horizon; ++h) {
        for (int v = 0; v < m; ++v) {
            const ConfidenceSet* cs = nullptr;
            if (h < static_cast<int>(cs_per_h_var.size()) &&
                v < static_cast<int>(cs_per_h_var[h].size()))
                cs = &cs_per_h_var[h][v];
            const std::string base = std::to_string(h) + "," + irf.var_names[v] + "," +
                                     fmt(irf.responses(h, v)) + "," + fmt(irf.cumulative(h, v));
            if (cs == nullptr || cs->segments.empty()) {
                out << base << ",,,0\n";
            } else {
                for (size_t seg = 0; seg < cs->segments.size(); ++seg)
                    out << base << ',' << fmt(cs->segments[seg].first) << ','
                        << fmt(cs->segments[seg].second) << ',' << seg << '\n';
            }
        }
    }
    return out.str();
}

std::string table2_csv(const IvEstimate& iv, const std::vector<ConfidenceSet>& beta_cs,
                       const std::vector<std::string>& outcome_names) {
    std::ostringstream out;
    out << "stage,name,estimate,ci_lo,ci_hi,f_stat,ar_stat,ar_cs_lo,ar_cs_hi,segment\n";
    out << "first,delta," << fmt(iv.delta) << ',' << fmt(iv.delta_ci_lo) << ','
        << fmt(iv.delta_ci_hi) << ',' << fmt(iv.f_stat) << ",,,,0\n";
    for (int jdx = 0; jdx < iv.beta.size(); ++jdx) {
        const std::string name =
            jdx < static_cast<int>(outcome_names.size()) ? outcome_names[jdx]
                                                         : "y" + std::to_string(jdx + 1);
        const std::string base = "second," + name + "," + fmt(iv.beta(jdx)) + ",,," + "," +
                                 fmt(iv.ar_stat_all(jdx));
        if (jdx < static_cast<int>(beta_cs.size()) && !beta_cs[jdx].segments.empty()) {
            const auto& segs = beta_cs[jdx].segments;
            for (size_t seg = 0; seg < segs.size(); ++seg)
                out << base << ',' << fmt(segs[seg].first) << ',' << fmt(segs[seg].second) << ','
                    << seg << '\n';
        } else {
            out << base << ",,,0\n";
        }
    }
    return out.str();
}

Eigen::MatrixXd slope_standard_errors(const PvarModel& model, VarianceMode mode) {
    const int k = model.n_regressors();
    const int m = model.n_vars();
    Eigen::LDLT<Eigen::MatrixXd> ldlt(model.xtx);
    require(ldlt.info() == Eigen::Success, errc::singular_covariance,
            "design cross-product is not factorizable");
    const Eigen::MatrixXd xtx_inv = ldlt.solve(Eigen::MatrixXd::Identity(k, k));

    Eigen::MatrixXd se(k, m);
    if (mode == VarianceMode::iid) {
        for (int eq = 0; eq < m; ++eq)
            for (int kk = 0; kk < k; ++kk)
                se(kk, eq) = std::sqrt(model.sigma(eq, eq) * xtx_inv(kk, kk));
    } else {
        const int g = model.n_units;
        require(g > 1, errc::invalid_argument, "clustering needs at least 2 units");
        const Eigen::MatrixXd e = model.residual_matrix();
        for (int eq = 0; eq < m; ++eq) {
            Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
            for (int i = 0; i < g; ++i) {
                const auto xi = model.design.middleRows(
                    static_cast<long long>(i) * model.sample_len, model.sample_len);
                const auto ei = e.col(eq).segment(static_cast<long long>(i) * model.sample_len,
                                                  model.sample_len);
                const Eigen::VectorXd s = xi.transpose() * ei;
                meat += s * s.transpose();
            }
            meat *= static_cast<double>(g) / (g - 1.0);
            const Eigen::MatrixXd cov = xtx_inv * meat * xtx_inv;
            for (int kk = 0; kk < k; ++kk) se(kk, eq) = std::sqrt(cov(kk, kk));
        }
    }
    return se;
}

std::string table3_csv(const PvarModel& model, VarianceMode mode) {
    const Eigen::MatrixXd se = slope_standard_errors(model, mode);
    const double z95 = norm_quantile(0.975);
    const int m = model.n_vars();

    std::ostringstream out;
    out << "equation,regressor,coef,ci_lo,ci_hi\n";
    for (int eq = 0; eq < m; ++eq) {
        for (int l = 1; l <= model.p; ++l) {
            for (int r = 0; r < m; ++r) {
                const int kk = (l - 1) * m + r;
                const double coef = model.slopes(kk, eq);
                out << model.var_names[eq] << ',' << model.var_names[r] << "_lag" << l << ','
                    << fmt(coef) << ',' << fmt(coef - z95 * se(kk, eq)) << ','
                    << fmt(coef + z95 * se(kk, eq)) << '\n';
            }
        }
    }
    return out.str();
}

std::string mc_report_to_csv(const McReport& rep) {
    std::ostringstream out;
    out << "horizon,coverage_irf,coverage_cirf,mean_width,frac_unbounded\n";
    for (const auto& h : rep.horizons)
        out << h.h << ',' << fmt(h.coverage_irf) << ',' << fmt(h.coverage_cirf) << ','
            << fmt(h.mean_width) << ',' << fmt(h.frac_unbounded) << '\n';
    return out.str();
}

std::string mc_report_to_json_string(const McReport& rep, const McConfig& cfg) {
    json j;
    j["reps"] = rep.reps;
    j["failed"] = rep.failed;
    j["alpha"] = rep.alpha;
    j["seed"] = rep.seed;
    j["mean_concentration"] = rep.mean_concentration;
    j["true_irf"] = rep.true_irf_values;
    j["true_cirf"] = rep.true_cirf_values;
    json horizons = json::array();
    for (const auto& h : rep.horizons) {
        json row;
        row["h"] = h.h;
        row["coverage_irf"] = h.coverage_irf;
        row["coverage_cirf"] = h.coverage_cirf;
        row["coverage_plugin"] = h.coverage_plugin;
        row["mean_width"] = std::isnan(h.mean_width) ? json() : json(h.mean_width);
        row["frac_unbounded"] = h.frac_unbounded;
        horizons.push_back(row);
    }
    j["horizons"] = horizons;
    j["config"] = mc_config_to_json(cfg);
    return j.dump(2);
}

}  // namespace pvariv
