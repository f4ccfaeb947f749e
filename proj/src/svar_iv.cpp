#include "pvariv/svar_iv.hpp"

#include <cmath>
#include <limits>
#include <map>

#include "pvariv/errors.hpp"
#include "pvariv/stats.hpp"

namespace pvariv {

const char* normalization_name(Normalization n) {
    return n == Normalization::unit ? "unit" : "standardized";
}

const char* variance_mode_name(VarianceMode v) {
    return v == VarianceMode::iid ? "iid" : "cluster";
}

AlignedSample align_instrument(const PvarModel& model, const InstrumentSeries& z) {
    require(z.values.rows() == model.n_units, errc::invalid_argument,
            "instrument unit count does not match the model");
    std::map<long long, int> zpos;
    for (int t = 0; t < static_cast<int>(z.time_ids.size()); ++t) zpos[z.time_ids[t]] = t;
    std::vector<int> idx;
    idx.reserve(model.sample_time_ids.size());
    for (long long tid : model.sample_time_ids) {
        auto it = zpos.find(tid);
        require(it != zpos.end(), errc::invalid_argument,
                "instrument is missing time id " + std::to_string(tid));
        idx.push_back(it->second);
    }

    AlignedSample s;
    s.n_units = model.n_units;
    s.per_unit = model.sample_len;
    s.resid = model.residual_matrix();
    s.z.resize(s.n());
    for (int i = 0; i < s.n_units; ++i)
        for (int t = 0; t < s.per_unit; ++t)
            s.z(static_cast<long long>(i) * s.per_unit + t) = z.values(i, idx[t]);
    require(s.z.allFinite(), errc::degenerate_instrument, "instrument has non-finite values");
    s.z_mean = s.z.mean();
    s.z.array() -= s.z_mean;
    return s;
}

namespace {

struct ScalarProjection {
    double slope = 0.0;
    double se = 0.0;
    double rss = 0.0;
    double szz = 0.0;
    bool exact_fit = false;
};

// No-intercept OLS of y on a demeaned instrument; homoskedastic or by-unit
// clustered standard error.
ScalarProjection project(const Eigen::VectorXd& y, const Eigen::VectorXd& z, VarianceMode mode,
                         int n_units, int per_unit) {
    const long long n = y.size();
    require(z.size() == n, errc::invalid_argument, "series lengths differ");
    require(n >= 3, errc::too_few_observations, "need at least 3 observations");

    ScalarProjection pr;
    pr.szz = z.squaredNorm();
    const double scale = z.cwiseAbs().maxCoeff();
    require(pr.szz > 0.0 && scale > 0.0, errc::degenerate_instrument,
            "instrument has zero variance");

    pr.slope = y.dot(z) / pr.szz;
    const Eigen::VectorXd e = y - pr.slope * z;
    pr.rss = e.squaredNorm();
    const double syy = y.squaredNorm();
    pr.exact_fit = pr.rss <= 1e-28 * std::max(syy, 1.0) || syy == 0.0;

    if (mode == VarianceMode::iid) {
        pr.se = std::sqrt(pr.rss / static_cast<double>(n - 2) / pr.szz);
    } else {
        require(n_units > 1 && per_unit > 0 &&
                    static_cast<long long>(n_units) * per_unit == n,
                errc::invalid_argument, "cluster structure does not match the sample");
        double meat = 0.0;
        for (int i = 0; i < n_units; ++i) {
            const auto zi = z.segment(static_cast<long long>(i) * per_unit, per_unit);
            const auto ei = e.segment(static_cast<long long>(i) * per_unit, per_unit);
            const double s = zi.dot(ei);
            meat += s * s;
        }
        const double g = n_units;
        pr.se = std::sqrt(g / (g - 1.0) * meat) / pr.szz;
    }
    return pr;
}

}  // namespace

FirstStage first_stage(const Eigen::VectorXd& w, const Eigen::VectorXd& z, VarianceMode mode,
                       int n_units, int per_unit) {
    const ScalarProjection pr = project(w, z, mode, n_units, per_unit);
    FirstStage fs;
    fs.delta = pr.slope;
    fs.se = pr.se;
    const double z95 = norm_quantile(0.975);
    fs.ci_lo = pr.slope - z95 * pr.se;
    fs.ci_hi = pr.slope + z95 * pr.se;
    if (pr.exact_fit || pr.se == 0.0) {
        fs.f_capped = true;
        fs.f_stat = std::numeric_limits<double>::infinity();
    } else {
        fs.f_stat = (pr.slope / pr.se) * (pr.slope / pr.se);
    }
    return fs;
}

double reduced_form(const Eigen::VectorXd& y, const Eigen::VectorXd& z) {
    return project(y, z, VarianceMode::iid, 0, 0).slope;
}

Eigen::VectorXd iv_ratio(const Eigen::VectorXd& rho, double delta, double sd_w, double sd_z) {
    // |delta| * sd(Z) <= 1e-12 * sd(W) means |corr(W,Z)| is numerically zero.
    const double guard = 1e-12 * std::max(sd_w, 1e-300);
    require(std::abs(delta) * std::max(sd_z, 1e-300) > guard, errc::weak_denominator,
            "first-stage coefficient is numerically zero; use AR confidence sets");
    return rho / delta;
}

double ar_statistic_point(const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                          const Eigen::VectorXd& z, double beta0, VarianceMode mode, int n_units,
                          int per_unit) {
    const Eigen::VectorXd v = y - beta0 * w;
    const ScalarProjection pr = project(v, z, mode, n_units, per_unit);
    if (pr.slope == 0.0) return 0.0;
    if (pr.se == 0.0) return std::numeric_limits<double>::infinity();
    const double t = pr.slope / pr.se;
    return t * t;
}

std::pair<ShockScale, StructuralColumn> standardized_shock_scale(const Eigen::MatrixXd& sigma,
                                                                 double delta,
                                                                 const Eigen::VectorXd& rho) {
    const int m = static_cast<int>(sigma.rows());
    const int J = static_cast<int>(rho.size());
    require(sigma.cols() == m && m == J + 1, errc::invalid_argument,
            "sigma must be (J+1) x (J+1)");
    {
        Eigen::LLT<Eigen::MatrixXd> llt(sigma);
        require(llt.info() == Eigen::Success, errc::invalid_argument,
                "sigma must be positive definite");
    }
    require(delta != 0.0, errc::weak_denominator, "first-stage coefficient is zero");

    const double s11 = sigma(0, 0);
    const Eigen::VectorXd s21 = sigma.block(1, 0, J, 1);
    const Eigen::MatrixXd s22 = sigma.block(1, 1, J, J);
    const Eigen::VectorXd ratio = rho / delta;  // r21 / r11

    const Eigen::MatrixXd q = ratio * s11 * ratio.transpose() -
                              (s21 * ratio.transpose() + ratio * s21.transpose()) + s22;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(q);
    lu.setThreshold(1e-12);
    require(lu.isInvertible(), errc::singular_q, "shock-scale matrix Q is singular");

    const Eigen::VectorXd d = s21 - ratio * s11;
    const double r12_sq = d.dot(lu.solve(d));
    const double r11_sq = s11 - r12_sq;
    require(r11_sq > 0.0, errc::normalization_failure,
            "implied policy-shock variance is non-positive (" + std::to_string(r11_sq) + ")");

    ShockScale scale;
    scale.r12_sq = r12_sq;
    scale.r11 = std::sqrt(r11_sq);
    scale.c = Eigen::VectorXd::Constant(J + 1, scale.r11 / delta);

    StructuralColumn col;
    col.normalization = Normalization::standardized;
    col.gamma_vec.resize(J + 1);
    col.gamma_vec(0) = delta;
    col.gamma_vec.tail(J) = rho;
    col.r_col.resize(J + 1);
    col.r_col(0) = delta * scale.c(0);
    for (int j = 0; j < J; ++j) col.r_col(j + 1) = rho(j) * scale.c(j + 1);
    return {scale, col};
}

IdentifyResult identify(const PvarModel& model, const InstrumentSeries& z,
                        Normalization normalization, VarianceMode variance) {
    return identify(model, align_instrument(model, z), normalization, variance);
}

IdentifyResult identify(const PvarModel& model, const AlignedSample& sample,
                        Normalization normalization, VarianceMode variance) {
    const int m = model.n_vars();
    require(m >= 2, errc::invalid_argument, "need a policy variable and at least one outcome");
    const int J = m - 1;
    const Eigen::VectorXd w = sample.resid.col(0);

    IdentifyResult res;
    res.iv.variance = variance;
    res.iv.normalization = normalization;

    const FirstStage fs =
        first_stage(w, sample.z, variance, sample.n_units, sample.per_unit);
    res.iv.delta = fs.delta;
    res.iv.delta_ci_lo = fs.ci_lo;
    res.iv.delta_ci_hi = fs.ci_hi;
    res.iv.f_stat = fs.f_stat;
    res.iv.f_capped = fs.f_capped;

    res.iv.rho.resize(J);
    for (int j = 0; j < J; ++j) res.iv.rho(j) = reduced_form(sample.resid.col(j + 1), sample.z);

    const long long n = sample.n();
    const double sd_w = std::sqrt(w.squaredNorm() / static_cast<double>(n));
    const double sd_z = std::sqrt(sample.z.squaredNorm() / static_cast<double>(n));
    res.iv.beta = iv_ratio(res.iv.rho, fs.delta, sd_w, sd_z);

    res.iv.ar_stat_all.resize(J);
    for (int j = 0; j < J; ++j)
        res.iv.ar_stat_all(j) = ar_statistic_point(sample.resid.col(j + 1), w, sample.z, 0.0,
                                                   variance, sample.n_units, sample.per_unit);
    res.iv.ar_stat = res.iv.ar_stat_all(0);

    if (normalization == Normalization::standardized) {
        auto [scale, col] = standardized_shock_scale(model.sigma, fs.delta, res.iv.rho);
        res.iv.shock_scale = scale.c;
        res.column = col;
    } else {
        res.column.normalization = Normalization::unit;
        res.column.gamma_vec.resize(m);
        res.column.gamma_vec(0) = fs.delta;
        res.column.gamma_vec.tail(J) = res.iv.rho;
        res.column.r_col.resize(m);
        res.column.r_col(0) = fs.delta;
        res.column.r_col.tail(J) = res.iv.beta;
    }
    return res;
}

}  // namespace pvariv
