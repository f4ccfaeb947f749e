#include "pvariv/pvar.hpp"

#include <cmath>

#include "pvariv/errors.hpp"
#include "pvariv/stats.hpp"

namespace pvariv {

Eigen::MatrixXd companion_matrix(const std::vector<Eigen::MatrixXd>& phi) {
    const int p = static_cast<int>(phi.size());
    require(p >= 1, errc::invalid_argument, "companion matrix needs at least one lag");
    const int m = static_cast<int>(phi[0].rows());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m * p, m * p);
    for (int l = 0; l < p; ++l) a.block(0, l * m, m, m) = phi[l];
    if (p > 1) a.block(m, 0, m * (p - 1), m * (p - 1)).setIdentity();
    return a;
}

double companion_spectral_radius(const std::vector<Eigen::MatrixXd>& phi) {
    const Eigen::MatrixXd a = companion_matrix(phi);
    return a.eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::MatrixXd PvarModel::companion() const { return companion_matrix(phi); }

Eigen::MatrixXd PvarModel::residual_matrix() const {
    Eigen::MatrixXd e(nobs, n_vars());
    for (int i = 0; i < n_units; ++i)
        e.middleRows(static_cast<long long>(i) * sample_len, sample_len) = residuals[i];
    return e;
}

namespace {

struct WithinFit {
    Eigen::MatrixXd design;  // n x K demeaned lags
    Eigen::MatrixXd outcome; // n x m demeaned regressands
    Eigen::MatrixXd slopes;  // K x m
    Eigen::MatrixXd xtx;     // K x K
    Eigen::MatrixXd resid;   // n x m
};

// Within OLS on the sample t = t0 .. T-1 with `p` lags as regressors.
WithinFit within_ols(const PanelDataset& ds, int p, int t0) {
    const int N = ds.n_units();
    const int T = ds.n_periods();
    const int m = ds.n_vars();
    const int S = T - t0;
    const int K = m * p;
    const long long n = static_cast<long long>(N) * S;

    WithinFit f;
    f.design.resize(n, K);
    f.outcome.resize(n, m);
    for (int i = 0; i < N; ++i) {
        Eigen::MatrixXd y = ds.data[i].middleRows(t0, S);
        Eigen::MatrixXd x(S, K);
        for (int l = 1; l <= p; ++l)
            x.middleCols((l - 1) * m, m) = ds.data[i].middleRows(t0 - l, S);
        y.rowwise() -= y.colwise().mean();
        x.rowwise() -= x.colwise().mean();
        f.outcome.middleRows(static_cast<long long>(i) * S, S) = y;
        f.design.middleRows(static_cast<long long>(i) * S, S) = x;
    }

    f.xtx = f.design.transpose() * f.design;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(f.design);
    require(qr.rank() == K, errc::singular_design,
            "demeaned lag regressors are collinear (rank " + std::to_string(qr.rank()) + " of " +
                std::to_string(K) + ")");
    f.slopes = qr.solve(f.outcome);
    f.resid = f.outcome - f.design * f.slopes;
    return f;
}

}  // namespace

PvarModel fit_pvar(const PanelDataset& ds, int p, const FitOptions& opts) {
    ds.validate();
    require(p >= 1, errc::invalid_argument, "lag order must be >= 1");
    const int N = ds.n_units();
    const int T = ds.n_periods();
    const int m = ds.n_vars();
    const int S = T - p;
    const int K = m * p;
    require(S >= K + 2, errc::too_few_periods,
            "need T - p >= m*p + 2 effective observations per unit (have " + std::to_string(S) +
                ", need " + std::to_string(K + 2) + ")");

    const WithinFit f = within_ols(ds, p, p);
    const long long n = static_cast<long long>(N) * S;
    const long long dof = opts.dof_correction ? n - K : n;
    require(dof > 0, errc::too_few_periods, "no residual degrees of freedom");

    PvarModel model;
    model.p = p;
    model.n_units = N;
    model.sample_len = S;
    model.nobs = n;
    model.var_names = ds.var_names;
    model.sample_time_ids.assign(ds.time_ids.begin() + p, ds.time_ids.end());
    model.design = f.design;
    model.slopes = f.slopes;
    model.xtx = f.xtx;
    model.dof_corrected = opts.dof_correction;

    model.phi.assign(p, Eigen::MatrixXd(m, m));
    for (int l = 0; l < p; ++l)
        for (int s = 0; s < m; ++s)
            for (int r = 0; r < m; ++r) model.phi[l](s, r) = f.slopes(l * m + r, s);

    Eigen::MatrixXd sig = (f.resid.transpose() * f.resid) / static_cast<double>(dof);
    model.sigma = 0.5 * (sig + sig.transpose());

    model.residuals.reserve(N);
    for (int i = 0; i < N; ++i)
        model.residuals.push_back(f.resid.middleRows(static_cast<long long>(i) * S, S));

    // mu_i solves (I - sum_l Phi_l) mu_i = xbar_i - sum_l Phi_l xbar_i^(l),
    // the per-unit means implied by the model on the estimation sample.
    Eigen::MatrixXd phisum = Eigen::MatrixXd::Zero(m, m);
    for (const auto& ph : model.phi) phisum += ph;
    const Eigen::MatrixXd imp = Eigen::MatrixXd::Identity(m, m) - phisum;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> imp_qr(imp);
    model.mu.resize(N, m);
    for (int i = 0; i < N; ++i) {
        Eigen::VectorXd rhs =
            ds.data[i].middleRows(p, S).colwise().mean().transpose();
        for (int l = 1; l <= p; ++l)
            rhs -= model.phi[l - 1] *
                   ds.data[i].middleRows(p - l, S).colwise().mean().transpose();
        model.mu.row(i) = imp_qr.solve(rhs).transpose();
    }

    model.spectral_radius = companion_spectral_radius(model.phi);
    model.stationary = model.spectral_radius < 1.0;
    return model;
}

LagSelectionReport select_lag(const PanelDataset& ds, int p_max) {
    ds.validate();
    require(p_max >= 1, errc::invalid_argument, "p_max must be >= 1");
    const int N = ds.n_units();
    const int T = ds.n_periods();
    const int m = ds.n_vars();
    const int S = T - p_max;
    require(S >= m * p_max + 2, errc::too_few_periods,
            "too few periods for p_max = " + std::to_string(p_max));

    const long long n = static_cast<long long>(N) * S;
    const double log_n = std::log(static_cast<double>(n));
    const double log_log_n = std::log(log_n);

    // Gaussian quasi-log-likelihood on the common sample, tracked through
    // -2L(p) = n * log det SigmaML(p) plus a p-independent constant that the
    // relative reporting cancels.
    std::vector<double> neg2ll(p_max), qpar(p_max);
    for (int p = 1; p <= p_max; ++p) {
        const WithinFit f = within_ols(ds, p, p_max);
        Eigen::MatrixXd sig_ml = (f.resid.transpose() * f.resid) / static_cast<double>(n);
        sig_ml = 0.5 * (sig_ml + sig_ml.transpose());
        Eigen::LLT<Eigen::MatrixXd> llt(sig_ml);
        require(llt.info() == Eigen::Success, errc::degenerate_residuals,
                "residual covariance is not positive definite at p = " + std::to_string(p));
        double log_det = 0.0;
        for (int j = 0; j < m; ++j) log_det += 2.0 * std::log(llt.matrixL()(j, j));
        neg2ll[p - 1] = static_cast<double>(n) * log_det;
        qpar[p - 1] = static_cast<double>(m) * m * p;
    }

    LagSelectionReport rep;
    rep.common_nobs = n;
    const double ref_ll = neg2ll[p_max - 1];
    const double ref_q = qpar[p_max - 1];
    for (int p = 1; p <= p_max; ++p) {
        const double lr = neg2ll[p - 1] - ref_ll;
        const double dq = qpar[p - 1] - ref_q;
        rep.lags.push_back(p);
        rep.maic.push_back(lr + 2.0 * dq);
        rep.mbic.push_back(lr + dq * log_n);
        rep.mqic.push_back(lr + 2.0 * dq * log_log_n);
    }
    auto argmin = [&](const std::vector<double>& v) {
        int best = 0;
        for (int i = 1; i < static_cast<int>(v.size()); ++i)
            if (v[i] < v[best]) best = i;  // ties keep the smaller p
        return rep.lags[best];
    };
    rep.best_mbic = argmin(rep.mbic);
    rep.best_maic = argmin(rep.maic);
    rep.best_mqic = argmin(rep.mqic);
    return rep;
}

DiagnosticsReport residual_autocorrelation_check(const PvarModel& model) {
    require(model.sample_len >= 3, errc::too_few_periods,
            "need at least 3 residual periods per unit");
    const int m = model.n_vars();
    const double z95 = norm_quantile(0.975);

    DiagnosticsReport rep;
    rep.clean = true;
    for (int v = 0; v < m; ++v) {
        double sxx = 0.0, sxy = 0.0;
        long long npairs = 0;
        for (int i = 0; i < model.n_units; ++i) {
            const auto& e = model.residuals[i];
            for (int t = 1; t < model.sample_len; ++t) {
                sxx += e(t - 1, v) * e(t - 1, v);
                sxy += e(t - 1, v) * e(t, v);
                ++npairs;
            }
        }
        require(sxx > 0.0, errc::degenerate_residuals,
                "residuals of '" + model.var_names[v] + "' have no variation");
        const double coef = sxy / sxx;
        double rss = 0.0;
        for (int i = 0; i < model.n_units; ++i) {
            const auto& e = model.residuals[i];
            for (int t = 1; t < model.sample_len; ++t) {
                const double r = e(t, v) - coef * e(t - 1, v);
                rss += r * r;
            }
        }
        const double se = std::sqrt(rss / static_cast<double>(npairs - 1) / sxx);
        AutocorrRow row;
        row.var = model.var_names[v];
        row.coef = coef;
        row.ci_lo = coef - z95 * se;
        row.ci_hi = coef + z95 * se;
        if (row.ci_lo > 0.0 || row.ci_hi < 0.0) rep.clean = false;
        rep.autocorr.push_back(row);
    }
    return rep;
}

DiagnosticsReport normality_test(const PvarModel& model) {
    const long long n = model.nobs;
    require(n >= 8, errc::too_few_observations,
            "need at least 8 residuals per variable for the normality test");
    DiagnosticsReport rep;
    std::vector<double> pooled(static_cast<size_t>(n));
    for (int v = 0; v < model.n_vars(); ++v) {
        size_t k = 0;
        for (int i = 0; i < model.n_units; ++i)
            for (int t = 0; t < model.sample_len; ++t) pooled[k++] = model.residuals[i](t, v);
        // The W approximation is calibrated for n <= 5000; thin evenly above.
        if (pooled.size() > 5000) {
            std::vector<double> thinned;
            thinned.reserve(5000);
            const double step = static_cast<double>(pooled.size()) / 5000.0;
            for (int j = 0; j < 5000; ++j)
                thinned.push_back(pooled[static_cast<size_t>(j * step)]);
            const auto sw = shapiro_wilk(thinned);
            rep.normality.push_back({model.var_names[v], sw.w, sw.p_value});
        } else {
            const auto sw = shapiro_wilk(pooled);
            rep.normality.push_back({model.var_names[v], sw.w, sw.p_value});
        }
    }
    return rep;
}

}  // namespace pvariv
