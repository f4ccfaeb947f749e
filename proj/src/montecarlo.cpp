#include "pvariv/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <thread>

#include "pvariv/errors.hpp"
#include "pvariv/inference.hpp"
#include "pvariv/irf.hpp"
#include "pvariv/pvar.hpp"
#include "pvariv/rng.hpp"
#include "pvariv/threads.hpp"

namespace pvariv {

McConfig McConfig::paper_default() {
    McConfig cfg;
    cfg.phi = {(Eigen::MatrixXd(2, 2) << -0.10, -0.03, 0.80, 0.34).finished()};
    // Innovation scale 4% with Sigma21 = Sigma11, so the b = (1,1) policy
    // shock is exactly the policy innovation and the instrument is valid.
    const double s2 = 0.04 * 0.04;
    cfg.sigma = (Eigen::MatrixXd(2, 2) << s2, s2, s2, 2.0 * s2).finished();
    cfg.b = Eigen::VectorXd::Ones(2);
    return cfg;
}

void McConfig::validate() const {
    require(n_units >= 2, errc::invalid_argument, "need at least 2 units");
    require(n_periods >= 4, errc::invalid_argument, "need at least 4 periods");
    require(!phi.empty(), errc::invalid_argument, "phi must have at least one lag matrix");
    const int m = static_cast<int>(phi[0].rows());
    require(m >= 2, errc::invalid_argument, "need at least 2 variables");
    for (const auto& ph : phi)
        require(ph.rows() == m && ph.cols() == m, errc::invalid_argument,
                "phi matrices must be square and conformable");
    require(sigma.rows() == m && sigma.cols() == m, errc::invalid_argument,
            "sigma must be m x m");
    require(b.size() == m, errc::invalid_argument, "b must have length m");
    require(reps >= 1, errc::invalid_argument, "reps must be >= 1");
    require(alpha > 0.0 && alpha < 1.0, errc::invalid_argument, "alpha must be in (0,1)");
    require(horizon >= 0, errc::invalid_argument, "horizon must be >= 0");
    require(sigma_z >= 0.0, errc::invalid_argument, "sigma_z must be >= 0");
    require(burn_in >= 0, errc::invalid_argument, "burn_in must be >= 0");
    require(response_var >= 0 && response_var < m, errc::invalid_argument,
            "response_var out of range");
    require(grid_points >= 3, errc::invalid_argument, "grid_points must be >= 3");
}

StructuralDgp build_dgp(const std::vector<Eigen::MatrixXd>& phi, const Eigen::MatrixXd& sigma,
                        const Eigen::VectorXd& b) {
    require(!phi.empty(), errc::invalid_argument, "phi must have at least one lag matrix");
    const int m = static_cast<int>(sigma.rows());
    require(sigma.cols() == m && b.size() == m, errc::invalid_argument,
            "sigma and b must be conformable");
    require(b.norm() > 0.0, errc::invalid_argument, "b must be nonzero");

    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    require(llt.info() == Eigen::Success, errc::factorization_error,
            "sigma is not positive definite");
    const Eigen::MatrixXd chol = llt.matrixL();

    // Whiten the requested direction, then complete to an orthogonal basis
    // with a Householder reflector and color back: R = L * H, RR' = Sigma.
    Eigen::VectorXd u = chol.triangularView<Eigen::Lower>().solve(b);
    const double un = u.norm();
    require(un > 0.0, errc::factorization_error, "whitened direction collapsed");
    u /= un;

    Eigen::MatrixXd house = Eigen::MatrixXd::Identity(m, m);
    Eigen::VectorXd v = u - Eigen::VectorXd::Unit(m, 0);
    const double vn2 = v.squaredNorm();
    if (vn2 > 1e-28) house -= (2.0 / vn2) * (v * v.transpose());

    StructuralDgp dgp;
    dgp.phi = phi;
    dgp.sigma = sigma;
    dgp.r = chol * house;
    dgp.m = m;
    dgp.p = static_cast<int>(phi.size());
    dgp.spectral_radius = companion_spectral_radius(phi);
    return dgp;
}

double true_irf(const StructuralDgp& dgp, int h, int response_var, bool cumulative) {
    require(response_var >= 0 && response_var < dgp.m, errc::invalid_argument,
            "response variable out of range");
    const Eigen::VectorXd col = dgp.r.col(0);
    require(col(0) != 0.0, errc::weak_denominator, "policy loading of the true column is zero");
    const auto c = ma_coefficients(dgp.phi, h);
    double v = 0.0;
    if (cumulative) {
        for (int k = 0; k <= h; ++k) v += c[k].row(response_var).dot(col);
    } else {
        v = c[h].row(response_var).dot(col);
    }
    return v / col(0);
}

std::pair<PanelDataset, InstrumentSeries> simulate_panel(const StructuralDgp& dgp,
                                                         const McConfig& cfg,
                                                         std::uint64_t rep_seed) {
    if (!cfg.allow_nonstationary)
        require(dgp.spectral_radius < 1.0, errc::nonstationary_dgp,
                "DGP companion spectral radius is " + std::to_string(dgp.spectral_radius));

    const int m = dgp.m;
    const int p = dgp.p;
    const int N = cfg.n_units;
    const int T = cfg.n_periods;
    const int total = cfg.burn_in + T;

    Rng rng(rep_seed);

    PanelDataset ds;
    ds.var_names.push_back("w");
    for (int j = 1; j < m; ++j) ds.var_names.push_back("y" + std::to_string(j));
    for (int t = 1; t <= T; ++t) ds.time_ids.push_back(t);
    ds.data.assign(N, Eigen::MatrixXd(T, m));

    InstrumentSeries z;
    z.construction = InstrumentMode::synthetic;
    z.time_ids = ds.time_ids;
    z.values.resize(N, T);

    Eigen::MatrixXd phisum = Eigen::MatrixXd::Zero(m, m);
    for (const auto& ph : dgp.phi) phisum += ph;
    const Eigen::MatrixXd imp = Eigen::MatrixXd::Identity(m, m) - phisum;

    Eigen::VectorXd mu(m), eta(m), x(m), intercept(m);
    std::vector<Eigen::VectorXd> lags(p, Eigen::VectorXd(m));
    for (int i = 0; i < N; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "u%02d", i);
        ds.unit_ids.push_back(buf);

        for (int v = 0; v < m; ++v) mu(v) = rng.normal();
        intercept = imp * mu;
        for (int l = 0; l < p; ++l) lags[l] = mu;

        for (int t = 0; t < total; ++t) {
            for (int v = 0; v < m; ++v) eta(v) = rng.normal();
            const double nu = rng.normal();
            const Eigen::VectorXd shock = dgp.r * eta;
            x = intercept + shock;
            for (int l = 0; l < p; ++l) x += dgp.phi[l] * lags[l];
            for (int l = p - 1; l >= 1; --l) lags[l] = lags[l - 1];
            lags[0] = x;
            if (t >= cfg.burn_in) {
                const int tt = t - cfg.burn_in;
                ds.data[i].row(tt) = x.transpose();
                z.values(i, tt) = cfg.mu_z + cfg.gamma * shock(0) + cfg.sigma_z * nu;
            }
        }
    }
    return {std::move(ds), std::move(z)};
}

namespace {

struct RepOutcome {
    bool failed = false;
    std::vector<char> hit_irf, hit_cirf, hit_plugin, unbounded;
    std::vector<double> width;  // nan when the AR set is unbounded
    double concentration = 0.0;
};

RepOutcome run_replication(const StructuralDgp& dgp, const McConfig& cfg,
                           const std::vector<double>& truth_irf,
                           const std::vector<double>& truth_cirf, std::uint64_t rep_seed) {
    const int H = cfg.horizon;
    RepOutcome out;
    out.hit_irf.assign(H + 1, 0);
    out.hit_cirf.assign(H + 1, 0);
    out.hit_plugin.assign(H + 1, 0);
    out.unbounded.assign(H + 1, 0);
    out.width.assign(H + 1, std::nan(""));

    auto [ds, z] = simulate_panel(dgp, cfg, rep_seed);
    const PvarModel model = fit_pvar(ds, dgp.p);
    const AlignedSample sample = align_instrument(model, z);

    {
        const Eigen::VectorXd w = sample.resid.col(0);
        const double szz = sample.z.squaredNorm();
        require(szz > 0.0, errc::degenerate_instrument, "instrument collapsed");
        const double delta = w.dot(sample.z) / szz;
        const double rss = (w - delta * sample.z).squaredNorm();
        out.concentration =
            rss > 0.0 ? delta * delta * szz / (rss / static_cast<double>(sample.n())) : 0.0;
    }

    const IrfInference inf(model, sample, cfg.variance);
    InferenceOptions opts;
    opts.variance = cfg.variance;
    opts.grid.n_points = cfg.grid_points;

    for (int h = 0; h <= H; ++h) {
        const auto quad = inf.lambda_quadratic(h, cfg.response_var, false);
        const ConfidenceSet cs = invert_ar_quadratic(quad, cfg.alpha, opts);
        out.hit_irf[h] = cs.contains(truth_irf[h]);
        out.unbounded[h] = cs.unbounded || cs.empty_on_grid;
        if (!cs.unbounded && !cs.empty_on_grid) out.width[h] = cs.width();

        const ConfidenceSet wald = wald_interval(quad, cfg.alpha, 1.0, inf.first_stage_f());
        out.hit_plugin[h] = wald.contains(truth_irf[h]);

        const auto quad_c = inf.lambda_quadratic(h, cfg.response_var, true);
        const ConfidenceSet ccs = invert_ar_quadratic(quad_c, cfg.alpha, opts);
        out.hit_cirf[h] = ccs.contains(truth_cirf[h]);
    }
    return out;
}

}  // namespace

McReport coverage_experiment(const McConfig& cfg) {
    cfg.validate();
    const StructuralDgp dgp = build_dgp(cfg.phi, cfg.sigma, cfg.b);
    if (!cfg.allow_nonstationary)
        require(dgp.spectral_radius < 1.0, errc::nonstationary_dgp,
                "DGP companion spectral radius is " + std::to_string(dgp.spectral_radius));

    const int H = cfg.horizon;
    std::vector<double> truth_irf(H + 1), truth_cirf(H + 1);
    for (int h = 0; h <= H; ++h) {
        truth_irf[h] = true_irf(dgp, h, cfg.response_var, false);
        truth_cirf[h] = true_irf(dgp, h, cfg.response_var, true);
    }

    std::vector<RepOutcome> outcomes(cfg.reps);
    const int workers = std::min(effective_threads(cfg.threads), cfg.reps);
    auto work = [&](int first, int last) {
        for (int r = first; r < last; ++r) {
            try {
                outcomes[r] = run_replication(dgp, cfg, truth_irf, truth_cirf,
                                              Rng::substream(cfg.seed, r));
            } catch (const Error&) {
                outcomes[r].failed = true;
            }
        }
    };
    if (workers <= 1) {
        work(0, cfg.reps);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (cfg.reps + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            const int first = w * chunk;
            const int last = std::min(cfg.reps, first + chunk);
            if (first < last) pool.emplace_back(work, first, last);
        }
        for (auto& th : pool) th.join();
    }

    McReport rep;
    rep.true_irf_values = truth_irf;
    rep.true_cirf_values = truth_cirf;
    rep.reps = cfg.reps;
    rep.alpha = cfg.alpha;
    rep.seed = cfg.seed;
    rep.horizons.assign(H + 1, McHorizon{});

    long long ok = 0;
    double conc_sum = 0.0;
    std::vector<long long> w_count(H + 1, 0);
    for (const auto& o : outcomes) {
        if (o.failed) {
            ++rep.failed;
            continue;
        }
        ++ok;
        conc_sum += o.concentration;
        for (int h = 0; h <= H; ++h) {
            rep.horizons[h].coverage_irf += o.hit_irf[h];
            rep.horizons[h].coverage_cirf += o.hit_cirf[h];
            rep.horizons[h].coverage_plugin += o.hit_plugin[h];
            rep.horizons[h].frac_unbounded += o.unbounded[h];
            if (!std::isnan(o.width[h])) {
                rep.horizons[h].mean_width += o.width[h];
                ++w_count[h];
            }
        }
    }
    require(ok > 0, errc::degenerate_residuals, "every replication failed");
    for (int h = 0; h <= H; ++h) {
        auto& hz = rep.horizons[h];
        hz.h = h;
        hz.coverage_irf /= ok;
        hz.coverage_cirf /= ok;
        hz.coverage_plugin /= ok;
        hz.frac_unbounded /= ok;
        hz.mean_width = w_count[h] > 0 ? hz.mean_width / w_count[h] : std::nan("");
    }
    rep.mean_concentration = conc_sum / ok;
    return rep;
}

}  // namespace pvariv
