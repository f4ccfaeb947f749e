#include "pvariv/inference.hpp"

#include <cmath>
#include <limits>

#include "pvariv/errors.hpp"
#include "pvariv/stats.hpp"

namespace pvariv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<Eigen::MatrixXd> slopes_to_phi(const Eigen::MatrixXd& slopes, int m, int p) {
    std::vector<Eigen::MatrixXd> phi(p, Eigen::MatrixXd(m, m));
    for (int l = 0; l < p; ++l)
        for (int s = 0; s < m; ++s)
            for (int r = 0; r < m; ++r) phi[l](s, r) = slopes(l * m + r, s);
    return phi;
}

// e_s' M Gamma where M is C_h or the partial sum D_h.
double irf_functional(const std::vector<Eigen::MatrixXd>& phi, const Eigen::VectorXd& gamma,
                      int h, int s, bool cumulative) {
    const auto c = ma_coefficients(phi, h);
    if (!cumulative) return c[h].row(s).dot(gamma);
    double v = 0.0;
    for (int k = 0; k <= h; ++k) v += c[k].row(s).dot(gamma);
    return v;
}

}  // namespace

double IrfInference::Quadratic::ar_stat(double lambda0) const {
    const double g = a - lambda0 * b;
    const double s2 = sigma2(lambda0);
    if (!(s2 > 0.0)) return g == 0.0 ? 0.0 : kInf;
    return static_cast<double>(n) * g * g / s2;
}

double IrfInference::Quadratic::se_wald() const {
    if (b == 0.0) return kInf;
    const double s2 = sigma2(lambda_hat());
    if (!(s2 >= 0.0)) return 0.0;
    return std::sqrt(s2 / static_cast<double>(n)) / std::abs(b);
}

IrfInference::IrfInference(const PvarModel& model, const AlignedSample& sample,
                           VarianceMode mode) {
    m_ = model.n_vars();
    p_ = model.p;
    k_ = m_ * p_;
    n_ = sample.n();
    require(n_ == model.nobs, errc::invalid_argument, "sample does not match the model");
    phi_ = model.phi;
    slopes_ = model.slopes;

    const Eigen::MatrixXd& e = sample.resid;  // PVAR residuals, n x m
    const Eigen::VectorXd& z = sample.z;
    const double nn = static_cast<double>(n_);

    const double szz = z.squaredNorm();
    require(szz > 0.0, errc::degenerate_instrument, "instrument has zero variance");
    const double qz = szz / nn;

    gamma_ = (e.transpose() * z) / szz;
    const Eigen::MatrixXd u = e - z * gamma_.transpose();  // projection residuals

    {
        const double dw = gamma_(0);
        const double rssw = u.col(0).squaredNorm();
        const double sew2 = rssw / (nn - 2.0) / szz;
        first_stage_f_ = sew2 > 0.0 ? dw * dw / sew2 : kInf;
    }

    const int d = m_ * k_ + m_;
    v_.setZero(d, d);

    Eigen::LDLT<Eigen::MatrixXd> xtx_ldlt(model.xtx);
    require(xtx_ldlt.info() == Eigen::Success, errc::singular_covariance,
            "design cross-product is not factorizable");
    const Eigen::MatrixXd qinv =
        xtx_ldlt.solve(Eigen::MatrixXd::Identity(k_, k_)) * nn;  // (X'X/n)^{-1}

    if (mode == VarianceMode::iid) {
        // block-diagonal: slopes ~ Sigma_x (x) Qinv, projections ~ Sigma_u / qz
        const Eigen::MatrixXd sigma_x = (e.transpose() * e) / nn;
        const Eigen::MatrixXd sigma_u = (u.transpose() * u) / nn;
        for (int s = 0; s < m_; ++s)
            for (int r = 0; r < m_; ++r)
                v_.block(s * k_, r * k_, k_, k_) = sigma_x(s, r) * qinv;
        v_.bottomRightCorner(m_, m_) = sigma_u / qz;
    } else {
        // by-unit clustered joint moment covariance
        const int g = sample.n_units;
        require(g > 1, errc::invalid_argument, "clustering needs at least 2 units");
        Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(d, d);
        Eigen::VectorXd score(d);
        for (int i = 0; i < g; ++i) {
            Eigen::VectorXd si = Eigen::VectorXd::Zero(d);
            for (int t = 0; t < sample.per_unit; ++t) {
                const long long row = static_cast<long long>(i) * sample.per_unit + t;
                const Eigen::VectorXd qx = qinv * model.design.row(row).transpose();
                for (int s = 0; s < m_; ++s) score.segment(s * k_, k_) = e(row, s) * qx;
                score.tail(m_) = (z(row) / qz) * u.row(row).transpose();
                si += score;
            }
            meat += si * si.transpose();
        }
        v_ = meat * (static_cast<double>(g) / (g - 1.0)) / nn;
    }
}

IrfInference::Quadratic IrfInference::lambda_quadratic(int h, int response_var,
                                                       bool cumulative) const {
    require(h >= 0, errc::invalid_argument, "horizon must be >= 0");
    require(response_var >= 0 && response_var < m_, errc::invalid_argument,
            "response variable out of range");

    const int d = m_ * k_ + m_;
    Eigen::VectorXd grad_a = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd grad_b = Eigen::VectorXd::Zero(d);
    grad_b(m_ * k_ + 0) = 1.0;

    // Gamma part of grad a: rows of C (or their running sum).
    {
        const auto c = ma_coefficients(phi_, h);
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(m_);
        if (cumulative) {
            for (int k = 0; k <= h; ++k) row += c[k].row(response_var);
        } else {
            row = c[h].row(response_var);
        }
        grad_a.segment(m_ * k_, m_) = row.transpose();
    }

    const double a0 = irf_functional(phi_, gamma_, h, response_var, cumulative);

    // Slope part by forward differences, step 1e-6*(1+|coef|).
    if (h >= 1) {
        Eigen::MatrixXd pert = slopes_;
        for (int eq = 0; eq < m_; ++eq) {
            for (int k = 0; k < k_; ++k) {
                const double step = 1e-6 * (1.0 + std::abs(slopes_(k, eq)));
                pert(k, eq) = slopes_(k, eq) + step;
                const auto phi_p = slopes_to_phi(pert, m_, p_);
                const double ap = irf_functional(phi_p, gamma_, h, response_var, cumulative);
                grad_a(eq * k_ + k) = (ap - a0) / step;
                pert(k, eq) = slopes_(k, eq);
            }
        }
    }

    Quadratic q;
    q.a = a0;
    q.b = gamma_(0);
    q.n = n_;
    const Eigen::VectorXd va = v_ * grad_a;
    const Eigen::VectorXd vb = v_ * grad_b;
    q.qa = grad_a.dot(va);
    q.qb = grad_b.dot(vb);
    q.qab = grad_a.dot(vb);
    return q;
}

ConfidenceSet invert_ar_quadratic(const IrfInference::Quadratic& quad, double alpha,
                                  const InferenceOptions& opts) {
    require(alpha > 0.0 && alpha < 1.0, errc::invalid_argument, "alpha must be in (0,1)");
    require(opts.shock_size > 0.0, errc::invalid_argument, "shock size must be positive");
    require(opts.grid.n_points >= 3, errc::invalid_argument, "grid needs at least 3 points");
    const double crit = chi2_1_quantile(1.0 - alpha);
    const bool custom = !opts.grid.is_auto();

    double center = quad.b != 0.0 ? quad.lambda_hat() : 0.0;
    if (!std::isfinite(center)) center = 0.0;
    double se = quad.se_wald();
    if (!std::isfinite(se) || se <= 0.0) {
        se = std::isfinite(se) ? 0.0 : 1e8 * (1.0 + std::abs(quad.a));
    }
    double half = se > 0.0 ? 20.0 * se : 1e-8 * (1.0 + std::abs(center));

    // grid in ratio units; custom grids arrive in reporting units
    double lo = custom ? opts.grid.lo / opts.shock_size : center - half;
    double hi = custom ? opts.grid.hi / opts.shock_size : center + half;
    require(hi > lo, errc::invalid_argument, "grid upper bound must exceed lower bound");
    const int npts = opts.grid.n_points;

    std::vector<char> accept(npts);
    auto scan = [&]() {
        const double step = (hi - lo) / (npts - 1);
        bool any = false;
        for (int j = 0; j < npts; ++j) {
            const double lam = lo + j * step;
            accept[j] = quad.ar_stat(lam) <= crit;
            any = any || accept[j];
        }
        return any;
    };

    bool any = scan();
    int expansions_left = custom ? 0 : opts.max_expansions;
    while (any && (accept.front() || accept.back()) && expansions_left > 0) {
        const double mid = 0.5 * (lo + hi);
        const double hw = 0.5 * (hi - lo) * 4.0;
        lo = mid - hw;
        hi = mid + hw;
        any = scan();
        --expansions_left;
    }

    ConfidenceSet cs;
    cs.level = 1.0 - alpha;
    cs.grid = GridSpec{lo * opts.shock_size, hi * opts.shock_size, npts};

    if (!any) {
        cs.empty_on_grid = true;
        if (custom && (center < lo || center > hi))
            fail(errc::grid_insufficient,
                 "grid does not bracket the point estimate and accepts nothing");
        return cs;
    }

    const double step = (hi - lo) / (npts - 1);
    int j = 0;
    while (j < npts) {
        if (!accept[j]) {
            ++j;
            continue;
        }
        int k = j;
        while (k + 1 < npts && accept[k + 1]) ++k;
        double seg_lo = lo + j * step;
        double seg_hi = lo + k * step;
        if (j == 0) {
            seg_lo = -kInf;
            cs.unbounded = true;
        }
        if (k == npts - 1) {
            seg_hi = kInf;
            cs.unbounded = true;
        }
        cs.segments.emplace_back(seg_lo * opts.shock_size, seg_hi * opts.shock_size);
        j = k + 1;
    }
    return cs;
}

ConfidenceSet wald_interval(const IrfInference::Quadratic& quad, double alpha, double shock_size,
                            double first_stage_f) {
    require(alpha > 0.0 && alpha < 1.0, errc::invalid_argument, "alpha must be in (0,1)");
    const double z = norm_quantile(1.0 - alpha / 2.0);
    const double lam = quad.lambda_hat();
    require(std::isfinite(lam), errc::weak_denominator,
            "point estimate is not finite; use the AR set");
    double se = quad.se_wald();
    if (!std::isfinite(se)) se = 0.0;

    ConfidenceSet cs;
    cs.level = 1.0 - alpha;
    cs.segments.emplace_back((lam - z * se) * shock_size, (lam + z * se) * shock_size);
    cs.grid = GridSpec{cs.segments[0].first, cs.segments[0].second, 2};
    cs.weak_warning = first_stage_f < 10.0;
    return cs;
}

ConfidenceSet ar_confidence_set(const PvarModel& model, const AlignedSample& sample, int h,
                                int response_var, double alpha, const InferenceOptions& opts) {
    const IrfInference inf(model, sample, opts.variance);
    const auto quad = inf.lambda_quadratic(h, response_var, opts.cumulative);
    return invert_ar_quadratic(quad, alpha, opts);
}

ConfidenceSet ar_confidence_set(const PvarModel& model, const InstrumentSeries& z, int h,
                                int response_var, double alpha, const InferenceOptions& opts) {
    return ar_confidence_set(model, align_instrument(model, z), h, response_var, alpha, opts);
}

ConfidenceSet plug_in_confidence_set(const PvarModel& model, const AlignedSample& sample, int h,
                                     int response_var, double alpha,
                                     const InferenceOptions& opts) {
    const IrfInference inf(model, sample, opts.variance);
    const auto quad = inf.lambda_quadratic(h, response_var, opts.cumulative);
    return wald_interval(quad, alpha, opts.shock_size, inf.first_stage_f());
}

ConfidenceSet plug_in_confidence_set(const PvarModel& model, const InstrumentSeries& z, int h,
                                     int response_var, double alpha,
                                     const InferenceOptions& opts) {
    return plug_in_confidence_set(model, align_instrument(model, z), h, response_var, alpha, opts);
}

double variance_lambda(const PvarModel& model, const AlignedSample& sample, int h,
                       int response_var, double lambda0, const InferenceOptions& opts) {
    const IrfInference inf(model, sample, opts.variance);
    const auto quad = inf.lambda_quadratic(h, response_var, opts.cumulative);
    const double s2 = quad.sigma2(lambda0);
    require(std::isfinite(s2), errc::singular_covariance, "variance estimate is not finite");
    return s2;
}

}  // namespace pvariv
