#pragma once

// Shared fixtures for the test suites: random stable systems, simulated
// panels, and small independent oracles.

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "pvariv/panel_data.hpp"
#include "pvariv/rng.hpp"

namespace testutil {

inline Eigen::MatrixXd random_matrix(pvariv::Rng& rng, int rows, int cols) {
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = rng.normal();
    return m;
}

/// Random slope matrices rescaled to a target companion spectral radius.
inline std::vector<Eigen::MatrixXd> random_stable_phi(pvariv::Rng& rng, int m, int p,
                                                      double radius = 0.7) {
    std::vector<Eigen::MatrixXd> phi;
    for (int l = 0; l < p; ++l) phi.push_back(0.3 * random_matrix(rng, m, m) / std::sqrt(m));
    const int mp = m * p;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(mp, mp);
    for (int l = 0; l < p; ++l) a.block(0, l * m, m, m) = phi[l];
    if (p > 1) a.block(m, 0, m * (p - 1), m * (p - 1)).setIdentity();
    const double rho = a.eigenvalues().cwiseAbs().maxCoeff();
    if (rho > 1e-12) {
        // scaling lag l by s^l scales the companion radius by s
        const double s = radius / rho;
        double sl = 1.0;
        for (int l = 0; l < p; ++l) {
            sl *= s;
            phi[l] *= sl;
        }
    }
    return phi;
}

inline Eigen::MatrixXd random_spd(pvariv::Rng& rng, int m, double scale = 1.0) {
    const Eigen::MatrixXd a = random_matrix(rng, m, m);
    return scale * (a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(m, m));
}

/// Simulates a fixed-effects VAR panel (Gaussian innovations with covariance
/// sigma, unit effects ~ N(0, I), 100-period burn-in).
inline pvariv::PanelDataset simulate_var_panel(pvariv::Rng& rng,
                                               const std::vector<Eigen::MatrixXd>& phi,
                                               const Eigen::MatrixXd& sigma, int n_units,
                                               int n_periods) {
    const int m = static_cast<int>(sigma.rows());
    const int p = static_cast<int>(phi.size());
    const Eigen::MatrixXd chol = Eigen::LLT<Eigen::MatrixXd>(sigma).matrixL();
    Eigen::MatrixXd phisum = Eigen::MatrixXd::Zero(m, m);
    for (const auto& ph : phi) phisum += ph;
    const Eigen::MatrixXd imp = Eigen::MatrixXd::Identity(m, m) - phisum;

    pvariv::PanelDataset ds;
    for (int v = 0; v < m; ++v) ds.var_names.push_back("v" + std::to_string(v));
    for (int t = 1; t <= n_periods; ++t) ds.time_ids.push_back(t);
    ds.data.assign(n_units, Eigen::MatrixXd(n_periods, m));

    const int burn = 100;
    Eigen::VectorXd mu(m), eta(m), x(m);
    std::vector<Eigen::VectorXd> lags(p, Eigen::VectorXd(m));
    for (int i = 0; i < n_units; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "u%03d", i);
        ds.unit_ids.push_back(buf);
        for (int v = 0; v < m; ++v) mu(v) = rng.normal();
        const Eigen::VectorXd intercept = imp * mu;
        for (int l = 0; l < p; ++l) lags[l] = mu;
        for (int t = 0; t < burn + n_periods; ++t) {
            for (int v = 0; v < m; ++v) eta(v) = rng.normal();
            x = intercept + chol * eta;
            for (int l = 0; l < p; ++l) x += phi[l] * lags[l];
            for (int l = p - 1; l >= 1; --l) lags[l] = lags[l - 1];
            lags[0] = x;
            if (t >= burn) ds.data[i].row(t - burn) = x.transpose();
        }
    }
    return ds;
}

/// Builds a panel directly from per-unit matrices.
inline pvariv::PanelDataset make_panel(const std::vector<Eigen::MatrixXd>& blocks,
                                       const std::vector<std::string>& vars) {
    pvariv::PanelDataset ds;
    ds.var_names = vars;
    for (size_t i = 0; i < blocks.size(); ++i) ds.unit_ids.push_back("u" + std::to_string(i));
    for (int t = 1; t <= blocks[0].rows(); ++t) ds.time_ids.push_back(t);
    ds.data = blocks;
    return ds;
}

}  // namespace testutil
