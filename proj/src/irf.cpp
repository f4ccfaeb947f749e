#include "pvariv/irf.hpp"

#include <cmath>

#include "pvariv/errors.hpp"

namespace pvariv {

std::vector<Eigen::MatrixXd> ma_coefficients(const std::vector<Eigen::MatrixXd>& phi,
                                             int horizon) {
    require(horizon >= 0, errc::invalid_argument, "horizon must be >= 0");
    require(!phi.empty(), errc::invalid_argument, "need at least one slope matrix");
    const int m = static_cast<int>(phi[0].rows());

    std::vector<Eigen::MatrixXd> c;
    c.reserve(horizon + 1);
    c.push_back(Eigen::MatrixXd::Identity(m, m));
    if (horizon == 0) return c;

    const Eigen::MatrixXd comp = companion_matrix(phi);
    Eigen::MatrixXd power = comp;
    for (int k = 1; k <= horizon; ++k) {
        c.push_back(power.topLeftCorner(m, m));
        if (k < horizon) power = power * comp;
    }
    return c;
}

IrfResult irf_point(const PvarModel& model, const StructuralColumn& column, int horizon,
                    double shock_size) {
    const int m = model.n_vars();
    require(column.gamma_vec.size() == m, errc::invalid_argument,
            "structural column size does not match the model");

    Eigen::VectorXd impulse;
    if (column.normalization == Normalization::unit) {
        // Scale so the policy entry is exactly 1; the impact row of C_0 = I
        // then reproduces shock_size bit-for-bit.
        const double denom = column.gamma_vec(0);
        require(denom != 0.0 && std::abs(denom) > 1e-12 * column.gamma_vec.norm(),
                errc::weak_denominator, "policy loading of the structural column is zero");
        impulse = column.gamma_vec / denom;
    } else {
        impulse = column.r_col;
        require(impulse(0) != 0.0, errc::weak_denominator,
                "policy loading of the structural column is zero");
    }

    const auto c = ma_coefficients(model.phi, horizon);

    IrfResult irf;
    irf.horizon = horizon;
    irf.shock_size = shock_size;
    irf.normalization = column.normalization;
    irf.var_names = model.var_names;
    irf.responses.resize(horizon + 1, m);
    for (int h = 0; h <= horizon; ++h)
        irf.responses.row(h) = shock_size * (c[h] * impulse).transpose();
    return cumulative(std::move(irf));
}

IrfResult cumulative(IrfResult irf) {
    irf.cumulative.resizeLike(irf.responses);
    Eigen::RowVectorXd run = Eigen::RowVectorXd::Zero(irf.responses.cols());
    for (int h = 0; h < irf.responses.rows(); ++h) {
        run += irf.responses.row(h);
        irf.cumulative.row(h) = run;
    }
    return irf;
}

}  // namespace pvariv
