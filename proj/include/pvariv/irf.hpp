#pragma once

#include <Eigen/Dense>
#include <vector>

#include "pvariv/pvar.hpp"
#include "pvariv/svar_iv.hpp"

namespace pvariv {

/// Moving-average coefficients C_0..C_H of the lag polynomial: C_0 = I and
/// C_k is the top-left m x m block of the k-th companion-matrix power.
std::vector<Eigen::MatrixXd> ma_coefficients(const std::vector<Eigen::MatrixXd>& phi, int horizon);

struct IrfResult {
    int horizon = 0;
    double shock_size = 0.01;
    Normalization normalization = Normalization::unit;
    std::vector<std::string> var_names;
    Eigen::MatrixXd responses;   // (H+1) x m
    Eigen::MatrixXd cumulative;  // (H+1) x m, prefix sums of responses
};

/// Point impulse responses to a policy shock. Under unit normalization the
/// shock is scaled so that the policy variable moves by exactly shock_size
/// on impact; the impact response of outcome j is then shock_size * beta_j.
IrfResult irf_point(const PvarModel& model, const StructuralColumn& column, int horizon,
                    double shock_size = 0.01);

/// Recomputes the running sums of a result's responses.
IrfResult cumulative(IrfResult irf);

}  // namespace pvariv
