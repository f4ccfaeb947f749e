#pragma once

#include <stdexcept>
#include <string>

namespace pvariv {

enum class errc {
    // data / configuration problems
    invalid_argument,
    io_error,
    parse_error,
    duplicate_key,
    unbalanced_panel,
    too_few_periods,
    too_few_observations,
    degenerate_denominator,
    degenerate_instrument,
    nonstationary_dgp,
    // numerical failures
    singular_design,
    degenerate_residuals,
    weak_denominator,
    singular_q,
    normalization_failure,
    factorization_error,
    singular_covariance,
    grid_insufficient,
};

// Two coarse categories drive the CLI/C-API status mapping:
// data/config -> 2, numerical -> 3.
inline bool is_data_error(errc c) {
    switch (c) {
        case errc::invalid_argument:
        case errc::io_error:
        case errc::parse_error:
        case errc::duplicate_key:
        case errc::unbalanced_panel:
        case errc::too_few_periods:
        case errc::too_few_observations:
        case errc::degenerate_denominator:
        case errc::degenerate_instrument:
        case errc::nonstationary_dgp:
            return true;
        default:
            return false;
    }
}

inline const char* errc_name(errc c) {
    switch (c) {
        case errc::invalid_argument: return "InvalidArgument";
        case errc::io_error: return "IoError";
        case errc::parse_error: return "ParseError";
        case errc::duplicate_key: return "DuplicateKey";
        case errc::unbalanced_panel: return "UnbalancedPanel";
        case errc::too_few_periods: return "TooFewPeriods";
        case errc::too_few_observations: return "TooFewObservations";
        case errc::degenerate_denominator: return "DegenerateDenominator";
        case errc::degenerate_instrument: return "DegenerateInstrument";
        case errc::nonstationary_dgp: return "NonstationaryDgp";
        case errc::singular_design: return "SingularDesign";
        case errc::degenerate_residuals: return "DegenerateResiduals";
        case errc::weak_denominator: return "WeakDenominator";
        case errc::singular_q: return "SingularQ";
        case errc::normalization_failure: return "NormalizationFailure";
        case errc::factorization_error: return "FactorizationError";
        case errc::singular_covariance: return "SingularCovariance";
        case errc::grid_insufficient: return "GridInsufficient";
    }
    return "UnknownError";
}

class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    errc code() const noexcept { return code_; }
    bool data_error() const noexcept { return is_data_error(code_); }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, errc code, const std::string& what) {
    if (!cond) fail(code, what);
}

}  // namespace pvariv
