#include "apfold/error.hpp"

namespace apfold {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::bad_grid_config: return "BadGridConfig";
        case ErrorKind::non_positive_weight: return "NonPositiveWeight";
        case ErrorKind::divergent_moment: return "DivergentMoment";
        case ErrorKind::probe_out_of_range: return "ProbeOutOfRange";
        case ErrorKind::slope_violation: return "SlopeViolation";
        case ErrorKind::not_normalized: return "NotNormalized";
        case ErrorKind::singular_operator: return "SingularOperator";
        case ErrorKind::zero_denominator: return "ZeroDenominator";
        case ErrorKind::no_convergence: return "NoConvergence";
        case ErrorKind::monotonicity_broken: return "MonotonicityBroken";
        case ErrorKind::ramp_failed: return "RampFailed";
        case ErrorKind::initial_point_invalid: return "InitialPointInvalid";
        case ErrorKind::no_fold_in_branch: return "NoFoldInBranch";
        case ErrorKind::query_past_fold: return "QueryPastFold";
        case ErrorKind::config_error: return "ConfigError";
        case ErrorKind::io_error: return "IoError";
    }
    return "Unknown";
}

}  // namespace apfold
