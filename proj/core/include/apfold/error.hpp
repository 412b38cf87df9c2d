#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace apfold {

/// Failure categories raised by the solver library.
///
/// Newton-type non-convergence is NOT reported through this type: those
/// solvers return a result with `converged == false` so that callers can
/// use failure as a signal (nonexistence probing, fold bracketing).
enum class ErrorKind {
    bad_grid_config,
    non_positive_weight,
    divergent_moment,
    probe_out_of_range,
    slope_violation,
    not_normalized,
    singular_operator,
    zero_denominator,
    no_convergence,
    monotonicity_broken,
    ramp_failed,
    initial_point_invalid,
    no_fold_in_branch,
    query_past_fold,
    config_error,
    io_error,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace apfold
