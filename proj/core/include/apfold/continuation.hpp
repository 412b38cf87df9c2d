#pragma once

#include "apfold/nonlinear.hpp"
#include "apfold/problem.hpp"
#include "apfold/subsuper.hpp"

#include <limits>
#include <span>
#include <vector>

namespace apfold {

struct BranchPoint {
    double t = 0.0;
    Vector u;
    /// Smallest eigenvalue of the pencil (J(u), M_P); NaN when not computed.
    double stability_mu = std::numeric_limits<double>::quiet_NaN();
    /// Cumulative pseudo-arclength.
    double arclength = 0.0;
    double scaled_residual = 0.0;
    double u_at_0 = 0.0;
    double e0_norm = 0.0;
};

enum class StopReason { window_exit, max_points, step_underflow, fold_passed };

std::string_view to_string(StopReason r) noexcept;

struct Branch {
    std::vector<BranchPoint> points;
    StopReason stop = StopReason::max_points;
    /// Step length in use when the trace stopped.
    double final_ds = 0.0;
};

struct ContinuationOptions {
    /// Initial step; a negative value starts in the direction of decreasing t.
    double ds = 0.25;
    double ds_min = 1e-7;
    double ds_max = 1.0;
    double t_min = -std::numeric_limits<double>::infinity();
    double t_max = std::numeric_limits<double>::infinity();
    std::size_t max_points = 2000;
    /// Corrector convergence on the scaled residual.
    double tol = 1e-11;
    int corrector_maxit = 12;
    /// A step whose corrector needs at most this many iterations is easy;
    /// `easy_streak` consecutive easy steps double ds.
    int easy_iterations = 3;
    int easy_streak = 4;
    bool compute_stability = true;
    /// Stop once t has decreased on this many consecutive steps after an
    /// increase (0 disables).
    int stop_after_fold = 0;
};

/// Newton started at the subsolution w(t). Well below the fold this lands
/// on the stable (minimal) branch; check stability_mu > 0 to confirm.
SolutionProfile solve_from_subsolution(const ProblemInstance& instance, double t, const NewtonOptions& options = {});

/// Pseudo-arclength continuation in (u, t) with the P-weighted norm on u.
/// Each corrector step solves the bordered system by block elimination on
/// the tridiagonal Jacobian plus one pass of iterative refinement. Throws
/// Error(initial_point_invalid) when u_start is not a solution at t_start.
Branch trace_branch(const ProblemInstance& instance, double t_start, std::span<const double> u_start,
                    const ContinuationOptions& options = {});

/// Smallest eigenvalue of J(u) x = mu M_P x, by inverse iteration on
/// J + s M_P with s = max(0, max g'(u)) + 1.
double stability_mu(const ProblemInstance& instance, std::span<const double> u, double tol = 1e-11,
                    int maxit = 2000);

enum class FoldMethod { arclength, bisection };

struct FoldResult {
    double alpha = 0.0;
    SolutionProfile u_fold;
    FoldMethod method = FoldMethod::arclength;
    /// |alpha_arclength - alpha_bisection| once both are known, else NaN.
    double agreement_gap = std::numeric_limits<double>::quiet_NaN();
    /// The fold polish ran at alpha - polish_offset.
    double polish_offset = 0.0;
    /// Bisection reached its t cap without failing.
    bool no_fold = false;
    /// Index of the branch point with the largest t.
    std::size_t fold_index = 0;
    int newton_attempts = 0;
};

struct FoldOptions {
    /// Local retraces shrink the spacing by this factor per level.
    double refine_factor = 40.0;
    int refine_levels = 2;
    double tol = 1e-11;
};

/// Fold location from the turning point of t along the branch: the vertex of
/// the parabola through the three points around the maximum of t, after
/// local retraces at finer spacing. The near-fold solution is
/// Newton-polished at alpha - 1e-8 (1 + |alpha|), backing off by factors of
/// 10 if that fails. Throws Error(no_fold_in_branch) when t has no interior
/// maximum.
FoldResult detect_fold(const ProblemInstance& instance, const Branch& branch, const FoldOptions& options = {});

struct BisectOptions {
    double dt_init = 1.0;
    double dt_min = 1e-9;
    double t_cap = std::numeric_limits<double>::infinity();
    double tol = 1e-12;
    int newton_maxit = 40;
};

/// Climbs in t with Newton warm-started at the last solution, halving dt on
/// failure, until dt < dt_min. alpha is the midpoint of the last bracket.
/// Reaching t_cap sets no_fold and reports alpha = t_cap.
FoldResult bisect_alpha(const ProblemInstance& instance, double t_known, std::span<const double> u_known,
                        const BisectOptions& options = {});

struct TwoSolutions {
    SolutionProfile lower;
    SolutionProfile upper;
    double separation = 0.0;
    /// Interval (subsolution at t_query, lower-branch solution at
    /// (t_query + alpha) / 2) used for the membership reports.
    OrderedInterval interval;
    MembershipReport lower_membership;
    MembershipReport upper_membership;
};

/// Both solutions at t_query: from the branch segments before and after the
/// fold, linearly interpolated and Newton-polished; `lower` is the one with
/// the smaller value at the origin. Throws
/// Error(query_past_fold) when t_query >= alpha, Error(no_convergence) when
/// the branch does not reach t_query on both sides or a polish fails.
TwoSolutions two_solutions(const ProblemInstance& instance, double t_query, const Branch& branch,
                           const FoldResult& fold);

}  // namespace apfold
