#pragma once

#include "apfold/problem.hpp"

#include <limits>
#include <span>

namespace apfold {

/// Pointwise ordered pair lower <= upper.
struct OrderedInterval {
    Vector lower;
    Vector upper;
    /// min_i (upper_i - lower_i).
    double ordering_margin = 0.0;

    static OrderedInterval make(Vector lower, Vector upper);
};

/// A computed solution with its diagnostics. Fields left NaN are not yet
/// computed (stability_mu is filled by the continuation module).
struct SolutionProfile {
    Vector u;
    double t = 0.0;
    double residual_inf = 0.0;
    double scaled_residual = 0.0;
    double e0_norm = 0.0;
    double decay_coeff = 0.0;
    double stability_mu = std::numeric_limits<double>::quiet_NaN();
    int iterations = 0;
    bool converged = false;
};

/// Fills residual, E0 norm and decay coefficient for u at coefficient t.
SolutionProfile make_profile(const ProblemInstance& instance, double t, Vector u, int iterations, bool converged);

/// Solves (A - mu_lower M_P) w = M_P (-Theta + t phi1 + f1). Throws
/// Error(singular_operator) when mu_lower >= lambda1.
Vector build_subsolution(const ProblemInstance& instance, double t);

struct Supersolution {
    Vector v;
    /// Every t <= t_threshold makes v a strict supersolution.
    double t_threshold = 0.0;
    /// max { g(s) + f1(x) : 0 <= s <= L }.
    double m = 0.0;
    /// Ramp F: 0 on [0, R1], m on [R2, R], cubic smoothstep between.
    Vector ramp;
    double r1 = 0.0;
    double r2 = 0.0;
    int attempts = 0;
};

/// Plateau supersolution: v solves A v = M_P F with the ramp F above. When
/// ||v||_inf > L the ramp is shifted outward (R1 *= 1.25, same width) until
/// it fits; throws Error(ramp_failed) once R1 would exceed R/2.
Supersolution build_supersolution(const ProblemInstance& instance, double L, double r1, double r2);

struct MonotoneOptions {
    /// Shift c; NaN selects 1.05 max(0, sup g') over [min lower, max upper].
    double shift = std::numeric_limits<double>::quiet_NaN();
    double tol = 1e-12;
    int maxit = 200000;
    /// Allowed rounding slack in the monotonicity and bound assertions,
    /// relative to 1 + ||u||_inf.
    double order_slack = 1e-12;
};

struct MonotoneTrace {
    int steps = 0;
    /// min over steps and nodes of d (u_{k+1} - u_k), d = +1 from below and
    /// -1 from above.
    double min_increment = std::numeric_limits<double>::infinity();
    /// max over steps and nodes of d (u_{k+1} - b), b the interval end opposite the start.
    double max_overshoot = -std::numeric_limits<double>::infinity();
    double shift = 0.0;
};

/// (A + c M_P) u_{k+1} = M_P (g(u_k) + c u_k + t phi1 + f1) from u_0 =
/// interval.lower, or from interval.upper when `from_upper` (then the
/// iterates decrease). Throws Error(monotonicity_broken) if an iterate moves
/// the wrong way or leaves the interval, Error(no_convergence) after maxit.
SolutionProfile monotone_iterate(const ProblemInstance& instance, double t, const OrderedInterval& interval,
                                 const MonotoneOptions& options = {}, MonotoneTrace* trace = nullptr,
                                 bool from_upper = false);

struct MembershipReport {
    bool strictly_ordered = false;
    bool lower_tail_gap = false;
    bool upper_tail_gap = false;
    bool member = false;
    /// min (u - lower), min (upper - u) over all nodes.
    double min_gap_lower = 0.0;
    double min_gap_upper = 0.0;
    /// min over the tail window of r^{N-2} (u - lower), r^{N-2} (upper - u).
    double tail_gap_lower = 0.0;
    double tail_gap_upper = 0.0;
};

/// Membership of u in the open order set between the interval ends with
/// positive weighted tail gaps on [tail_lo, tail_hi].
MembershipReport check_order_interval(const RadialGrid& grid, std::span<const double> u,
                                      const OrderedInterval& interval, double tail_lo, double tail_hi);

}  // namespace apfold
