#pragma once

#include "apfold/problem.hpp"
#include "apfold/radial_grid.hpp"

#include <span>
#include <string>
#include <vector>

namespace apfold {

struct TauStar {
    /// Theta int P phi1 dx: the nonexistence threshold.
    double weighted = 0.0;
    /// Theta int_{B_R} phi1 dx, reported for comparison; grows with R when
    /// N = 3 since phi1 ~ r^{-1}.
    double unweighted = 0.0;
};

TauStar tau_star(const ProblemInstance& instance);

struct NegativePartCheck {
    bool pass = true;
    /// max over {u < 0} of |u| - |w|.
    double max_violation = 0.0;
};

/// Pass iff max over {u < 0} of (|u| - |w|) <= 1e-8 (1 + ||w||_inf).
NegativePartCheck check_negative_part(std::span<const double> u, std::span<const double> w);

/// int P g(u^+) phi1 dx.
double weighted_source_functional(const ProblemInstance& instance, std::span<const double> u);

struct GradientBound {
    /// int |grad u^+|^2 dx, including the exterior harmonic extension for
    /// robin_decay.
    double value = 0.0;
    double sigma = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
};

GradientBound gradient_bound(const RadialGrid& grid, FarField farfield, std::span<const double> u);

/// max |u| + max r^{N-2} |u|.
double e0_norm(const RadialGrid& grid, std::span<const double> u);

/// Limit estimate of r^{N-2} u: its mean over [3R/4, R].
double decay_coefficient(const RadialGrid& grid, std::span<const double> u);

/// Solution of -Delta u = rho for a source supported in B_R, by the radial
/// shell formula u(r) = [r^{-(N-2)} int_0^r s^{N-1} rho ds + int_r^R s rho ds] / (N-2)
/// with cumulative trapezoidal quadrature.
Vector riesz_potential(const RadialGrid& grid, std::span<const double> rho);

/// ||u - riesz_potential(P (g(u) + t phi1 + f1))||_E0 / ||u||_E0 (absolute
/// when ||u||_E0 = 0).
double representation_residual(const ProblemInstance& instance, double t, std::span<const double> u);

struct ComparisonCheck {
    double min_u = 0.0;
    double max_abs_u = 0.0;
    bool pass = true;
};

/// Solves (A - mu M) u = rhs and passes iff min u >= -1e-12 ||u||_inf.
/// Throws Error(singular_operator) when mu >= lambda1.
ComparisonCheck check_comparison(const TridiagonalOperator& A, std::span<const double> mass, double mu,
                                 double lambda1, std::span<const double> rhs);

enum class CheckKind {
    /// value <= bound + tolerance
    upper_bound,
    /// value >= bound - tolerance
    lower_bound,
    /// recorded only
    info,
};

struct CheckEntry {
    std::string name;
    double value = 0.0;
    double bound = 0.0;
    double tolerance = 0.0;
    CheckKind kind = CheckKind::info;
    bool pass = true;
};

struct VerificationReport {
    std::string instance_id;
    std::string solution_id;
    double t = 0.0;
    std::vector<CheckEntry> entries;

    bool pass() const;
    const CheckEntry* find(const std::string& name) const;
};

/// Runs every pointwise and integral check on one solution at coefficient t.
VerificationReport verify_solution(const ProblemInstance& instance, double t, std::span<const double> u,
                                   const std::string& instance_id = "", const std::string& solution_id = "");

}  // namespace apfold
