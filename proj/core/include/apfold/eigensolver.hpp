#pragma once

#include "apfold/radial_grid.hpp"
#include "apfold/tridiagonal.hpp"

#include <functional>
#include <span>

namespace apfold {

struct EigenOptions {
    double tol = 1e-12;
    int maxit = 10000;
    /// Run the deflated second-eigenvalue solve for the simplicity check.
    bool compute_gap = true;
    /// Tail window for the decay constants, as fractions of R.
    double window_lo = 0.5;
    double window_hi = 1.0;
};

/// min / max of r^{N-2} phi over a tail window.
struct DecayConstants {
    double C1 = 0.0;
    double C2 = 0.0;
    double ratio = 0.0;
};

/// First eigenpair of A phi = lambda M_P phi.
struct EigenPair {
    double lambda1 = 0.0;
    /// Positive, normalized so that the discrete int P phi^2 dx = 1.
    Vector phi1;
    double normalization_residual = 0.0;
    double decay_C1 = 0.0;
    double decay_C2 = 0.0;
    double plateau_ratio = 0.0;
    /// Second eigenvalue from deflated inverse iteration (NaN when skipped).
    double lambda2 = 0.0;
    /// False when lambda2 - lambda1 < 1e-8 lambda1.
    bool simple = true;
    int iterations = 0;
    /// ||A phi - lambda M phi||_inf / (||A||_inf ||phi||_inf + lambda ||M phi||_inf).
    double residual = 0.0;
    /// ||A phi - lambda M phi||_inf / (lambda ||M phi||_inf).
    double residual_weighted = 0.0;
};

/// Inverse power iteration (shift 0) with a tridiagonal inner solve.
/// Stops once both the Rayleigh quotient and the iterate have settled to
/// `tol`, or once the iterate stalls at rounding level. Throws
/// Error(no_convergence) after maxit sweeps.
EigenPair first_eigenpair(const RadialGrid& grid, const TridiagonalOperator& A,
                          std::span<const double> mass, const EigenOptions& options = {});

/// (int |grad v|^2 dx + exterior energy for robin_decay) / int P v^2 dx, the
/// quadratic-form quotient of the discrete pencil. Throws
/// Error(zero_denominator) when int P v^2 dx vanishes.
double rayleigh_quotient(const RadialGrid& grid, FarField farfield, std::span<const double> mass,
                         std::span<const double> v);

/// Discrete int P u v dx with P taken from the mass diagonal.
double weighted_inner(const RadialGrid& grid, std::span<const double> mass, std::span<const double> u,
                      std::span<const double> v);

DecayConstants decay_constants(const RadialGrid& grid, std::span<const double> phi, double r_lo,
                               double r_hi);

/// Smallest eigenvalue of the pencil (A, M) after removing phi1 in the
/// M-weighted inner product.
double second_eigenvalue(const RadialGrid& grid, const TridiagonalOperator& A, std::span<const double> mass,
                         std::span<const double> phi1, double tol = 1e-10, int maxit = 5000);

struct ExtrapolatedEigenvalue {
    double fine = 0.0;
    double coarse = 0.0;
    std::size_t coarse_nodes = 0;
    /// (h_c^2 lambda_f - h_f^2 lambda_c) / (h_c^2 - h_f^2).
    double extrapolated = 0.0;
};

/// lambda1 on uniform grids with n and (n + 1) / 2 nodes, combined to
/// cancel the O(h^2) discretization error. Throws Error(bad_grid_config)
/// when n < 7.
ExtrapolatedEigenvalue extrapolate_lambda1(int dim, double radius, std::size_t nodes,
                                           const std::function<double(double)>& weight, FarField farfield,
                                           const EigenOptions& options = {});

}  // namespace apfold
