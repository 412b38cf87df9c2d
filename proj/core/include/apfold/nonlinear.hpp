#pragma once

#include "apfold/problem.hpp"

#include <span>
#include <vector>

namespace apfold {

/// F(u) = A u - M_P (g(u) + t phi1 + f1) for a fixed instance and t. Holds a
/// reference to the instance, which must outlive it.
class NonlinearSystem {
public:
    NonlinearSystem(const ProblemInstance& instance, double t);

    const ProblemInstance& instance() const noexcept { return *instance_; }
    double t() const noexcept { return t_; }
    /// M_P (t phi1 + f1).
    std::span<const double> rhs_affine() const noexcept { return rhs_affine_; }

    Vector residual(std::span<const double> u) const;
    /// J(u) = A - M_{P g'(u)}.
    TridiagonalOperator jacobian(std::span<const double> u) const;
    /// dF/dt = -M_P phi1.
    Vector t_derivative() const;
    /// max_i (|sub_i u_{i-1}| + |diag_i u_i| + |super_i u_{i+1}| + M_i (|g(u_i)| + |t phi1_i| + |f1_i|)):
    /// the size of the terms that cancel in F.
    double row_scale(std::span<const double> u) const;
    /// ||F(u)||_inf / row_scale(u).
    double scaled_residual(std::span<const double> u) const;

private:
    const ProblemInstance* instance_;
    double t_;
    Vector rhs_affine_;
};

/// K_t(v): the solution u of A u = M_P g(v) + rhs_affine.
Vector apply_solution_operator(const NonlinearSystem& sys, std::span<const double> v);

struct NewtonOptions {
    /// Convergence when scaled_residual <= tol.
    double tol = 1e-13;
    int maxit = 50;
    /// Armijo backtracking on 0.5 ||F||_2^2.
    bool damping = true;
    int max_halvings = 30;
    /// Abandon the solve when an iterate leaves this sup-norm ball.
    double divergence_bound = 1e8;
};

/// Outcome of a root search. Failure is reported through `converged`, not
/// by throwing.
struct NewtonResult {
    Vector u;
    bool converged = false;
    int iterations = 0;
    double residual_inf = 0.0;
    double scaled_residual = 0.0;
    /// Step length factor of the last accepted step.
    double last_step = 0.0;
};

NewtonResult newton_solve(const NonlinearSystem& sys, std::span<const double> u0, const NewtonOptions& options = {});

/// prod_k (1 / ||u - u_k||_P^2 + 1), capped at 1e300 so a known root gives a
/// large finite penalty.
double deflation_factor(const ProblemInstance& instance, std::span<const Vector> known, std::span<const double> u);

/// Newton on m(u) F(u) with m the deflation factor. A converged result is
/// also at least 1e-4 (1 + ||u_k||_inf) away from every known root in the sup
/// norm; otherwise `converged` is false.
NewtonResult deflated_solve(const NonlinearSystem& sys, std::span<const Vector> known, std::span<const double> u0,
                            const NewtonOptions& options = {});

struct PicardOptions {
    double tol = 1e-12;
    int maxit = 2000;
    double divergence_bound = 1e8;
};

/// u_{k+1} = K_t(u_k) until ||u_{k+1} - u_k||_inf <= tol (1 + ||u_k||_inf).
NewtonResult picard_iterate(const NonlinearSystem& sys, std::span<const double> u0, const PicardOptions& options = {});

}  // namespace apfold
