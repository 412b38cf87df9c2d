#include "apfold/nonlinear.hpp"

#include "apfold/error.hpp"

#include <algorithm>
#include <cmath>

namespace apfold {

namespace {

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double half_square(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return 0.5 * s;
}

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

void finish(const NonlinearSystem& sys, NewtonResult& res) {
    const Vector F = sys.residual(res.u);
    res.residual_inf = max_abs(F);
    res.scaled_residual = sys.scaled_residual(res.u);
}

/// One damped step along `dir` on the merit 0.5 ||scale(u) F(u)||^2.
/// Returns the accepted step factor, or 0 when backtracking gave up.
template <typename Merit>
double line_search(Vector& u, std::span<const double> dir, double merit0, const Merit& merit, bool damping,
                   int max_halvings) {
    double s = 1.0;
    Vector trial(u.size());
    for (int k = 0; k <= max_halvings; ++k) {
        for (std::size_t i = 0; i < u.size(); ++i) trial[i] = u[i] + s * dir[i];
        const double m = merit(trial);
        if (std::isfinite(m) && (!damping || m <= (1.0 - 2e-4 * s) * merit0)) {
            u.swap(trial);
            return s;
        }
        s *= 0.5;
    }
    return 0.0;
}

}  // namespace

NonlinearSystem::NonlinearSystem(const ProblemInstance& instance, double t) : instance_(&instance), t_(t) {
    const auto m = instance.mass();
    const auto phi = instance.phi1();
    const auto f1 = instance.f1();
    rhs_affine_.resize(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) rhs_affine_[i] = m[i] * (t * phi[i] + f1[i]);
}

Vector NonlinearSystem::residual(std::span<const double> u) const {
    Vector F = instance_->laplacian().apply(u);
    const auto m = instance_->mass();
    for (std::size_t i = 0; i < F.size(); ++i) F[i] -= m[i] * instance_->g(u[i]) + rhs_affine_[i];
    return F;
}

TridiagonalOperator NonlinearSystem::jacobian(std::span<const double> u) const {
    TridiagonalOperator J = instance_->laplacian();
    const auto m = instance_->mass();
    for (std::size_t i = 0; i < u.size(); ++i) J.diag[i] -= m[i] * instance_->g_prime(u[i]);
    return J;
}

Vector NonlinearSystem::t_derivative() const {
    const auto m = instance_->mass();
    const auto phi = instance_->phi1();
    Vector d(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) d[i] = -m[i] * phi[i];
    return d;
}

double NonlinearSystem::row_scale(std::span<const double> u) const {
    const TridiagonalOperator& A = instance_->laplacian();
    const auto m = instance_->mass();
    const auto phi = instance_->phi1();
    const auto f1 = instance_->f1();
    const std::size_t n = u.size();
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = std::abs(A.diag[i] * u[i]);
        if (i > 0) row += std::abs(A.sub[i] * u[i - 1]);
        if (i + 1 < n) row += std::abs(A.super[i] * u[i + 1]);
        row += m[i] * (std::abs(instance_->g(u[i])) + std::abs(t_ * phi[i]) + std::abs(f1[i]));
        scale = std::max(scale, row);
    }
    return scale;
}

double NonlinearSystem::scaled_residual(std::span<const double> u) const {
    const double r = max_abs(residual(u));
    const double s = row_scale(u);
    return s > 0.0 ? r / s : r;
}

Vector apply_solution_operator(const NonlinearSystem& sys, std::span<const double> v) {
    const ProblemInstance& inst = sys.instance();
    const auto m = inst.mass();
    const auto b = sys.rhs_affine();
    Vector rhs(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) rhs[i] = m[i] * inst.g(v[i]) + b[i];
    return solve_tridiagonal(inst.laplacian(), rhs);
}

NewtonResult newton_solve(const NonlinearSystem& sys, std::span<const double> u0, const NewtonOptions& options) {
    NewtonResult res;
    res.u.assign(u0.begin(), u0.end());
    auto merit = [&](std::span<const double> u) { return half_square(sys.residual(u)); };
    for (res.iterations = 0;; ++res.iterations) {
        const Vector F = sys.residual(res.u);
        if (!all_finite(F)) break;
        if (sys.scaled_residual(res.u) <= options.tol) {
            res.converged = true;
            break;
        }
        if (res.iterations >= options.maxit) break;
        Vector dir;
        try {
            Vector rhs(F.size());
            for (std::size_t i = 0; i < F.size(); ++i) rhs[i] = -F[i];
            dir = solve_tridiagonal(sys.jacobian(res.u), rhs);
        } catch (const Error&) {
            break;
        }
        res.last_step = line_search(res.u, dir, half_square(F), merit, options.damping, options.max_halvings);
        if (res.last_step == 0.0 || max_abs(res.u) > options.divergence_bound) break;
    }
    finish(sys, res);
    return res;
}

double deflation_factor(const ProblemInstance& instance, std::span<const Vector> known, std::span<const double> u) {
    const auto& grid = instance.grid();
    const auto m = instance.mass();
    double factor = 1.0;
    for (const Vector& k : known) {
        double d2 = 0.0;
        const auto vol = grid.volumes();
        for (std::size_t i = 0; i < u.size(); ++i) d2 += vol[i] * m[i] * (u[i] - k[i]) * (u[i] - k[i]);
        if (!(d2 > 1e-300)) return 1e300;
        factor *= 1.0 / d2 + 1.0;
        if (!(factor < 1e300)) return 1e300;
    }
    return factor;
}

NewtonResult deflated_solve(const NonlinearSystem& sys, std::span<const Vector> known, std::span<const double> u0,
                            const NewtonOptions& options) {
    const ProblemInstance& inst = sys.instance();
    const auto vol = inst.grid().volumes();
    const auto m = inst.mass();
    auto distinct = [&](std::span<const double> u) {
        for (const Vector& k : known) {
            double d = 0.0;
            for (std::size_t i = 0; i < u.size(); ++i) d = std::max(d, std::abs(u[i] - k[i]));
            if (d < 1e-4 * (1.0 + max_abs(k))) return false;
        }
        return true;
    };
    auto merit = [&](std::span<const double> u) {
        const double f = deflation_factor(inst, known, u);
        return f * f * half_square(sys.residual(u));
    };

    NewtonResult res;
    res.u.assign(u0.begin(), u0.end());
    for (res.iterations = 0;; ++res.iterations) {
        const Vector F = sys.residual(res.u);
        if (!all_finite(F)) break;
        if (sys.scaled_residual(res.u) <= options.tol) {
            res.converged = distinct(res.u);
            break;
        }
        if (res.iterations >= options.maxit) break;
        Vector dir;
        try {
            Vector rhs(F.size());
            for (std::size_t i = 0; i < F.size(); ++i) rhs[i] = -F[i];
            dir = solve_tridiagonal(sys.jacobian(res.u), rhs);
        } catch (const Error&) {
            break;
        }
        // Newton on m F with J_mF = m J + F grad(m)^T: the step is the plain
        // Newton step scaled by 1 / (1 - grad(ln m) . dir).
        double slope = 0.0;
        for (const Vector& k : known) {
            double d2 = 0.0;
            double proj = 0.0;
            for (std::size_t i = 0; i < res.u.size(); ++i) {
                const double diff = res.u[i] - k[i];
                d2 += vol[i] * m[i] * diff * diff;
                proj += vol[i] * m[i] * diff * dir[i];
            }
            if (d2 > 1e-300) slope += -2.0 * proj / (d2 * (1.0 + d2));
        }
        const double denom = 1.0 - slope;
        const double tau = std::abs(denom) > 1e-12 ? 1.0 / denom : 1.0;
        for (double& x : dir) x *= tau;
        const double f = deflation_factor(inst, known, res.u);
        res.last_step =
            line_search(res.u, dir, f * f * half_square(F), merit, options.damping, options.max_halvings);
        if (res.last_step == 0.0 || max_abs(res.u) > options.divergence_bound) break;
    }
    finish(sys, res);
    return res;
}

NewtonResult picard_iterate(const NonlinearSystem& sys, std::span<const double> u0, const PicardOptions& options) {
    NewtonResult res;
    res.u.assign(u0.begin(), u0.end());
    for (res.iterations = 0; res.iterations < options.maxit; ++res.iterations) {
        Vector next;
        try {
            next = apply_solution_operator(sys, res.u);
        } catch (const Error&) {
            break;
        }
        if (!all_finite(next) || max_abs(next) > options.divergence_bound) break;
        double change = 0.0;
        for (std::size_t i = 0; i < next.size(); ++i) change = std::max(change, std::abs(next[i] - res.u[i]));
        const double size = max_abs(res.u);
        res.u = std::move(next);
        res.last_step = 1.0;
        if (change <= options.tol * (1.0 + size)) {
            res.converged = true;
            ++res.iterations;
            break;
        }
    }
    finish(sys, res);
    return res;
}

}  // namespace apfold
