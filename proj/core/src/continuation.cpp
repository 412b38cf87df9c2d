#include "apfold/continuation.hpp"

#include "apfold/error.hpp"
#include "apfold/nonlinear.hpp"
#include "apfold/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace apfold {

namespace {

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

/// Inner product weights V_i M_i of the P-weighted norm.
Vector norm_weights(const ProblemInstance& instance) {
    const auto vol = instance.grid().volumes();
    const auto m = instance.mass();
    Vector w(vol.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = vol[i] * m[i];
    return w;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

struct BorderedSolution {
    Vector x;
    double y = 0.0;
};

/// Solves [J ft; c^T d] [x; y] = [r; q] by block elimination with one step
/// of iterative refinement.
BorderedSolution bordered_solve(const TridiagonalOperator& J, std::span<const double> ft, std::span<const double> c,
                                double d, std::span<const double> r, double q) {
    const Vector b = solve_tridiagonal(J, ft);
    const double den = d - dot(c, b);
    auto eliminate = [&](std::span<const double> rr, double qq) {
        const Vector a = solve_tridiagonal(J, rr);
        BorderedSolution s;
        s.y = (qq - dot(c, a)) / den;
        s.x.resize(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) s.x[i] = a[i] - s.y * b[i];
        return s;
    };
    BorderedSolution s = eliminate(r, q);
    Vector rr = J.apply(s.x);
    for (std::size_t i = 0; i < rr.size(); ++i) rr[i] = r[i] - rr[i] - ft[i] * s.y;
    const double qq = q - dot(c, s.x) - d * s.y;
    const BorderedSolution corr = eliminate(rr, qq);
    for (std::size_t i = 0; i < s.x.size(); ++i) s.x[i] += corr.x[i];
    s.y += corr.y;
    if (!std::isfinite(s.y) || !std::isfinite(den)) throw Error(ErrorKind::singular_operator, "bordered system");
    return s;
}

struct Tangent {
    Vector u;
    double t = 0.0;
};

/// Unit tangent (W-norm on u) continuing the orientation of `prev`.
Tangent tangent_at(const ProblemInstance& instance, std::span<const double> weights, std::span<const double> u,
                   double t, const Tangent& prev) {
    const NonlinearSystem sys(instance, t);
    const Vector ft = sys.t_derivative();
    Vector c(u.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = weights[i] * prev.u[i];
    const Vector zero(u.size(), 0.0);
    BorderedSolution s = bordered_solve(sys.jacobian(u), ft, c, prev.t, zero, 1.0);
    double nrm = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) nrm += weights[i] * s.x[i] * s.x[i];
    nrm = std::sqrt(nrm + s.y * s.y);
    Tangent out;
    out.u = std::move(s.x);
    for (double& x : out.u) x /= nrm;
    out.t = s.y / nrm;
    return out;
}

BranchPoint make_point(const ProblemInstance& instance, double t, Vector u, double arclength, bool stability) {
    BranchPoint p;
    p.t = t;
    p.arclength = arclength;
    p.scaled_residual = NonlinearSystem(instance, t).scaled_residual(u);
    p.u_at_0 = u[0];
    p.e0_norm = e0_norm(instance.grid(), u);
    if (stability) p.stability_mu = stability_mu(instance, u);
    p.u = std::move(u);
    return p;
}

NewtonOptions polish_options(double tol) {
    NewtonOptions o;
    o.tol = tol;
    o.maxit = 40;
    return o;
}

}  // namespace

std::string_view to_string(StopReason r) noexcept {
    switch (r) {
        case StopReason::window_exit: return "window_exit";
        case StopReason::max_points: return "max_points";
        case StopReason::step_underflow: return "step_underflow";
        case StopReason::fold_passed: return "fold_passed";
    }
    return "unknown";
}

double stability_mu(const ProblemInstance& instance, std::span<const double> u, double tol, int maxit) {
    const auto m = instance.mass();
    const auto vol = instance.grid().volumes();
    const std::size_t n = u.size();
    double s = 0.0;
    for (double x : u) s = std::max(s, instance.g_prime(x));
    s += 1.0;
    TridiagonalOperator op = instance.laplacian();
    for (std::size_t i = 0; i < n; ++i) op.diag[i] += m[i] * (s - instance.g_prime(u[i]));

    Vector x(instance.phi1().begin(), instance.phi1().end());
    Vector rhs(n);
    double rho = 0.0;
    for (int it = 0; it < maxit; ++it) {
        for (std::size_t i = 0; i < n; ++i) rhs[i] = m[i] * x[i];
        x = solve_tridiagonal(op, rhs);
        double nrm = 0.0;
        for (std::size_t i = 0; i < n; ++i) nrm += vol[i] * m[i] * x[i] * x[i];
        nrm = std::sqrt(nrm);
        for (double& v : x) v /= nrm;
        const Vector ox = op.apply(x);
        double num = 0.0;
        for (std::size_t i = 0; i < n; ++i) num += vol[i] * x[i] * ox[i];
        if (it > 0 && std::abs(num - rho) <= tol * (1.0 + std::abs(num))) return num - s;
        rho = num;
    }
    throw Error(ErrorKind::no_convergence, "inverse iteration for the Jacobian pencil");
}

SolutionProfile solve_from_subsolution(const ProblemInstance& instance, double t, const NewtonOptions& options) {
    const NewtonResult r = newton_solve(NonlinearSystem(instance, t), build_subsolution(instance, t), options);
    SolutionProfile p = make_profile(instance, t, r.u, r.iterations, r.converged);
    if (r.converged) p.stability_mu = stability_mu(instance, p.u);
    return p;
}

Branch trace_branch(const ProblemInstance& instance, double t_start, std::span<const double> u_start,
                    const ContinuationOptions& options) {
    const double start_res = NonlinearSystem(instance, t_start).scaled_residual(u_start);
    if (!(start_res <= std::max(100.0 * options.tol, 1e-8))) {
        std::ostringstream msg;
        msg << "scaled residual " << start_res << " at t = " << t_start;
        throw Error(ErrorKind::initial_point_invalid, msg.str());
    }
    const Vector weights = norm_weights(instance);
    const std::size_t n = u_start.size();

    Branch branch;
    branch.points.push_back(make_point(instance, t_start, Vector(u_start.begin(), u_start.end()), 0.0,
                                       options.compute_stability));

    Tangent seed;
    seed.u.assign(n, 0.0);
    seed.t = options.ds < 0.0 ? -1.0 : 1.0;
    Tangent tan = tangent_at(instance, weights, u_start, t_start, seed);

    double ds = std::abs(options.ds);
    int streak = 0;
    int falling = 0;
    bool rose = false;
    branch.stop = StopReason::max_points;
    while (branch.points.size() < options.max_points) {
        const BranchPoint& base = branch.points.back();
        Vector u(n);
        for (std::size_t i = 0; i < n; ++i) u[i] = base.u[i] + ds * tan.u[i];
        double t = base.t + ds * tan.t;
        const Vector up = u;
        const double tp = t;

        bool ok = false;
        int iterations = 0;
        try {
            Vector c(n);
            for (std::size_t i = 0; i < n; ++i) c[i] = weights[i] * tan.u[i];
            for (iterations = 1; iterations <= options.corrector_maxit; ++iterations) {
                const NonlinearSystem sys(instance, t);
                Vector F = sys.residual(u);
                double N = tan.t * (t - base.t) - ds;
                for (std::size_t i = 0; i < n; ++i) N += c[i] * (u[i] - base.u[i]);
                for (double& f : F) f = -f;
                const BorderedSolution s = bordered_solve(sys.jacobian(u), sys.t_derivative(), c, tan.t, F, -N);
                for (std::size_t i = 0; i < n; ++i) u[i] += s.x[i];
                t += s.y;
                if (!std::isfinite(t) || !std::isfinite(max_abs(u))) break;
                if (NonlinearSystem(instance, t).scaled_residual(u) <= options.tol) {
                    ok = true;
                    break;
                }
            }
        } catch (const Error&) {
            ok = false;
        }
        if (ok) {
            double dist = (t - tp) * (t - tp);
            for (std::size_t i = 0; i < n; ++i) dist += weights[i] * (u[i] - up[i]) * (u[i] - up[i]);
            ok = std::sqrt(dist) <= ds;
        }
        if (!ok) {
            ds *= 0.5;
            streak = 0;
            if (ds < options.ds_min) {
                branch.stop = StopReason::step_underflow;
                break;
            }
            continue;
        }

        const double prev_t = base.t;
        const double s_new = base.arclength + ds;
        Tangent next_tan = tangent_at(instance, weights, u, t, tan);
        branch.points.push_back(make_point(instance, t, std::move(u), s_new, options.compute_stability));
        tan = std::move(next_tan);

        if (iterations <= options.easy_iterations) {
            if (++streak >= options.easy_streak) {
                ds = std::min(2.0 * ds, options.ds_max);
                streak = 0;
            }
        } else {
            streak = 0;
        }
        if (t < options.t_min || t > options.t_max) {
            branch.stop = StopReason::window_exit;
            break;
        }
        if (t > prev_t) {
            rose = true;
            falling = 0;
        } else if (rose) {
            ++falling;
        }
        if (options.stop_after_fold > 0 && falling >= options.stop_after_fold) {
            branch.stop = StopReason::fold_passed;
            break;
        }
    }
    branch.final_ds = ds;
    return branch;
}

FoldResult detect_fold(const ProblemInstance& instance, const Branch& branch, const FoldOptions& options) {
    const auto& pts = branch.points;
    std::size_t k = 0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (pts[i].t > pts[k].t) k = i;
    }
    if (k == 0 || k + 1 >= pts.size()) {
        throw Error(ErrorKind::no_fold_in_branch, "t has no interior maximum along the branch");
    }

    // Local retraces around the turning point at finer spacing.
    std::vector<BranchPoint> local(pts.begin() + static_cast<std::ptrdiff_t>(k - 1),
                                   pts.begin() + static_cast<std::ptrdiff_t>(k + 2));
    std::size_t j = 1;
    for (int level = 0; level < options.refine_levels; ++level) {
        const double spacing = (local[j + 1].arclength - local[j - 1].arclength) / options.refine_factor;
        ContinuationOptions co;
        co.ds = spacing;
        co.ds_max = spacing;
        co.ds_min = spacing * 1e-4;
        co.tol = options.tol;
        co.compute_stability = false;
        co.stop_after_fold = 3;
        co.max_points = static_cast<std::size_t>(4.0 * options.refine_factor) + 10;
        // Start below the maximum on the rising side.
        const BranchPoint& start = local[j - 1];
        Branch fine = trace_branch(instance, start.t, start.u, co);
        std::size_t m = 0;
        for (std::size_t i = 1; i < fine.points.size(); ++i) {
            if (fine.points[i].t > fine.points[m].t) m = i;
        }
        if (m == 0 || m + 1 >= fine.points.size()) break;
        const double offset = start.arclength;
        local.assign(fine.points.begin() + static_cast<std::ptrdiff_t>(m - 1),
                     fine.points.begin() + static_cast<std::ptrdiff_t>(m + 2));
        for (auto& p : local) p.arclength += offset;
        j = 1;
    }

    // Vertex of the parabola through the three points around the maximum.
    const double s0 = local[0].arclength, s1 = local[1].arclength, s2 = local[2].arclength;
    const double t0 = local[0].t, t1 = local[1].t, t2 = local[2].t;
    const double d01 = (t1 - t0) / (s1 - s0);
    const double d12 = (t2 - t1) / (s2 - s1);
    const double a = (d12 - d01) / (s2 - s0);
    FoldResult out;
    out.method = FoldMethod::arclength;
    out.fold_index = k;
    if (a < 0.0) {
        const double s_star = 0.5 * (s0 + s1) - d01 / (2.0 * a);
        out.alpha = t1 + d01 * (s_star - s1) + a * (s_star - s0) * (s_star - s1);
    } else {
        out.alpha = t1;
    }
    out.alpha = std::max(out.alpha, t1);

    // Polish the near-fold solution just below alpha.
    for (double eps = 1e-8; eps <= 1e-3; eps *= 10.0) {
        const double tq = out.alpha - eps * (1.0 + std::abs(out.alpha));
        ++out.newton_attempts;
        const NonlinearSystem sys(instance, tq);
        const NewtonResult r = newton_solve(sys, local[1].u, polish_options(options.tol));
        if (r.converged) {
            out.polish_offset = eps * (1.0 + std::abs(out.alpha));
            out.u_fold = make_profile(instance, tq, r.u, r.iterations, true);
            out.u_fold.stability_mu = stability_mu(instance, out.u_fold.u);
            return out;
        }
    }
    throw Error(ErrorKind::no_convergence, "near-fold polish failed at every offset");
}

FoldResult bisect_alpha(const ProblemInstance& instance, double t_known, std::span<const double> u_known,
                        const BisectOptions& options) {
    FoldResult out;
    out.method = FoldMethod::bisection;
    double t = t_known;
    Vector u(u_known.begin(), u_known.end());
    double dt = options.dt_init;
    NewtonOptions no;
    no.tol = options.tol;
    no.maxit = options.newton_maxit;
    int iterations = 0;
    while (dt >= options.dt_min) {
        double t_try = t + dt;
        const bool capped = t_try >= options.t_cap;
        if (capped) t_try = options.t_cap;
        ++out.newton_attempts;
        const NewtonResult r = newton_solve(NonlinearSystem(instance, t_try), u, no);
        if (r.converged) {
            t = t_try;
            u = r.u;
            iterations = r.iterations;
            if (capped) {
                out.no_fold = true;
                break;
            }
        } else {
            dt *= 0.5;
        }
    }
    out.alpha = out.no_fold ? t : t + dt;
    out.u_fold = make_profile(instance, t, std::move(u), iterations, true);
    out.u_fold.stability_mu = stability_mu(instance, out.u_fold.u);
    return out;
}

TwoSolutions two_solutions(const ProblemInstance& instance, double t_query, const Branch& branch,
                           const FoldResult& fold) {
    if (!(t_query < fold.alpha)) {
        std::ostringstream msg;
        msg << "t_query = " << t_query << " is not below alpha = " << fold.alpha;
        throw Error(ErrorKind::query_past_fold, msg.str());
    }
    const auto& pts = branch.points;
    const std::size_t k = fold.fold_index;
    auto locate = [&](std::size_t from, std::size_t to, double tq) -> Vector {
        for (std::size_t i = from; i < to && i + 1 < pts.size(); ++i) {
            const double a = pts[i].t;
            const double b = pts[i + 1].t;
            if ((a - tq) * (b - tq) <= 0.0 && a != b) {
                const double w = (tq - a) / (b - a);
                Vector u(pts[i].u.size());
                for (std::size_t j = 0; j < u.size(); ++j) u[j] = (1.0 - w) * pts[i].u[j] + w * pts[i + 1].u[j];
                return u;
            }
        }
        throw Error(ErrorKind::no_convergence, "branch does not reach the query coefficient on both sides");
    };
    auto polish = [&](Vector guess, double tq) {
        const NewtonResult r = newton_solve(NonlinearSystem(instance, tq), guess, polish_options(1e-13));
        if (!r.converged) throw Error(ErrorKind::no_convergence, "Newton polish of a branch point failed");
        SolutionProfile p = make_profile(instance, tq, r.u, r.iterations, true);
        p.stability_mu = stability_mu(instance, p.u);
        return p;
    };

    TwoSolutions out;
    out.lower = polish(locate(0, k, t_query), t_query);
    out.upper = polish(locate(k, pts.size(), t_query), t_query);
    // The trace may have started on either side of the fold.
    const bool swapped = out.lower.u[0] > out.upper.u[0];
    if (swapped) std::swap(out.lower, out.upper);
    double sep = 0.0;
    for (std::size_t i = 0; i < out.lower.u.size(); ++i) sep = std::max(sep, std::abs(out.lower.u[i] - out.upper.u[i]));
    out.separation = sep;

    const double t1 = 0.5 * (t_query + fold.alpha);
    const SolutionProfile above = swapped ? polish(locate(k, pts.size(), t1), t1) : polish(locate(0, k, t1), t1);
    out.interval = OrderedInterval::make(build_subsolution(instance, t_query), above.u);
    const double R = instance.grid().radius();
    out.lower_membership = check_order_interval(instance.grid(), out.lower.u, out.interval, 0.5 * R, R);
    out.upper_membership = check_order_interval(instance.grid(), out.upper.u, out.interval, 0.5 * R, R);
    return out;
}

}  // namespace apfold
