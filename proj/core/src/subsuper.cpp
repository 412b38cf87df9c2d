#include "apfold/subsuper.hpp"

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

double smoothstep(double x) {
    x = std::clamp(x, 0.0, 1.0);
    return x * x * (3.0 - 2.0 * x);
}

}  // namespace

OrderedInterval OrderedInterval::make(Vector lower, Vector upper) {
    OrderedInterval out;
    out.ordering_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < lower.size(); ++i) out.ordering_margin = std::min(out.ordering_margin, upper[i] - lower[i]);
    out.lower = std::move(lower);
    out.upper = std::move(upper);
    return out;
}

SolutionProfile make_profile(const ProblemInstance& instance, double t, Vector u, int iterations, bool converged) {
    const NonlinearSystem sys(instance, t);
    SolutionProfile p;
    p.t = t;
    p.residual_inf = max_abs(sys.residual(u));
    p.scaled_residual = sys.scaled_residual(u);
    p.e0_norm = e0_norm(instance.grid(), u);
    p.decay_coeff = decay_coefficient(instance.grid(), u);
    p.iterations = iterations;
    p.converged = converged;
    p.u = std::move(u);
    return p;
}

Vector build_subsolution(const ProblemInstance& instance, double t) {
    const double mu = instance.nonlinearity().mu_lower;
    if (!(mu < instance.lambda1())) {
        std::ostringstream msg;
        msg << "mu_lower = " << mu << " is not below lambda1 = " << instance.lambda1();
        throw Error(ErrorKind::singular_operator, msg.str());
    }
    const auto m = instance.mass();
    const auto phi = instance.phi1();
    const auto f1 = instance.f1();
    const double theta = instance.theta();
    Vector rhs(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) rhs[i] = m[i] * (-theta + t * phi[i] + f1[i]);
    return solve_tridiagonal(instance.laplacian().shifted(-mu, m), rhs);
}

Supersolution build_supersolution(const ProblemInstance& instance, double L, double r1, double r2) {
    const RadialGrid& grid = instance.grid();
    const double R = grid.radius();
    if (!(0.0 < r1 && r1 < r2 && r2 <= R && L > 0.0)) {
        std::ostringstream msg;
        msg << "need 0 < R1 < R2 <= R and L > 0 (got R1=" << r1 << ", R2=" << r2 << ", L=" << L << ")";
        throw Error(ErrorKind::config_error, msg.str());
    }
    Supersolution out;
    constexpr int k_samples = 2001;
    double gmax = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < k_samples; ++k) gmax = std::max(gmax, instance.g(L * k / (k_samples - 1)));
    const auto f1 = instance.f1();
    out.m = gmax + *std::max_element(f1.begin(), f1.end());

    const std::size_t n = grid.size();
    const auto mass = instance.mass();
    const double width = r2 - r1;
    for (int attempt = 1;; ++attempt) {
        out.attempts = attempt;
        out.r1 = r1;
        out.r2 = std::min(r1 + width, R);
        out.ramp.assign(n, 0.0);
        Vector rhs(n);
        for (std::size_t i = 0; i < n; ++i) {
            out.ramp[i] = out.m * smoothstep((grid.r(i) - out.r1) / (out.r2 - out.r1));
            rhs[i] = mass[i] * out.ramp[i];
        }
        out.v = solve_tridiagonal(instance.laplacian(), rhs);
        if (max_abs(out.v) <= L) break;
        r1 *= 1.25;
        if (r1 > 0.5 * R) {
            std::ostringstream msg;
            msg << "no R1 <= R/2 gives ||v||_inf <= L = " << L << " (last ||v|| = " << max_abs(out.v) << ")";
            throw Error(ErrorKind::ramp_failed, msg.str());
        }
    }

    const double eps0 = 1e-6 * (1.0 + std::abs(out.m));
    const auto phi = instance.phi1();
    out.t_threshold = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        if (phi[i] > 0.0) out.t_threshold = std::min(out.t_threshold, (out.ramp[i] - out.m - eps0) / phi[i]);
    }
    return out;
}

SolutionProfile monotone_iterate(const ProblemInstance& instance, double t, const OrderedInterval& interval,
                                 const MonotoneOptions& options, MonotoneTrace* trace, bool from_upper) {
    const std::size_t n = interval.lower.size();
    double c = options.shift;
    if (std::isnan(c)) {
        const double lo = *std::min_element(interval.lower.begin(), interval.lower.end());
        const double hi = *std::max_element(interval.upper.begin(), interval.upper.end());
        double gp = 0.0;
        constexpr int k_samples = 2001;
        for (int k = 0; k < k_samples; ++k) gp = std::max(gp, instance.g_prime(lo + (hi - lo) * k / (k_samples - 1)));
        c = 1.05 * gp;
    }
    const auto mass = instance.mass();
    const auto phi = instance.phi1();
    const auto f1 = instance.f1();
    const TridiagonalOperator op = instance.laplacian().shifted(c, mass);
    const double direction = from_upper ? -1.0 : 1.0;
    const Vector& bound = from_upper ? interval.lower : interval.upper;

    MonotoneTrace local;
    local.shift = c;
    Vector u = from_upper ? interval.upper : interval.lower;
    Vector rhs(n);
    bool converged = false;
    int k = 0;
    while (k < options.maxit) {
        for (std::size_t i = 0; i < n; ++i) rhs[i] = mass[i] * (instance.g(u[i]) + c * u[i] + t * phi[i] + f1[i]);
        Vector next = solve_tridiagonal(op, rhs);
        ++k;
        const double slack = options.order_slack * (1.0 + max_abs(u));
        double change = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double inc = direction * (next[i] - u[i]);
            const double over = direction * (next[i] - bound[i]);
            local.min_increment = std::min(local.min_increment, inc);
            local.max_overshoot = std::max(local.max_overshoot, over);
            change = std::max(change, std::abs(next[i] - u[i]));
            if (inc < -slack || over > slack) {
                std::ostringstream msg;
                msg << "step " << k << " node " << i << ": increment " << inc << ", overshoot " << over
                    << " (shift c = " << c << ")";
                local.steps = k;
                if (trace) *trace = local;
                throw Error(ErrorKind::monotonicity_broken, msg.str());
            }
        }
        u = std::move(next);
        if (change <= options.tol) {
            converged = true;
            break;
        }
    }
    local.steps = k;
    if (trace) *trace = local;
    if (!converged) {
        std::ostringstream msg;
        msg << "monotone iteration did not settle in " << options.maxit << " steps";
        throw Error(ErrorKind::no_convergence, msg.str());
    }
    return make_profile(instance, t, std::move(u), k, true);
}

MembershipReport check_order_interval(const RadialGrid& grid, std::span<const double> u,
                                      const OrderedInterval& interval, double tail_lo, double tail_hi) {
    MembershipReport rep;
    rep.min_gap_lower = std::numeric_limits<double>::infinity();
    rep.min_gap_upper = std::numeric_limits<double>::infinity();
    rep.tail_gap_lower = std::numeric_limits<double>::infinity();
    rep.tail_gap_upper = std::numeric_limits<double>::infinity();
    const double p = static_cast<double>(grid.dim() - 2);
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double a = u[i] - interval.lower[i];
        const double b = interval.upper[i] - u[i];
        rep.min_gap_lower = std::min(rep.min_gap_lower, a);
        rep.min_gap_upper = std::min(rep.min_gap_upper, b);
        if (grid.r(i) >= tail_lo && grid.r(i) <= tail_hi) {
            const double w = std::pow(grid.r(i), p);
            rep.tail_gap_lower = std::min(rep.tail_gap_lower, w * a);
            rep.tail_gap_upper = std::min(rep.tail_gap_upper, w * b);
        }
    }
    rep.strictly_ordered = rep.min_gap_lower > 0.0 && rep.min_gap_upper > 0.0;
    rep.lower_tail_gap = rep.tail_gap_lower > 0.0;
    rep.upper_tail_gap = rep.tail_gap_upper > 0.0;
    rep.member = rep.strictly_ordered && rep.lower_tail_gap && rep.upper_tail_gap;
    return rep;
}

}  // namespace apfold
