#include "apfold/verify.hpp"

#include "apfold/error.hpp"
#include "apfold/nonlinear.hpp"
#include "apfold/subsuper.hpp"

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

}  // namespace

TauStar tau_star(const ProblemInstance& instance) {
    const auto& grid = instance.grid();
    const auto vol = grid.volumes();
    const auto p = instance.weight_values();
    const auto phi = instance.phi1();
    TauStar out;
    for (std::size_t i = 0; i < vol.size(); ++i) {
        out.weighted += vol[i] * p[i] * phi[i];
        out.unweighted += vol[i] * phi[i];
    }
    out.weighted *= instance.theta();
    out.unweighted *= instance.theta();
    return out;
}

NegativePartCheck check_negative_part(std::span<const double> u, std::span<const double> w) {
    NegativePartCheck out;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (u[i] < 0.0) out.max_violation = std::max(out.max_violation, -u[i] - std::abs(w[i]));
    }
    out.pass = out.max_violation <= 1e-8 * (1.0 + max_abs(w));
    return out;
}

double weighted_source_functional(const ProblemInstance& instance, std::span<const double> u) {
    const auto vol = instance.grid().volumes();
    const auto p = instance.weight_values();
    const auto phi = instance.phi1();
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += vol[i] * p[i] * instance.g(std::max(u[i], 0.0)) * phi[i];
    return s;
}

GradientBound gradient_bound(const RadialGrid& grid, FarField farfield, std::span<const double> u) {
    Vector plus(u.size());
    std::transform(u.begin(), u.end(), plus.begin(), [](double x) { return std::max(x, 0.0); });
    GradientBound out;
    out.value = dirichlet_energy(grid, plus);
    if (farfield == FarField::robin_decay) out.value += exterior_energy(grid, plus.back());
    const auto N = static_cast<double>(grid.dim());
    out.sigma = N / (N - 2.0);
    out.beta = (out.sigma - 1.0) / out.sigma;
    out.gamma = out.beta / (1.0 - out.beta);
    return out;
}

double e0_norm(const RadialGrid& grid, std::span<const double> u) {
    const double p = static_cast<double>(grid.dim() - 2);
    double a = 0.0;
    double b = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        a = std::max(a, std::abs(u[i]));
        b = std::max(b, std::pow(grid.r(i), p) * std::abs(u[i]));
    }
    return a + b;
}

double decay_coefficient(const RadialGrid& grid, std::span<const double> u) {
    const double p = static_cast<double>(grid.dim() - 2);
    double s = 0.0;
    std::size_t count = 0;
    for (std::size_t i = grid.first_at_or_above(0.75 * grid.radius()); i < grid.size(); ++i, ++count) {
        s += std::pow(grid.r(i), p) * u[i];
    }
    return count ? s / static_cast<double>(count) : 0.0;
}

Vector riesz_potential(const RadialGrid& grid, std::span<const double> rho) {
    const std::size_t n = grid.size();
    const auto N = static_cast<double>(grid.dim());
    Vector inner(n, 0.0);
    Vector outer(n, 0.0);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double h = grid.spacing(k);
        const double a = std::pow(grid.r(k), N - 1.0) * rho[k];
        const double b = std::pow(grid.r(k + 1), N - 1.0) * rho[k + 1];
        inner[k + 1] = inner[k] + 0.5 * h * (a + b);
    }
    for (std::size_t k = n - 1; k-- > 0;) {
        const double h = grid.spacing(k);
        outer[k] = outer[k + 1] + 0.5 * h * (grid.r(k) * rho[k] + grid.r(k + 1) * rho[k + 1]);
    }
    Vector u(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double near = i == 0 ? 0.0 : inner[i] / std::pow(grid.r(i), N - 2.0);
        u[i] = (near + outer[i]) / (N - 2.0);
    }
    return u;
}

double representation_residual(const ProblemInstance& instance, double t, std::span<const double> u) {
    const auto p = instance.weight_values();
    const auto phi = instance.phi1();
    const auto f1 = instance.f1();
    Vector rho(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) rho[i] = p[i] * (instance.g(u[i]) + t * phi[i] + f1[i]);
    Vector diff = riesz_potential(instance.grid(), rho);
    for (std::size_t i = 0; i < u.size(); ++i) diff[i] -= u[i];
    const double den = e0_norm(instance.grid(), u);
    const double num = e0_norm(instance.grid(), diff);
    return den > 0.0 ? num / den : num;
}

ComparisonCheck check_comparison(const TridiagonalOperator& A, std::span<const double> mass, double mu,
                                 double lambda1, std::span<const double> rhs) {
    if (!(mu < lambda1)) {
        std::ostringstream msg;
        msg << "mu = " << mu << " is not below lambda1 = " << lambda1;
        throw Error(ErrorKind::singular_operator, msg.str());
    }
    const Vector u = solve_tridiagonal(A.shifted(-mu, mass), rhs);
    ComparisonCheck out;
    out.min_u = *std::min_element(u.begin(), u.end());
    out.max_abs_u = max_abs(u);
    out.pass = out.min_u >= -1e-12 * out.max_abs_u;
    return out;
}

bool VerificationReport::pass() const {
    return std::all_of(entries.begin(), entries.end(), [](const CheckEntry& e) { return e.pass; });
}

const CheckEntry* VerificationReport::find(const std::string& name) const {
    for (const auto& e : entries) {
        if (e.name == name) return &e;
    }
    return nullptr;
}

VerificationReport verify_solution(const ProblemInstance& instance, double t, std::span<const double> u,
                                   const std::string& instance_id, const std::string& solution_id) {
    VerificationReport rep;
    rep.instance_id = instance_id;
    rep.solution_id = solution_id;
    rep.t = t;
    auto add = [&](std::string name, double value, double bound, double tol, CheckKind kind) {
        CheckEntry e{std::move(name), value, bound, tol, kind, true};
        if (kind == CheckKind::upper_bound) e.pass = value <= bound + tol;
        if (kind == CheckKind::lower_bound) e.pass = value >= bound - tol;
        rep.entries.push_back(std::move(e));
    };

    const RadialGrid& grid = instance.grid();
    const NonlinearSystem sys(instance, t);
    add("scaled_residual", sys.scaled_residual(u), 0.0, 1e-8, CheckKind::upper_bound);

    const TauStar tau = tau_star(instance);
    add("t_below_tau_star", t, tau.weighted, 1e-6 * (1.0 + std::abs(tau.weighted)), CheckKind::upper_bound);
    add("tau_star_unweighted", tau.unweighted, 0.0, 0.0, CheckKind::info);

    if (instance.nonlinearity().mu_lower < instance.lambda1()) {
        const Vector w = build_subsolution(instance, t);
        const NegativePartCheck neg = check_negative_part(u, w);
        add("negative_part", neg.max_violation, 0.0, 1e-8 * (1.0 + max_abs(w)), CheckKind::upper_bound);
        double gap = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < u.size(); ++i) gap = std::min(gap, u[i] - w[i]);
        add("above_subsolution", gap, 0.0, 1e-8, CheckKind::lower_bound);
    }

    add("weighted_source", weighted_source_functional(instance, u), 0.0, 0.0, CheckKind::info);
    add("gradient_positive_part", gradient_bound(grid, instance.farfield(), u).value, 0.0, 0.0, CheckKind::info);
    add("e0_norm", e0_norm(grid, u), 0.0, 0.0, CheckKind::info);
    add("decay_coeff", decay_coefficient(grid, u), 0.0, 0.0, CheckKind::info);

    const double rep_res = representation_residual(instance, t, u);
    add("representation_residual", rep_res, 1e-3, 0.0,
        instance.farfield() == FarField::robin_decay ? CheckKind::upper_bound : CheckKind::info);
    return rep;
}

}  // namespace apfold
