#include "apfold/eigensolver.hpp"

#include "apfold/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace apfold {

namespace {

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

void normalize(const RadialGrid& grid, std::span<const double> mass, Vector& v) {
    const double nrm = std::sqrt(weighted_inner(grid, mass, v, v));
    for (double& x : v) x /= nrm;
}

}  // namespace

double weighted_inner(const RadialGrid& grid, std::span<const double> mass, std::span<const double> u,
                      std::span<const double> v) {
    const auto vol = grid.volumes();
    double s = 0.0;
    for (std::size_t i = 0; i < vol.size(); ++i) s += vol[i] * mass[i] * u[i] * v[i];
    return s;
}

double rayleigh_quotient(const RadialGrid& grid, FarField farfield, std::span<const double> mass,
                         std::span<const double> v) {
    const double den = weighted_inner(grid, mass, v, v);
    if (!(den > 0.0)) throw Error(ErrorKind::zero_denominator, "int P v^2 dx vanishes");
    double num = dirichlet_energy(grid, v);
    if (farfield == FarField::robin_decay) num += exterior_energy(grid, v.back());
    return num / den;
}

DecayConstants decay_constants(const RadialGrid& grid, std::span<const double> phi, double r_lo,
                               double r_hi) {
    const double p = static_cast<double>(grid.dim() - 2);
    DecayConstants out;
    out.C1 = std::numeric_limits<double>::infinity();
    out.C2 = -std::numeric_limits<double>::infinity();
    for (std::size_t i = grid.first_at_or_above(r_lo); i < grid.size() && grid.r(i) <= r_hi; ++i) {
        const double v = std::pow(grid.r(i), p) * phi[i];
        out.C1 = std::min(out.C1, v);
        out.C2 = std::max(out.C2, v);
    }
    out.ratio = out.C1 > 0.0 ? out.C2 / out.C1 : std::numeric_limits<double>::infinity();
    return out;
}

EigenPair first_eigenpair(const RadialGrid& grid, const TridiagonalOperator& A,
                          std::span<const double> mass, const EigenOptions& options) {
    const std::size_t n = grid.size();
    Vector phi(n, 1.0);
    if (A.farfield == FarField::dirichlet) phi[n - 1] = 0.0;
    normalize(grid, mass, phi);

    EigenPair out;
    double lambda = rayleigh_quotient(grid, A.farfield, mass, phi);
    double prev_change = std::numeric_limits<double>::infinity();
    int stalls = 0;
    bool done = false;
    int it = 0;
    Vector rhs(n);
    for (; it < options.maxit && !done; ++it) {
        for (std::size_t i = 0; i < n; ++i) rhs[i] = mass[i] * phi[i];
        Vector next = solve_tridiagonal(A, rhs);
        if (next[0] < 0.0) {
            for (double& x : next) x = -x;
        }
        normalize(grid, mass, next);
        const double lambda_next = rayleigh_quotient(grid, A.farfield, mass, next);

        double change = 0.0;
        for (std::size_t i = 0; i < n; ++i) change = std::max(change, std::abs(next[i] - phi[i]));
        change /= max_abs(next);
        const bool lambda_settled = std::abs(lambda_next - lambda) <= options.tol * std::abs(lambda_next);

        // Rounding floor: the iterate stops contracting once the change is
        // dominated by solve error.
        stalls = (change > 0.5 * prev_change) ? stalls + 1 : 0;
        done = lambda_settled && (change <= options.tol || (change <= 1e3 * options.tol && stalls >= 3));

        phi = std::move(next);
        lambda = lambda_next;
        prev_change = change;
    }
    if (!done) {
        std::ostringstream msg;
        msg << "inverse iteration did not settle in " << options.maxit << " sweeps";
        throw Error(ErrorKind::no_convergence, msg.str());
    }

    out.lambda1 = lambda;
    out.iterations = it;
    out.normalization_residual = std::abs(weighted_inner(grid, mass, phi, phi) - 1.0);

    const Vector Aphi = A.apply(phi);
    double res = 0.0;
    double mphi = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        res = std::max(res, std::abs(Aphi[i] - lambda * mass[i] * phi[i]));
        mphi = std::max(mphi, std::abs(mass[i] * phi[i]));
    }
    out.residual = res / (A.norm_inf() * max_abs(phi) + lambda * mphi);
    out.residual_weighted = res / (lambda * mphi);

    const DecayConstants dc =
        decay_constants(grid, phi, options.window_lo * grid.radius(), options.window_hi * grid.radius());
    out.decay_C1 = dc.C1;
    out.decay_C2 = dc.C2;
    out.plateau_ratio = dc.ratio;

    out.lambda2 = std::numeric_limits<double>::quiet_NaN();
    if (options.compute_gap) {
        out.lambda2 = second_eigenvalue(grid, A, mass, phi);
        out.simple = (out.lambda2 - lambda) >= 1e-8 * lambda;
    }
    out.phi1 = std::move(phi);
    return out;
}

double second_eigenvalue(const RadialGrid& grid, const TridiagonalOperator& A, std::span<const double> mass,
                         std::span<const double> phi1, double tol, int maxit) {
    const std::size_t n = grid.size();
    const double R = grid.radius();
    Vector v(n);
    // Start with one sign change so the phi1 component is not dominant.
    for (std::size_t i = 0; i < n; ++i) v[i] = std::cos(3.0 * grid.r(i) / R) * phi1[i] + 0.1 * phi1[0];
    auto deflate = [&](Vector& x) {
        const double c = weighted_inner(grid, mass, x, phi1);
        for (std::size_t i = 0; i < n; ++i) x[i] -= c * phi1[i];
        normalize(grid, mass, x);
    };
    deflate(v);
    double lambda = rayleigh_quotient(grid, A.farfield, mass, v);
    Vector rhs(n);
    for (int it = 0; it < maxit; ++it) {
        for (std::size_t i = 0; i < n; ++i) rhs[i] = mass[i] * v[i];
        v = solve_tridiagonal(A, rhs);
        deflate(v);
        const double next = rayleigh_quotient(grid, A.farfield, mass, v);
        if (std::abs(next - lambda) <= tol * std::abs(next)) return next;
        lambda = next;
    }
    throw Error(ErrorKind::no_convergence, "deflated inverse iteration for the second eigenvalue");
}

ExtrapolatedEigenvalue extrapolate_lambda1(int dim, double radius, std::size_t nodes,
                                           const std::function<double(double)>& weight, FarField farfield,
                                           const EigenOptions& options) {
    if (nodes < 7) throw Error(ErrorKind::bad_grid_config, "extrapolation needs at least 7 nodes");
    EigenOptions opts = options;
    opts.compute_gap = false;
    auto solve = [&](std::size_t n) {
        const RadialGrid grid = build_grid(dim, radius, n);
        const TridiagonalOperator A = assemble_laplacian(grid, farfield);
        return first_eigenpair(grid, A, assemble_weight_mass(grid, weight, farfield), opts).lambda1;
    };
    ExtrapolatedEigenvalue e;
    e.coarse_nodes = (nodes + 1) / 2;
    e.fine = solve(nodes);
    e.coarse = solve(e.coarse_nodes);
    const double hf = radius / static_cast<double>(nodes - 1);
    const double hc = radius / static_cast<double>(e.coarse_nodes - 1);
    e.extrapolated = (hc * hc * e.fine - hf * hf * e.coarse) / (hc * hc - hf * hf);
    return e;
}

}  // namespace apfold
