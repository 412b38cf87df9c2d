#include "shared.hpp"

#include "apfold/nonlinear.hpp"
#include "apfold/subsuper.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace {

using namespace apfold;

TEST(NonlinearSystem, JacobianMatchesFiniteDifferences) {
    const ProblemInstance& inst = test::canonical_small();
    const NonlinearSystem sys(inst, -5.0);
    const RadialGrid& g = inst.grid();
    Vector u(g.size());
    Vector d(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        u[i] = -2.0 / (1.0 + g.r(i));
        d[i] = std::cos(g.r(i)) / (1.0 + g.r(i) * g.r(i));
    }
    const Vector Jd = sys.jacobian(u).apply(d);
    const double eps = 1e-6;
    Vector up = u;
    Vector um = u;
    for (std::size_t i = 0; i < u.size(); ++i) {
        up[i] += eps * d[i];
        um[i] -= eps * d[i];
    }
    const Vector Fp = sys.residual(up);
    const Vector Fm = sys.residual(um);
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double fd = (Fp[i] - Fm[i]) / (2.0 * eps);
        EXPECT_NEAR(Jd[i], fd, 1e-6 * (1.0 + std::abs(fd)));
    }
}

TEST(NonlinearSystem, TDerivative) {
    const ProblemInstance& inst = test::canonical_small();
    const NonlinearSystem a(inst, -1.0);
    const NonlinearSystem b(inst, 2.0);
    const Vector u(inst.grid().size(), 0.3);
    const Vector Fa = a.residual(u);
    const Vector Fb = b.residual(u);
    const Vector dt = a.t_derivative();
    for (std::size_t i = 0; i < u.size(); ++i) {
        EXPECT_NEAR((Fb[i] - Fa[i]) / 3.0, dt[i], 1e-9 * (1.0 + std::abs(dt[i])));
        EXPECT_NEAR(dt[i], -inst.mass()[i] * inst.phi1()[i], 1e-15);
    }
}

TEST(Newton, LinearProblemInOneStep) {
    ProblemConfig c = canonical_config(600, 20.0);
    c.nonlinearity.preset = NonlinearityPreset::linear;
    c.nonlinearity.mu_lower = {0.9, true};
    c.nonlinearity.offset = 1.0;
    const ProblemInstance inst = ProblemInstance::create(c);
    const NonlinearSystem sys(inst, -2.0);
    const NewtonResult r = newton_solve(sys, Vector(inst.grid().size(), 0.0));
    ASSERT_TRUE(r.converged);
    EXPECT_LE(r.iterations, 2);
    // Direct solve of (A - 0.9 lambda1 M) u = M (1 + t phi1).
    Vector rhs(inst.grid().size());
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = inst.mass()[i] * (1.0 - 2.0 * inst.phi1()[i]);
    const Vector u = solve_tridiagonal(inst.laplacian().shifted(-0.9 * inst.lambda1(), inst.mass()), rhs);
    EXPECT_LT(test::max_abs_diff(r.u, u), 1e-10 * (1.0 + test::max_abs(u)));
}

TEST(Newton, ConvergesBelowTheFold) {
    const ProblemInstance& inst = test::canonical();
    const NonlinearSystem sys(inst, -8.0);
    const NewtonResult r = newton_solve(sys, build_subsolution(inst, -8.0));
    ASSERT_TRUE(r.converged);
    EXPECT_LE(r.scaled_residual, 1e-13);
    EXPECT_LT(r.iterations, 15);
}

TEST(Newton, FailsAboveTauStar) {
    const ProblemInstance& inst = test::canonical();
    const double t = tau_star(inst).weighted + 1.0;
    const NewtonResult r = newton_solve(NonlinearSystem(inst, t), build_subsolution(inst, t));
    EXPECT_FALSE(r.converged);
}

TEST(Picard, ReachesTheNewtonSolution) {
    const ProblemInstance& inst = test::canonical();
    const NonlinearSystem sys(inst, -8.0);
    const Vector w = build_subsolution(inst, -8.0);
    const NewtonResult n = newton_solve(sys, w);
    const NewtonResult p = picard_iterate(sys, w);
    ASSERT_TRUE(p.converged);
    EXPECT_LT(test::max_abs_diff(p.u, n.u), 1e-8);
    // The solution is a fixed point of the solution operator.
    EXPECT_LT(test::max_abs_diff(apply_solution_operator(sys, n.u), n.u), 1e-10);
}

TEST(Deflation, FactorIsLargeAtKnownRoots) {
    const ProblemInstance& inst = test::canonical_small();
    const std::size_t n = inst.grid().size();
    const std::vector<Vector> known{Vector(n, 1.0)};
    EXPECT_EQ(deflation_factor(inst, known, known[0]), 1e300);
    const double far = deflation_factor(inst, known, Vector(n, 1e4));
    EXPECT_GT(far, 1.0);
    EXPECT_LT(far, 1.0 + 1e-6);
}

TEST(Deflation, FindsTheSecondSolution) {
    const ProblemInstance& inst = test::canonical();
    const double t = -10.0;
    const NonlinearSystem sys(inst, t);
    const NewtonResult lower = newton_solve(sys, build_subsolution(inst, t));
    ASSERT_TRUE(lower.converged);
    Vector start = lower.u;
    for (std::size_t i = 0; i < start.size(); ++i) start[i] += 2.0 * inst.phi1()[i];
    const std::vector<Vector> known{lower.u};
    const NewtonResult other = deflated_solve(sys, known, start);
    ASSERT_TRUE(other.converged);
    EXPECT_GT(test::max_abs_diff(other.u, lower.u), 1e-3 * (1.0 + test::max_abs(lower.u)));
    EXPECT_LT(sys.scaled_residual(other.u), 1e-12);
    EXPECT_GT(other.u[0], lower.u[0]);
}

}  // namespace
