#include "shared.hpp"

#include "apfold/app/config.hpp"
#include "apfold/nonlinear.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace {

using namespace apfold;

constexpr int kTrials = 40;

struct Gen {
    std::mt19937_64 rng;
    explicit Gen(std::uint64_t seed) : rng(seed) {}
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
    std::size_t index(std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); }
    Vector vector(std::size_t n, double lo, double hi) {
        Vector v(n);
        for (double& x : v) x = uniform(lo, hi);
        return v;
    }
    RadialGrid grid() {
        return build_grid(static_cast<int>(index(3, 6)), uniform(1.0, 50.0), index(5, 300), uniform(1.0, 1.02));
    }
};

TEST(Property, ThomasMatchesDenseSolve) {
    Gen gen(101);
    for (int trial = 0; trial < kTrials; ++trial) {
        const std::size_t n = gen.index(3, 60);
        TridiagonalOperator op;
        op.sub = gen.vector(n, -1.0, 0.0);
        op.super = gen.vector(n, -1.0, 0.0);
        op.sub[0] = 0.0;
        op.super[n - 1] = 0.0;
        op.diag = gen.vector(n, 2.1, 4.0);
        const Vector b = gen.vector(n, -1.0, 1.0);
        const Vector x = solve_tridiagonal(op, b);
        Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
        Eigen::VectorXd eb(n);
        for (std::size_t i = 0; i < n; ++i) {
            D(i, i) = op.diag[i];
            if (i) D(i, i - 1) = op.sub[i];
            if (i + 1 < n) D(i, i + 1) = op.super[i];
            eb[i] = b[i];
        }
        const Eigen::VectorXd ex = D.partialPivLu().solve(eb);
        for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(x[i], ex[i], 1e-12) << "trial " << trial;
    }
}

TEST(Property, StiffnessIsSymmetricOnStretchedGrids) {
    Gen gen(202);
    for (int trial = 0; trial < kTrials; ++trial) {
        const RadialGrid g = gen.grid();
        const TridiagonalOperator A = assemble_laplacian(g, FarField::robin_decay);
        const auto V = g.volumes();
        for (std::size_t i = 0; i + 1 < g.size(); ++i) {
            const double kij = V[i] * A.super[i];
            const double kji = V[i + 1] * A.sub[i + 1];
            EXPECT_NEAR(kij, kji, 1e-12 * std::abs(kij)) << "trial " << trial << " row " << i;
            EXPECT_LT(A.super[i], 0.0);
        }
        // Constants lie in the kernel of every interior flux balance.
        const Vector Au = A.apply(Vector(g.size(), 1.0));
        for (std::size_t i = 0; i + 1 < g.size(); ++i) EXPECT_NEAR(Au[i], 0.0, 1e-10 * A.row_magnitude(i));
    }
}

TEST(Property, ComparisonPrincipleForNonNegativeSources) {
    Gen gen(303);
    for (int trial = 0; trial < kTrials; ++trial) {
        const RadialGrid g = gen.grid();
        const TridiagonalOperator A = assemble_laplacian(g, FarField::robin_decay);
        const double p = gen.uniform(2.0, 4.0);
        const Vector mass = assemble_weight_mass(g, [p](double r) { return std::pow(1.0 + r * r, -p); },
                                                 FarField::robin_decay);
        const EigenPair e = first_eigenpair(g, A, mass);
        Vector rhs = gen.vector(g.size(), 0.0, 1.0);
        for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] *= mass[i];
        const ComparisonCheck c = check_comparison(A, mass, gen.uniform(-1.0, 0.95) * e.lambda1, e.lambda1, rhs);
        EXPECT_TRUE(c.pass) << "trial " << trial << " min " << c.min_u;
    }
}

TEST(Property, RayleighQuotientBoundedByLambda1) {
    const ProblemInstance& inst = test::canonical_small();
    const RadialGrid& g = inst.grid();
    Gen gen(404);
    for (int trial = 0; trial < kTrials; ++trial) {
        Vector v(g.size());
        const double a = gen.uniform(0.1, 3.0);
        const double b = gen.uniform(-1.0, 1.0);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = inst.phi1()[i] + b * std::exp(-a * g.r(i)) + gen.uniform(-0.01, 0.01);
        const double q = rayleigh_quotient(g, FarField::robin_decay, inst.mass(), v);
        EXPECT_GE(q, inst.lambda1() * (1.0 - 1e-10)) << "trial " << trial;
    }
    EXPECT_NEAR(rayleigh_quotient(g, FarField::robin_decay, inst.mass(), inst.phi1()), inst.lambda1(),
                1e-9 * inst.lambda1());
}

TEST(Property, DeflationFactorExceedsOne) {
    const ProblemInstance& inst = test::canonical_small();
    const std::size_t n = inst.grid().size();
    Gen gen(505);
    for (int trial = 0; trial < kTrials; ++trial) {
        std::vector<Vector> known;
        const std::size_t k = gen.index(1, 3);
        for (std::size_t j = 0; j < k; ++j) known.push_back(gen.vector(n, -2.0, 2.0));
        const Vector u = gen.vector(n, -2.0, 2.0);
        EXPECT_GT(deflation_factor(inst, known, u), 1.0);
    }
}

TEST(Property, SoftplusSlopesStayInTheBracket) {
    Gen gen(606);
    for (int trial = 0; trial < kTrials; ++trial) {
        const double lo = gen.uniform(0.1, 5.0);
        const double hi = lo + gen.uniform(0.1, 10.0);
        const NonlinearitySpec g = NonlinearitySpec::softplus(lo, hi, gen.uniform(-2.0, 2.0));
        for (int k = 0; k < 50; ++k) {
            const double s = gen.uniform(-60.0, 60.0);
            EXPECT_GE(g.g_prime(s), lo);
            EXPECT_LE(g.g_prime(s), hi);
            const double h = 1e-5;
            EXPECT_NEAR((g.g(s + h) - g.g(s - h)) / (2.0 * h), g.g_prime(s), 1e-6 * (1.0 + hi));
        }
        EXPECT_TRUE(g.monotone());
    }
}

TEST(Property, NegativePartCheckMatchesPointwiseDefinition) {
    Gen gen(707);
    for (int trial = 0; trial < kTrials; ++trial) {
        const std::size_t n = gen.index(1, 50);
        const Vector w = gen.vector(n, -3.0, 0.0);
        const Vector u = gen.vector(n, -4.0, 2.0);
        double worst = -1e300;
        double w_inf = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            w_inf = std::max(w_inf, std::abs(w[i]));
            if (u[i] < 0.0) worst = std::max(worst, -u[i] - std::abs(w[i]));
        }
        const NegativePartCheck c = check_negative_part(u, w);
        EXPECT_EQ(c.pass, worst <= 1e-8 * (1.0 + w_inf)) << "trial " << trial;
        if (!c.pass) EXPECT_NEAR(c.max_violation, worst, 1e-15);
    }
}

TEST(Property, ConfigRoundTripOnRandomScenarios) {
    Gen gen(808);
    for (int trial = 0; trial < kTrials; ++trial) {
        app::ScenarioConfig c = app::canonical_scenario();
        c.problem.weight = WeightSpec::rational_decay(gen.uniform(1.6, 5.0));
        c.problem.nonlinearity.mu_lower = {gen.uniform(0.1, 0.9), true};
        c.problem.nonlinearity.mu_upper = {gen.uniform(1.1, 4.0), true};
        c.problem.nonlinearity.offset = gen.uniform(-3.0, 3.0);
        c.problem.forcing.t = gen.uniform(-20.0, 5.0);
        c.problem.forcing.profile = ForcingProfile::gaussian;
        c.problem.forcing.amplitude = gen.uniform(-1.0, 1.0);
        c.problem.forcing.width = gen.uniform(0.5, 5.0);
        c.problem.grid.radius = gen.uniform(10.0, 80.0);
        c.problem.grid.nodes = gen.index(100, 9000);
        c.problem.grid.stretch = gen.uniform(1.0, 1.001);
        c.run.seed = gen.index(0, 1u << 30);
        c.run.t = gen.uniform(-20.0, 1.0);
        c.run.ds = gen.uniform(0.01, 1.0);
        const std::string text = app::serialize_config(c);
        const app::ScenarioConfig back = app::parse_config(text);
        EXPECT_EQ(app::serialize_config(back), text) << "trial " << trial;
        EXPECT_EQ(back.problem.forcing.t, c.problem.forcing.t);
        EXPECT_EQ(back.problem.grid.stretch, c.problem.grid.stretch);
    }
}

}  // namespace
