#include "apfold/error.hpp"
#include "apfold/tridiagonal.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

namespace {

using namespace apfold;

TEST(Laplacian, QuadraticIsExactAwayFromTheBoundary) {
    // -Delta r^2 = -2N, and the conservative scheme reproduces it exactly.
    for (int dim : {3, 4, 6}) {
        for (double stretch : {1.0, 1.01}) {
            const RadialGrid g = build_grid(dim, 3.0, 200, stretch);
            const TridiagonalOperator A = assemble_laplacian(g, FarField::robin_decay);
            Vector u(g.size());
            for (std::size_t i = 0; i < g.size(); ++i) u[i] = g.r(i) * g.r(i);
            const Vector Au = A.apply(u);
            for (std::size_t i = 0; i + 1 < g.size(); ++i) EXPECT_NEAR(Au[i], -2.0 * dim, 1e-8) << "row " << i;
        }
    }
}

TEST(Laplacian, OriginRowIsTheGhostNodeForm) {
    const RadialGrid g = build_grid(3, 1.0, 11);
    const TridiagonalOperator A = assemble_laplacian(g, FarField::robin_decay);
    const double h = 0.1;
    EXPECT_NEAR(A.diag[0], 2.0 * 3 / (h * h), 1e-9);
    EXPECT_NEAR(A.super[0], -2.0 * 3 / (h * h), 1e-9);
    EXPECT_EQ(A.sub[0], 0.0);
}

TEST(Laplacian, ConstantsAnnihilatedExceptRobinRow) {
    const RadialGrid g = build_grid(3, 10.0, 300);
    const TridiagonalOperator A = assemble_laplacian(g, FarField::robin_decay);
    const Vector Au = A.apply(Vector(g.size(), 1.0));
    for (std::size_t i = 0; i + 1 < g.size(); ++i) EXPECT_NEAR(Au[i], 0.0, 1e-9);
    // Robin row: sigma (N-2) R^{N-2} / V_{n-1}.
    EXPECT_NEAR(Au.back(), unit_sphere_area(3) * 10.0 / g.volumes().back(), 1e-9);
}

TEST(Laplacian, SymmetricInTheVolumeInnerProduct) {
    const RadialGrid g = build_grid(5, 7.0, 150, 1.02);
    const TridiagonalOperator A = assemble_laplacian(g, FarField::robin_decay);
    const auto V = g.volumes();
    for (std::size_t i = 0; i + 1 < g.size(); ++i) {
        EXPECT_NEAR(V[i] * A.super[i], V[i + 1] * A.sub[i + 1], 1e-12 * std::abs(V[i] * A.super[i]));
        EXPECT_LT(A.super[i], 0.0);
        EXPECT_GT(A.diag[i], 0.0);
    }
}

TEST(Laplacian, DirichletLastRowIsIdentity) {
    const RadialGrid g = build_grid(3, 2.0, 20);
    const TridiagonalOperator A = assemble_laplacian(g, FarField::dirichlet);
    EXPECT_EQ(A.diag.back(), 1.0);
    EXPECT_EQ(A.sub.back(), 0.0);
    const Vector m = assemble_weight_mass(g, [](double) { return 1.0; }, FarField::dirichlet);
    EXPECT_EQ(m.back(), 0.0);
    EXPECT_EQ(m.front(), 1.0);
}

TEST(WeightMass, RejectsNonPositiveWeight) {
    const RadialGrid g = build_grid(3, 2.0, 20);
    try {
        assemble_weight_mass(g, [](double r) { return 1.0 - r; }, FarField::robin_decay);
        FAIL() << "expected NonPositiveWeight";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::non_positive_weight);
    }
    EXPECT_THROW(assemble_weight_mass(g, [](double) { return std::nan(""); }, FarField::robin_decay), Error);
}

TEST(Thomas, MatchesDenseSolve) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const std::size_t n = 60;
    TridiagonalOperator op{Vector(n), Vector(n), Vector(n)};
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd b(n);
    Vector rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
        op.sub[i] = i ? u(rng) : 0.0;
        op.super[i] = i + 1 < n ? u(rng) : 0.0;
        op.diag[i] = 3.0 + u(rng);
        D(i, i) = op.diag[i];
        if (i) D(i, i - 1) = op.sub[i];
        if (i + 1 < n) D(i, i + 1) = op.super[i];
        rhs[i] = b[i] = u(rng);
    }
    const Vector x = solve_tridiagonal(op, rhs);
    const Eigen::VectorXd y = D.partialPivLu().solve(b);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(x[i], y[i], 1e-13);
}

TEST(Thomas, SingularRaises) {
    TridiagonalOperator op{{0.0, 1.0}, {1.0, 1.0}, {1.0, 0.0}};
    try {
        solve_tridiagonal(op, Vector{1.0, 2.0});
        FAIL() << "expected SingularOperator";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::singular_operator);
    }
}

TEST(Operator, ShiftAndNorm) {
    TridiagonalOperator op{{0.0, -1.0, -1.0}, {2.0, 2.0, 2.0}, {-1.0, -1.0, 0.0}};
    EXPECT_EQ(op.norm_inf(), 4.0);
    EXPECT_EQ(op.row_magnitude(0), 3.0);
    const Vector m{1.0, 2.0, 3.0};
    const TridiagonalOperator s = op.shifted(0.5, m);
    EXPECT_EQ(s.diag[2], 3.5);
    EXPECT_EQ(op.shifted(Vector{1.0, 0.0, 0.0}).diag[0], 3.0);
}

TEST(Operator, CsvDump) {
    const RadialGrid g = build_grid(3, 1.0, 4);
    std::ostringstream out;
    write_operator_csv(out, g, assemble_laplacian(g, FarField::robin_decay));
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "index,r,sub,diag,super");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 4);
}

TEST(FarFieldNames, ToString) {
    EXPECT_EQ(to_string(FarField::robin_decay), "robin_decay");
    EXPECT_EQ(to_string(FarField::dirichlet), "dirichlet");
}

}  // namespace
