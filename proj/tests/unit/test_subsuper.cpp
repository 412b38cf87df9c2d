#include "shared.hpp"

#include "apfold/error.hpp"
#include "apfold/nonlinear.hpp"
#include "apfold/subsuper.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace {

using namespace apfold;

/// max_i F_i(u) / row scale, the signed defect.
double max_defect(const ProblemInstance& inst, double t, std::span<const double> u) {
    const NonlinearSystem sys(inst, t);
    const Vector F = sys.residual(u);
    double m = -std::numeric_limits<double>::infinity();
    for (double f : F) m = std::max(m, f);
    return m / sys.row_scale(u);
}

double min_defect(const ProblemInstance& inst, double t, std::span<const double> u) {
    const NonlinearSystem sys(inst, t);
    const Vector F = sys.residual(u);
    double m = std::numeric_limits<double>::infinity();
    for (double f : F) m = std::min(m, f);
    return m / sys.row_scale(u);
}

TEST(Subsolution, DefectIsNonPositive) {
    const ProblemInstance& inst = test::canonical();
    for (double t : {-20.0, -7.5, 0.0}) {
        const Vector w = build_subsolution(inst, t);
        EXPECT_LE(max_defect(inst, t, w), 1e-12) << "t = " << t;
    }
}

TEST(Subsolution, RequiresLowerSlopeBelowLambda1) {
    ProblemConfig c = canonical_config(400, 20.0);
    c.nonlinearity.mu_lower = {1.1, true};
    c.nonlinearity.mu_upper = {2.0, true};
    const ProblemInstance inst = ProblemInstance::create(c);
    try {
        build_subsolution(inst, -1.0);
        FAIL() << "expected SingularOperator";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::singular_operator);
    }
}

TEST(Supersolution, PlateauConstruction) {
    const ProblemInstance& inst = test::canonical();
    const double L = 2.2;
    const Supersolution s = build_supersolution(inst, L, 5.0, 10.0);
    EXPECT_LE(test::max_abs(s.v), L);
    for (double v : s.v) EXPECT_GE(v, 0.0);
    EXPECT_EQ(s.ramp.front(), 0.0);
    EXPECT_NEAR(s.ramp.back(), s.m, 1e-12);
    EXPECT_LT(s.t_threshold, 0.0);
    EXPECT_GE(min_defect(inst, s.t_threshold, s.v), -1e-12);
    EXPECT_GE(min_defect(inst, s.t_threshold - 10.0, s.v), -1e-12);
}

TEST(Supersolution, BadArguments) {
    const ProblemInstance& inst = test::canonical_small();
    auto kind = [&](double L, double r1, double r2) {
        try {
            build_supersolution(inst, L, r1, r2);
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::io_error;
    };
    EXPECT_EQ(kind(2.0, 5.0, 4.0), ErrorKind::config_error);
    EXPECT_EQ(kind(-1.0, 1.0, 2.0), ErrorKind::config_error);
    EXPECT_EQ(kind(1e-9, 1.0, 2.0), ErrorKind::ramp_failed);
}

TEST(Monotone, IncreasesToTheMinimalSolution) {
    const ProblemInstance& inst = test::canonical();
    const double t = -8.0;
    const Vector w = build_subsolution(inst, t);
    const SolutionProfile above = solve_from_subsolution(inst, t + 0.5);
    ASSERT_TRUE(above.converged);
    const OrderedInterval iv = OrderedInterval::make(w, above.u);
    EXPECT_GT(iv.ordering_margin, 0.0);
    MonotoneTrace trace;
    const SolutionProfile p = monotone_iterate(inst, t, iv, {}, &trace);
    EXPECT_TRUE(p.converged);
    EXPECT_GE(trace.min_increment, 0.0);
    EXPECT_LE(trace.max_overshoot, 0.0);
    EXPECT_LE(p.scaled_residual, 1e-8);
    const SolutionProfile n = solve_from_subsolution(inst, t);
    EXPECT_LT(test::max_abs_diff(p.u, n.u), 1e-8);
}

TEST(Monotone, DecreasingFromTheUpperEnd) {
    const ProblemInstance& inst = test::canonical();
    const double t = -8.0;
    const OrderedInterval iv = OrderedInterval::make(build_subsolution(inst, t), solve_from_subsolution(inst, t + 0.5).u);
    MonotoneTrace trace;
    const SolutionProfile p = monotone_iterate(inst, t, iv, {}, &trace, true);
    EXPECT_TRUE(p.converged);
    EXPECT_LE(p.scaled_residual, 1e-8);
}

TEST(Monotone, PlateauSupersolutionAtItsThreshold) {
    const ProblemInstance& inst = test::canonical();
    const Supersolution s = build_supersolution(inst, 2.2, 5.0, 10.0);
    const double t = s.t_threshold;
    const OrderedInterval iv = OrderedInterval::make(build_subsolution(inst, t), s.v);
    ASSERT_GE(iv.ordering_margin, 0.0);
    MonotoneTrace trace;
    const SolutionProfile p = monotone_iterate(inst, t, iv, {}, &trace);
    EXPECT_TRUE(p.converged);
    EXPECT_GE(trace.min_increment, 0.0);
}

TEST(Monotone, BrokenWhenTheLowerEndIsNotASubsolution) {
    const ProblemInstance& inst = test::canonical();
    const double t = -8.0;
    // The solution at a larger t lies above the minimal solution at t, so
    // iterating from it moves down.
    const Vector high = solve_from_subsolution(inst, t + 0.5).u;
    Vector top = high;
    for (double& v : top) v += 1.0;
    try {
        monotone_iterate(inst, t, OrderedInterval::make(high, top));
        FAIL() << "expected MonotonicityBroken";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::monotonicity_broken);
    }
}

TEST(OrderInterval, Membership) {
    const RadialGrid g = build_grid(3, 10.0, 101);
    Vector lo(g.size());
    Vector hi(g.size());
    Vector mid(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        lo[i] = -2.0 / (1.0 + g.r(i));
        hi[i] = 2.0 / (1.0 + g.r(i));
        mid[i] = 0.0;
    }
    const OrderedInterval iv = OrderedInterval::make(lo, hi);
    const MembershipReport in = check_order_interval(g, mid, iv, 5.0, 10.0);
    EXPECT_TRUE(in.member);
    EXPECT_TRUE(in.strictly_ordered);
    EXPECT_NEAR(in.tail_gap_lower, 2.0 * 5.0 / 6.0, 0.05);
    const MembershipReport out = check_order_interval(g, hi, iv, 5.0, 10.0);
    EXPECT_FALSE(out.member);
}

}  // namespace
