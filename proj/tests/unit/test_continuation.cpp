#include "shared.hpp"

#include "apfold/continuation.hpp"
#include "apfold/error.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace {

using namespace apfold;

TEST(TraceBranch, RejectsAnInvalidStart) {
    const ProblemInstance& inst = test::canonical_small();
    try {
        trace_branch(inst, -5.0, Vector(inst.grid().size(), 0.0));
        FAIL() << "expected InitialPointInvalid";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::initial_point_invalid);
    }
}

TEST(TraceBranch, CanonicalBranchTurnsOnce) {
    const test::Pipeline& p = test::canonical_pipeline();
    const auto& pts = p.branch.points;
    ASSERT_GE(pts.size(), 5u);
    EXPECT_EQ(p.branch.stop, StopReason::window_exit);
    EXPECT_GT(p.start.stability_mu, 0.0);
    std::size_t top = 0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        if (pts[k].t > pts[top].t) top = k;
        EXPECT_LE(pts[k].scaled_residual, 1e-10);
        if (k) EXPECT_GT(pts[k].arclength, pts[k - 1].arclength);
    }
    ASSERT_GT(top, 0u);
    ASSERT_LT(top + 1, pts.size());
    for (std::size_t k = 1; k <= top; ++k) EXPECT_GT(pts[k].t, pts[k - 1].t);
    for (std::size_t k = top + 1; k < pts.size(); ++k) EXPECT_LT(pts[k].t, pts[k - 1].t);
    // u(0) increases monotonically along the branch.
    for (std::size_t k = 1; k < pts.size(); ++k) EXPECT_GT(pts[k].u_at_0, pts[k - 1].u_at_0);
}

TEST(TraceBranch, StabilityChangesSignAtTheFold) {
    const test::Pipeline& p = test::canonical_pipeline();
    const auto& pts = p.branch.points;
    std::size_t k = 1;
    while (k < pts.size() && pts[k].stability_mu > 0.0) ++k;
    ASSERT_LT(k, pts.size());
    for (std::size_t j = k; j < pts.size(); ++j) EXPECT_LT(pts[j].stability_mu, 0.0);
    // Zero of mu along arclength, then t at that arclength.
    const auto& a = pts[k - 1];
    const auto& b = pts[k];
    const double s = a.arclength + (b.arclength - a.arclength) * a.stability_mu / (a.stability_mu - b.stability_mu);
    const double t0 = a.t + (b.t - a.t) * (s - a.arclength) / (b.arclength - a.arclength);
    EXPECT_NEAR(t0, p.fold.alpha, 0.05 * (1.0 + std::abs(p.fold.alpha)));
}

TEST(DetectFold, AgreesWithBisection) {
    const test::Pipeline& p = test::canonical_pipeline();
    BisectOptions bo;
    bo.t_cap = p.tau + 1.0;
    const FoldResult b = bisect_alpha(test::canonical(), p.t0, p.start.u, bo);
    EXPECT_FALSE(b.no_fold);
    EXPECT_NEAR(p.fold.alpha, b.alpha, 1e-6 * (1.0 + std::abs(b.alpha)));
    EXPECT_LT(p.fold.alpha, p.tau);
    EXPECT_LT(std::abs(p.fold.u_fold.stability_mu), 1e-3 * test::canonical().lambda1());
}

TEST(DetectFold, NoTurningPoint) {
    const test::Pipeline& p = test::canonical_pipeline();
    Branch half;
    for (const auto& pt : p.branch.points) {
        if (pt.t > p.fold.alpha - 0.5) break;
        half.points.push_back(pt);
    }
    ASSERT_GE(half.points.size(), 3u);
    try {
        detect_fold(test::canonical(), half);
        FAIL() << "expected NoFoldInBranch";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::no_fold_in_branch);
    }
}

TEST(BisectAlpha, CapBelowTheFold) {
    const test::Pipeline& p = test::canonical_pipeline();
    BisectOptions bo;
    bo.t_cap = p.t0 + 2.0;
    const FoldResult b = bisect_alpha(test::canonical(), p.t0, p.start.u, bo);
    EXPECT_TRUE(b.no_fold);
    EXPECT_EQ(b.alpha, bo.t_cap);
}

TEST(TwoSolutions, BelowTheFold) {
    const test::Pipeline& p = test::canonical_pipeline();
    const double tq = p.fold.alpha - 0.5 * (1.0 + std::abs(p.fold.alpha));
    const TwoSolutions two = two_solutions(test::canonical(), tq, p.branch, p.fold);
    EXPECT_GT(two.separation, 1e-3 * (1.0 + test::max_abs(two.lower.u)));
    EXPECT_LT(two.lower.u[0], two.upper.u[0]);
    EXPECT_GT(two.lower.stability_mu, 0.0);
    EXPECT_LT(two.upper.stability_mu, 0.0);
    EXPECT_TRUE(two.lower_membership.member);
    EXPECT_FALSE(two.upper_membership.member);
}

TEST(TwoSolutions, QueryPastTheFold) {
    const test::Pipeline& p = test::canonical_pipeline();
    try {
        two_solutions(test::canonical(), p.fold.alpha + 0.1, p.branch, p.fold);
        FAIL() << "expected QueryPastFold";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::query_past_fold);
    }
}

TEST(StabilityMu, PositiveOnTheMinimalSolution) {
    const ProblemInstance& inst = test::canonical();
    const SolutionProfile s = solve_from_subsolution(inst, -12.0);
    ASSERT_TRUE(s.converged);
    EXPECT_GT(s.stability_mu, 0.0);
    EXPECT_NEAR(stability_mu(inst, s.u), s.stability_mu, 1e-9);
}

TEST(StopReasonNames, ToString) {
    EXPECT_EQ(to_string(StopReason::window_exit), "window_exit");
    EXPECT_EQ(to_string(StopReason::fold_passed), "fold_passed");
}

}  // namespace
