#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "bfda/bounds.hpp"
#include "bounds_points.hpp"

using namespace bfda;
using bounds_points::log_mismatch;
using bounds_points::random_inputs;
using bounds_points::to_point;

namespace {

BoundsInputs unit_inputs(double alpha = 2.0, double beta = 2.0) {
    BoundsInputs in;
    in.p = PhysicalParams{1.0, 1.0, alpha, 1.0};
    in.q = AssimParams{beta, 1.0, 10.0, InterpolantSpec::declared(InterpolantKind::FourierLowpass, 0.25)};
    in.cfg.kappa = 1.0;
    in.cfg.f_norm = 1.0;
    in.cfg.ft_norm = 0.0;
    in.M = 1.0;
    return in;
}

} // namespace

TEST(Bounds, KAtUnitInputs) {
    // l = nu = a~ = ||f|| = 1, alpha = 2: a = 1 and K = 1 + 4.
    EXPECT_NEAR(eval_K(unit_inputs().p, 1.0).value(), 5.0, 1e-14);
}

TEST(Bounds, LadderGrowsWithMAndForcing) {
    auto in = unit_inputs();
    const auto m0 = eval_M_ladder(in);
    in.M = 2.0;
    const auto m1 = eval_M_ladder(in);
    EXPECT_GT(m1.M1, m0.M1);
    EXPECT_GT(m1.M2, m0.M2);
    in = unit_inputs();
    in.cfg.f_norm = 3.0;
    const auto m2 = eval_M_ladder(in);
    EXPECT_GT(m2.K, m0.K);
    EXPECT_GT(m2.M3, m0.M3);
    EXPECT_GT(m2.M4, m0.M4);
}

TEST(Bounds, LateTimeBoundsNeedSubcriticalAlpha) {
    EXPECT_FALSE(eval_M_ladder(unit_inputs(2.0)).late_time_bounds);
    EXPECT_TRUE(eval_M_ladder(unit_inputs(1.5, 1.5)).late_time_bounds);
}

TEST(Bounds, BranchFollowsExponents) {
    auto lo = unit_inputs(1.5, 1.5), hi = unit_inputs(1.5, 2.5);
    EXPECT_TRUE(eval_thm31_constants(lo, eval_M_ladder(lo)).low_branch);
    EXPECT_FALSE(eval_thm31_constants(hi, eval_M_ladder(hi)).low_branch);
    auto bad = unit_inputs(3.0, 2.0);
    EXPECT_THROW(eval_thm31_constants(bad, eval_M_ladder(bad)), InvalidInput);
}

TEST(Bounds, L2CoefficientsShrinkWithEta) {
    auto in = unit_inputs(1.5, 1.5);
    const auto a = eval_thm31_constants(in, eval_M_ladder(in));
    in.q.eta *= 4;
    const auto b = eval_thm31_constants(in, eval_M_ladder(in));
    EXPECT_LT(b.coef_alpha, a.coef_alpha);
    EXPECT_LT(b.coef_a, a.coef_a);
    EXPECT_NEAR(b.bound(0.0, 2.0).value(), 2.0, 1e-12);  // matched parameters leave only the decaying term
}

TEST(Bounds, VanishingKappaMakesBOne) {
    auto in = unit_inputs(1.5, 1.5);
    in.cfg.kappa = 1e-200;
    const auto c = eval_thm32_33_constants(in, eval_M_ladder(in));
    EXPECT_NEAR(c.B.value(), 1.0, 1e-12);
}

TEST(Bounds, TildeConstantsOverBHalveWhenEtaDoubles) {
    auto in = unit_inputs(1.5, 1.5);
    const auto a = eval_thm32_33_constants(in, eval_M_ladder(in));
    in.q.eta *= 2;
    const auto b = eval_thm32_33_constants(in, eval_M_ladder(in));
    // Logs of these constants are large, so the difference carries |ln| * eps of rounding.
    const double tol = 1e-14 * std::max({1.0, std::abs(a.Ctilde.ln()), std::abs(a.B.ln())});
    EXPECT_NEAR((b.Ctilde / b.B).ln() - (a.Ctilde / a.B).ln(), std::log(0.5), tol);
    EXPECT_NEAR((b.Dtilde / b.B).ln() - (a.Dtilde / a.B).ln(), std::log(0.5), tol);
}

TEST(Bounds, H1ConstantsNeedSubcriticalExponents) {
    auto in = unit_inputs(2.0, 1.5);
    EXPECT_THROW(eval_thm32_33_constants(in, eval_M_ladder(in)), InvalidInput);
    const auto rep = evaluate_bounds(in);
    EXPECT_FALSE(rep.have_h1_constants);
    EXPECT_FALSE(rep.hypotheses.h1_theorem);
}

TEST(Bounds, HypothesesReactToEtaAndResolution) {
    auto in = unit_inputs(1.5, 1.5);
    in.q.eta = 1e-6;  // below the damping floor
    EXPECT_FALSE(evaluate_bounds(in).hypotheses.l2_theorem);
    in.q.eta = 10;
    in.q.interpolant.h = 1.0;  // nu > 4 eta c0 h^2 fails
    EXPECT_FALSE(evaluate_bounds(in).hypotheses.l2_theorem);
    in.q.interpolant.h = 0.01;
    EXPECT_TRUE(evaluate_bounds(in).hypotheses.l2_theorem);
}

TEST(Bounds, ReportSerializes) {
    const auto rep = evaluate_bounds(unit_inputs(1.5, 1.5));
    std::ostringstream kv, csv;
    write_bounds_kv(kv, rep);
    write_bounds_csv(csv, rep);
    EXPECT_NE(kv.str().find("M2 = "), std::string::npos);
    EXPECT_NE(kv.str().find("hyp.l2_theorem = "), std::string::npos);
    EXPECT_EQ(csv.str().rfind("name,value,log10,available\n", 0), 0u);
}

TEST(Bounds, MatchesIndependentTranscription) {
    std::mt19937_64 rng(20240611);
    int compared = 0;
    for (int i = 0; i < 20; ++i) {
        const auto in = random_inputs(rng, i % 2 == 0);
        const auto rep = evaluate_bounds(in);
        const auto ref = oracle::evaluate(to_point(in));
        for (const auto& [name, value, available] : rep.entries()) {
            if (!available) continue;
            const auto it = ref.find(name);
            ASSERT_NE(it, ref.end()) << "oracle lacks " << name;
            EXPECT_LE(log_mismatch(value, it->second), 1e-12)
                << name << " at point " << i << ": " << value.str() << " vs ln " << double(it->second.ln);
            ++compared;
        }
    }
    EXPECT_GT(compared, 300);
}
