#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "bfda/assimilation.hpp"

using namespace bfda;

namespace {

constexpr double pi = std::numbers::pi;

std::pair<std::vector<double>, std::vector<double>> series(double T, double dt, double (*y)(double)) {
    std::vector<double> t, v;
    for (int i = 0; i * dt <= T + 1e-12; ++i) {
        t.push_back(i * dt);
        v.push_back(y(i * dt));
    }
    return {t, v};
}

class CoupledRunTest : public ::testing::Test {
protected:
    Grid g{2 * pi, 16};
    PhysicalParams p;
    ForcingSpec fs{ForcingKind::RandomLowMode, 0.2};
    Forcing f{g, fs};
    AssimParams q{2.0, 0.1, 10.0, InterpolantSpec::declared(InterpolantKind::FourierLowpass, 2 * pi / 4)};
    SpectralField u0 = [this] {
        auto rng = derived_rng(5, 1);
        return random_field(g, RandomFieldSpec{4, 2.0, 0.3, 1}, rng);
    }();

    RunOptions opts(double T, int stride = 1) const {
        RunOptions o;
        o.T = T;
        o.sample_stride = stride;
        o.stepper = StepperConfig{0.05};
        return o;
    }
};

} // namespace

TEST(DecayFit, RecoversPureExponentialRate) {
    const auto [t, y] = series(10, 0.1, [](double s) { return std::exp(-2 * s); });
    const auto fit = fit_decay_and_plateau(t, y);
    EXPECT_TRUE(fit.decaying);
    EXPECT_NEAR(fit.lambda, 2.0, 0.02);
}

TEST(DecayFit, SeparatesRateFromPlateau) {
    const auto [t, y] = series(15, 0.1, [](double s) { return std::exp(-2 * s) + 1e-6; });
    const auto fit = fit_decay_and_plateau(t, y);
    EXPECT_TRUE(fit.decaying);
    EXPECT_NEAR(fit.lambda, 2.0, 0.1);
    EXPECT_NEAR(fit.plateau, 1e-6, 1e-7);
}

TEST(DecayFit, ConstantSeriesIsNotDecaying) {
    const auto [t, y] = series(10, 0.5, [](double) { return 0.3; });
    const auto fit = fit_decay_and_plateau(t, y);
    EXPECT_FALSE(fit.decaying);
    EXPECT_DOUBLE_EQ(fit.plateau, 0.3);
}

TEST(DecayFit, GrowingSeriesIsNotDecaying) {
    const auto [t, y] = series(10, 0.5, [](double s) { return std::exp(0.3 * s); });
    EXPECT_FALSE(fit_decay_and_plateau(t, y).decaying);
}

TEST(DecayFit, RejectsShortOrMismatchedSeries) {
    EXPECT_THROW(fit_decay_and_plateau(std::vector<double>(5, 0.0), std::vector<double>(5, 1.0)), InvalidInput);
    EXPECT_THROW(fit_decay_and_plateau(std::vector<double>(12, 0.0), std::vector<double>(11, 1.0)), InvalidInput);
}

TEST(MValue, CombinesGradientAndScaledEnergy) {
    const Grid g(3.0, 16);
    SpectralField s(g);
    s.at(1, g.spectral_index(2, 0, 1)) = Complex(0.25, 0.0);
    // The stored coefficient and its conjugate partner each carry l^3 |c|^2.
    const double l = g.length(), e = 2 * l * l * l * 0.0625, k2 = 5 * g.k0() * g.k0();
    EXPECT_NEAR(m_value(s), e * (k2 + 1 / (l * l)), 1e-12 * e * k2);
}

TEST_F(CoupledRunTest, ZeroHorizonGivesEmptyRecord) {
    const auto rec = run_coupled(p, q, f, u0, std::nullopt, opts(0.0));
    EXPECT_TRUE(rec.rows.empty());
    EXPECT_EQ(rec.steps, 0u);
    EXPECT_DOUBLE_EQ(rec.M, m_value(u0));
    EXPECT_EQ(rec.M_w0, 0.0);
}

TEST_F(CoupledRunTest, InvalidOptionsAreRejected) {
    EXPECT_THROW(run_coupled(p, q, f, u0, std::nullopt, opts(-1.0)), InvalidInput);
    EXPECT_THROW(run_coupled(p, q, f, u0, std::nullopt, opts(1.0, 0)), InvalidInput);
}

TEST_F(CoupledRunTest, MatchedStartStaysSynchronizedExactly) {
    const auto rec = run_coupled(p, q, f, u0, u0, opts(1.0));
    ASSERT_EQ(rec.rows.size(), 21u);
    for (const auto& r : rec.rows) EXPECT_EQ(r.g_l2, 0.0) << "t = " << r.t;
}

TEST_F(CoupledRunTest, TruthIsUnaffectedByAssimilation) {
    const auto coupled = run_coupled(p, q, f, u0, std::nullopt, opts(1.0, 4));
    const auto alone = run_coupled(p, std::nullopt, f, u0, std::nullopt, opts(1.0, 4));
    ASSERT_EQ(coupled.rows.size(), alone.rows.size());
    for (std::size_t i = 0; i < alone.rows.size(); ++i) {
        EXPECT_EQ(coupled.rows[i].u_l2, alone.rows[i].u_l2);
        EXPECT_EQ(coupled.rows[i].int_A_sq, alone.rows[i].int_A_sq);
    }
    EXPECT_EQ(alone.rows.back().g_l2, 0.0);  // no guess system
}

TEST_F(CoupledRunTest, NudgingShrinksErrorFromColdStart) {
    const auto rec = run_coupled(p, q, f, u0, std::nullopt, opts(2.0, 5));
    EXPECT_DOUBLE_EQ(rec.rows.front().g_l2, rec.rows.front().u_l2);
    EXPECT_LT(rec.rows.back().g_l2, 1e-2 * rec.rows.front().g_l2);
    EXPECT_TRUE(rec.w0_within_M);
}

TEST_F(CoupledRunTest, SamplingStrideAndFinalTime) {
    const auto rec = run_coupled(p, q, f, u0, std::nullopt, opts(1.03, 3));
    // dt is shrunk so the run ends exactly at T; the last step is always sampled.
    EXPECT_EQ(rec.steps, 21u);
    EXPECT_DOUBLE_EQ(rec.rows.back().t, 1.03);
    EXPECT_EQ(rec.rows.size(), 1u + 7u + 0u);
}

TEST_F(CoupledRunTest, AdaptiveRunEndsAtHorizon) {
    auto o = opts(0.7, 1000);
    o.stepper.adaptive = true;
    const auto rec = run_coupled(p, q, f, u0, std::nullopt, o);
    EXPECT_EQ(rec.rows.back().t, 0.7);
    EXPECT_EQ(rec.rows.size(), 2u);
}

TEST_F(CoupledRunTest, CumulativeIntegralsAreMonotone) {
    const auto rec = run_coupled(p, q, f, u0, std::nullopt, opts(1.0, 2));
    for (std::size_t i = 1; i < rec.rows.size(); ++i) {
        EXPECT_GE(rec.rows[i].int_grad_sq, rec.rows[i - 1].int_grad_sq);
        EXPECT_GE(rec.rows[i].int_lp, rec.rows[i - 1].int_lp);
        EXPECT_GE(rec.rows[i].int_A_sq, rec.rows[i - 1].int_A_sq);
        EXPECT_LE(rec.rows[i].corr43, rec.rows[i].int_A_sq);
    }
    EXPECT_DOUBLE_EQ(rec.weight_eta, q.eta);
}

TEST_F(CoupledRunTest, UnforcedSpinUpLosesEnergy) {
    Forcing none(g, ForcingSpec{ForcingKind::Zero, 0.0});
    const RandomFieldSpec ic{4, 2.0, 0.3, 1};
    const auto a = spin_up(g, p, none, 9, ic, 0.0, StepperConfig{0.05});
    const auto b = spin_up(g, p, none, 9, ic, 2.0, StepperConfig{0.05});
    EXPECT_NEAR(std::sqrt(l2_norm_sq(a.u)), 0.3, 1e-12);
    EXPECT_LT(l2_norm_sq(b.u), l2_norm_sq(a.u));
    EXPECT_DOUBLE_EQ(b.M, m_value(b.u));
}

TEST_F(CoupledRunTest, CsvHasPreambleHeaderAndRows) {
    auto rec = run_coupled(p, q, f, u0, std::nullopt, opts(0.5, 5));
    rec.add_meta("seed", "5");
    std::ostringstream os;
    write_record_csv(os, rec);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "# seed = 5");
    std::getline(is, line);
    EXPECT_EQ(line.rfind("t,u_l2,", 0), 0u);
    EXPECT_EQ(std::size_t(std::count(line.begin(), line.end(), ',')) + 1, record_columns().size());
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    EXPECT_EQ(rows, 3);
}
