#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "bfda/random_fields.hpp"
#include "bfda/snapshot.hpp"
#include "bfda/spectral.hpp"

using namespace bfda;

namespace {

constexpr double pi = std::numbers::pi;

double rel_diff(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

// Coefficient of the full (two-sided) spectrum, reconstructed from the half layout.
Complex full_coeff(const SpectralField& s, int c, int mx, int my, int mz) {
    const Grid& g = s.grid();
    const int n = g.n();
    auto idx = [n](int m) { return ((m % n) + n) % n; };
    if (mz >= 0) return s.at(c, g.spectral_index(idx(mx), idx(my), mz));
    return std::conj(s.at(c, g.spectral_index(idx(-mx), idx(-my), -mz)));
}

class SpectralTest : public ::testing::Test {
protected:
    Grid g16{2 * pi, 16};
    std::mt19937_64 rng = derived_rng(1234, 0);
};

} // namespace

TEST_F(SpectralTest, ConstantFieldIsPureDcMode) {
    PhysicalField p(g16);
    std::fill(p.component(0).begin(), p.component(0).end(), 1.0);
    auto s = forward_transform(p);
    EXPECT_NEAR(s.at(0, 0).real(), 1.0, 1e-15);
    s.at(0, 0) = 0.0;
    EXPECT_LT(s.max_abs(), 1e-15);
}

TEST_F(SpectralTest, SingleHarmonicGivesTwoConjugateModes) {
    const Grid g(3.0, 16);
    PhysicalField p(g);
    for (int i = 0; i < g.n(); ++i)
        for (int j = 0; j < g.n(); ++j)
            for (int k = 0; k < g.n(); ++k)
                p.component(0)[g.physical_index(i, j, k)] = std::sin(2 * pi * i * g.spacing() / g.length());
    auto s = forward_transform(p);
    const auto plus = s.at(0, g.spectral_index(1, 0, 0));
    const auto minus = s.at(0, g.spectral_index(g.n() - 1, 0, 0));
    EXPECT_NEAR(plus.imag(), -0.5, 1e-14);
    EXPECT_NEAR(minus.imag(), 0.5, 1e-14);
    s.at(0, g.spectral_index(1, 0, 0)) = 0.0;
    s.at(0, g.spectral_index(g.n() - 1, 0, 0)) = 0.0;
    EXPECT_LT(s.max_abs(), 1e-15);
}

TEST_F(SpectralTest, RoundTripIsExact) {
    PhysicalField p(g16);
    std::normal_distribution<double> N;
    for (auto& v : p.values()) v = N(rng);
    const auto q = backward_transform(forward_transform(p));
    double err = 0, ref = 0;
    for (std::size_t i = 0; i < p.values().size(); ++i) {
        err = std::max(err, std::abs(p.values()[i] - q.values()[i]));
        ref = std::max(ref, std::abs(p.values()[i]));
    }
    EXPECT_LT(err / ref, 1e-12);
}

TEST_F(SpectralTest, NonFiniteInputRejected) {
    PhysicalField p(g16);
    p.values()[7] = std::nan("");
    EXPECT_THROW(forward_transform(p), InvalidInput);
}

TEST_F(SpectralTest, ZeroCoefficientsGiveZeroField) {
    const auto p = backward_transform(SpectralField(g16));
    for (double v : p.values()) EXPECT_EQ(v, 0.0);
}

TEST_F(SpectralTest, SingleModeSamplesCosine) {
    SpectralField s(g16);
    // mz > 0 entries count twice, so 0.5 gives cos with unit amplitude.
    s.at(1, g16.spectral_index(2, 15, 3)) = 0.5;
    const auto p = backward_transform(s);
    double err = 0;
    const double h = g16.spacing(), k0 = g16.k0();
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j)
            for (int k = 0; k < 16; ++k) {
                const double expect = std::cos(k0 * (2 * i * h - 1 * j * h + 3 * k * h));
                err = std::max(err, std::abs(p.component(1)[g16.physical_index(i, j, k)] - expect));
            }
    EXPECT_LT(err, 1e-12);
}

TEST_F(SpectralTest, ParsevalMatchesQuadrature) {
    for (int trial = 0; trial < 5; ++trial) {
        const auto s = random_raw_field(g16, 8, rng);
        EXPECT_LT(rel_diff(l2_norm_sq(s), lp_integral(s, 2.0)), 1e-12);
    }
}

TEST_F(SpectralTest, LerayAnnihilatesGradient) {
    // grad phi for phi = cos(k.x): coefficient proportional to k.
    SpectralField s(g16);
    const auto idx = g16.spectral_index(1, 2, 3);
    s.at(0, idx) = Complex(0, 1.0);
    s.at(1, idx) = Complex(0, 2.0);
    s.at(2, idx) = Complex(0, 3.0);
    EXPECT_LT(leray_project(s).max_abs(), 1e-15);
}

TEST_F(SpectralTest, LerayKeepsSolenoidalMode) {
    SpectralField s(g16);
    const auto idx = g16.spectral_index(1, 2, 3);
    s.at(0, idx) = Complex(1.0, 0.5);
    s.at(1, idx) = Complex(1.0, -0.25);
    s.at(2, idx) = -(s.at(0, idx) + 2.0 * s.at(1, idx)) / 3.0;
    s.at(0, 0) = 4.0;  // mean passes through
    const auto p = leray_project(s);
    EXPECT_LT((p - s).max_abs(), 1e-15);
}

TEST_F(SpectralTest, LerayIdempotentSelfAdjointAndSolenoidal) {
    for (int trial = 0; trial < 10; ++trial) {
        const auto u = random_raw_field(g16, 8, rng);
        const auto v = random_raw_field(g16, 8, rng);
        const auto pu = leray_project(u);
        EXPECT_LT(max_divergence_ratio(pu), 1e-12);
        EXPECT_LT((leray_project(pu) - pu).max_abs() / pu.max_abs(), 1e-12);
        const double a = inner(pu, v), b = inner(u, leray_project(v));
        EXPECT_LT(std::abs(a - b) / std::sqrt(l2_norm_sq(u) * l2_norm_sq(v)), 1e-12);
    }
}

TEST_F(SpectralTest, ApplyAOnConstantAndEigenmode) {
    SpectralField s(g16);
    s.at(2, 0) = 3.0;
    EXPECT_EQ(apply_A(s).max_abs(), 0.0);
    const auto idx = g16.spectral_index(15, 2, 1);
    s.at(0, idx) = Complex(0.3, -0.1);
    const auto As = apply_A(s);
    const double kk = g16.k0() * g16.k0() * (1 + 4 + 1);
    EXPECT_NEAR(std::abs(As.at(0, idx) - kk * s.at(0, idx)), 0.0, 1e-14);
}

TEST_F(SpectralTest, AIsPositiveAndMatchesGradientNorm) {
    for (int trial = 0; trial < 10; ++trial) {
        const auto u = random_field(g16, {5, 1.0, 1.0}, rng);
        const double au = inner(apply_A(u), u);
        EXPECT_GE(au, 0.0);
        const auto grad = gradient(u);
        double gsum = 0;
        for (const auto& d : grad) gsum += l2_norm_sq(d);
        EXPECT_LT(rel_diff(au, gsum), 1e-12);
        EXPECT_LT(rel_diff(au, h1_seminorm_sq(u)), 1e-12);
    }
}

TEST_F(SpectralTest, GradientOfConstantVanishes) {
    SpectralField s(g16);
    s.at(0, 0) = 1.0;
    for (const auto& d : gradient(s)) EXPECT_EQ(d.max_abs(), 0.0);
}

TEST_F(SpectralTest, GradientMatchesCenteredDifferences) {
    const Grid g(2.5, 32);
    const auto u = random_field(g, {4, 2.0, 1.0}, rng);
    const auto grad = gradient(u);
    const double h = 1e-4;
    std::uniform_real_distribution<double> U(0.0, g.length());
    double worst = 0;
    for (int probe = 0; probe < 5; ++probe) {
        const double x[3] = {U(rng), U(rng), U(rng)};
        for (int j = 0; j < 3; ++j) {
            double xp[3] = {x[0], x[1], x[2]}, xm[3] = {x[0], x[1], x[2]};
            xp[j] += h;
            xm[j] -= h;
            const auto up = evaluate_at(u, xp[0], xp[1], xp[2]);
            const auto um = evaluate_at(u, xm[0], xm[1], xm[2]);
            const auto d = evaluate_at(grad[j], x[0], x[1], x[2]);
            for (int c = 0; c < 3; ++c) {
                const double fd = (up[c] - um[c]) / (2 * h);
                worst = std::max(worst, std::abs(fd - d[c]) / (1.0 + std::abs(d[c])));
            }
        }
    }
    EXPECT_LT(worst, 1e-6);
}

TEST_F(SpectralTest, DealiasKeepsLowModesAndZeroesHighOnes) {
    SpectralField s(g16);
    const auto low = g16.spectral_index(2, 14, 5);
    const auto high = g16.spectral_index(6, 0, 0);
    s.at(0, low) = 1.0;
    s.at(1, high) = 1.0;
    const auto d = dealias(s);
    EXPECT_EQ(d.at(0, low), Complex(1.0));
    EXPECT_EQ(d.at(1, high), Complex(0.0));
    EXPECT_EQ(d.at(2, g16.spectral_index(8, 8, 8)), Complex(0.0));
}

TEST_F(SpectralTest, DealiasIdempotent) {
    const auto u = random_raw_field(g16, 8, rng);
    const auto d = dealias(u);
    EXPECT_EQ((dealias(d) - d).max_abs(), 0.0);
    EXPECT_EQ(max_outside_dealias(d), 0.0);
}

TEST_F(SpectralTest, DealiasedProductMatchesDirectConvolution) {
    const Grid g(2 * pi, 8);
    const auto a = dealias(random_raw_field(g, 4, rng));
    const auto b = dealias(random_raw_field(g, 4, rng));
    const auto pa = backward_transform(a), pb = backward_transform(b);
    PhysicalField prod(g);
    for (std::size_t i = 0; i < g.points(); ++i) prod.component(0)[i] = pa.component(0)[i] * pb.component(1)[i];
    const auto ps = dealias(forward_transform(prod));

    const int K = g.dealias_cutoff();
    double worst = 0;
    for (int mx = -K; mx <= K; ++mx)
        for (int my = -K; my <= K; ++my)
            for (int mz = 0; mz <= K; ++mz) {
                Complex conv{};
                for (int px = -K; px <= K; ++px)
                    for (int py = -K; py <= K; ++py)
                        for (int pz = -K; pz <= K; ++pz) {
                            const int qx = mx - px, qy = my - py, qz = mz - pz;
                            if (std::abs(qx) > K || std::abs(qy) > K || std::abs(qz) > K) continue;
                            conv += full_coeff(a, 0, px, py, pz) * full_coeff(b, 1, qx, qy, qz);
                        }
                worst = std::max(worst, std::abs(conv - full_coeff(ps, 0, mx, my, mz)));
            }
    EXPECT_LT(worst, 1e-12);
}

TEST_F(SpectralTest, GridMismatchRejected) {
    SpectralField a(g16), b(Grid(2 * pi, 8));
    EXPECT_THROW(inner(a, b), GridMismatch);
    EXPECT_THROW(Grid(1.0, 7), InvalidInput);
    EXPECT_THROW(Grid(-1.0, 8), InvalidInput);
}

TEST_F(SpectralTest, SnapshotRoundTrip) {
    const auto u = random_field(g16, {4, 1.0, 2.0}, rng);
    const auto path = (std::filesystem::temp_directory_path() / "bfda_snapshot_test.bin").string();
    Snapshot::write(path, u, 3.25);
    const auto back = Snapshot::read(path);
    EXPECT_EQ(back.time, 3.25);
    EXPECT_TRUE(back.field.grid() == g16);
    EXPECT_EQ((back.field - u).max_abs(), 0.0);
    EXPECT_EQ(std::filesystem::file_size(path), 4 + 4 + 4 + 3 * 8 + 3 * g16.modes() * 16);
    std::filesystem::remove(path);
}
