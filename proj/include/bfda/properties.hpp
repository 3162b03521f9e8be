#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "interpolants.hpp"
#include "timestepper.hpp"

namespace bfda {

/// Outcome of one named numerical property check.
struct PropertyResult {
    std::string name;
    bool passed = false;
    double measured = 0;   ///< worst observed value of the checked quantity
    double tolerance = 0;  ///< threshold it was compared with
    std::string detail;
};

namespace props {

inline RandomFieldSpec test_field_spec(const Grid& g) {
    return {std::max(1, int(g.dealias_cutoff())), 1.0, 1.0, 1};
}

/// Max relative |<B(u,v),w> + <B(u,w),v>| over random triples.
inline PropertyResult skew_symmetry(const Grid& g, int fields, std::uint64_t seed, double tol = 1e-10) {
    auto rng = derived_rng(seed, 0x51);
    PropertyResult r{"skew-symmetry", true, 0, tol};
    const auto spec = test_field_spec(g);
    for (int i = 0; i < fields; ++i) {
        const auto u = random_field(g, spec, rng), v = random_field(g, spec, rng), w = random_field(g, spec, rng);
        const auto buv = advection(u, v), buw = advection(u, w);
        const double a = inner(buv, w), b = inner(buw, v);
        const double scale = std::sqrt(l2_norm_sq(buv) * l2_norm_sq(w)) + std::sqrt(l2_norm_sq(buw) * l2_norm_sq(v));
        r.measured = std::max(r.measured, std::abs(a + b) / scale);
    }
    r.passed = r.measured <= tol;
    return r;
}

/// Max relative |<B(u,w),w>|.
inline PropertyResult energy_orthogonality(const Grid& g, int fields, std::uint64_t seed, double tol = 1e-10) {
    auto rng = derived_rng(seed, 0x52);
    PropertyResult r{"energy-orthogonality", true, 0, tol};
    const auto spec = test_field_spec(g);
    for (int i = 0; i < fields; ++i) {
        const auto u = random_field(g, spec, rng), w = random_field(g, spec, rng);
        const auto buw = advection(u, w);
        r.measured = std::max(r.measured, std::abs(inner(buw, w)) / std::sqrt(l2_norm_sq(buw) * l2_norm_sq(w)));
    }
    r.passed = r.measured <= tol;
    return r;
}

/// <B(u,u) - B(v,v), u - v> = -1/2 <B(u-v,u-v), u+v>, relative.
inline PropertyResult difference_identity(const Grid& g, int fields, std::uint64_t seed, double tol = 1e-10) {
    auto rng = derived_rng(seed, 0x53);
    PropertyResult r{"difference-identity", true, 0, tol};
    const auto spec = test_field_spec(g);
    for (int i = 0; i < fields; ++i) {
        const auto u = random_field(g, spec, rng), v = random_field(g, spec, rng);
        const auto d = u - v, s = u + v;
        const auto buu = advection(u, u), bvv = advection(v, v), bdd = advection(d, d);
        const double lhs = inner(buu - bvv, d), rhs = -0.5 * inner(bdd, s);
        const double scale = std::sqrt(l2_norm_sq(buu - bvv) * l2_norm_sq(d)) + std::sqrt(l2_norm_sq(bdd) * l2_norm_sq(s));
        r.measured = std::max(r.measured, std::abs(lhs - rhs) / scale);
    }
    r.passed = r.measured <= tol;
    return r;
}

/// Idempotence and divergence of the projection applied to raw fields.
inline std::vector<PropertyResult> leray(const Grid& g, int fields, std::uint64_t seed, double tol = 1e-12) {
    auto rng = derived_rng(seed, 0x54);
    PropertyResult idem{"leray-idempotence", true, 0, tol}, div{"leray-divergence", true, 0, tol};
    for (int i = 0; i < fields; ++i) {
        const auto x = random_raw_field(g, g.n() / 2, rng);
        const auto p1 = leray_project(x), p2 = leray_project(p1);
        idem.measured = std::max(idem.measured, std::sqrt(l2_norm_sq(p2 - p1) / l2_norm_sq(p1)));
        div.measured = std::max(div.measured, max_divergence_ratio(p1));
    }
    idem.passed = idem.measured <= tol;
    div.passed = div.measured <= tol;
    return {idem, div};
}

inline PropertyResult parseval(const Grid& g, int fields, std::uint64_t seed, double tol = 1e-12) {
    auto rng = derived_rng(seed, 0x55);
    PropertyResult r{"parseval", true, 0, tol};
    for (int i = 0; i < fields; ++i) {
        const auto u = random_field(g, test_field_spec(g), rng);
        const double quad = lp_integral(backward_transform(u), 2.0);
        const double coef = l2_norm_sq(u);
        r.measured = std::max(r.measured, std::abs(quad - coef) / coef);
    }
    r.passed = r.measured <= tol;
    return r;
}

/// <Au,u> = ||grad u||^2 >= 0.
inline PropertyResult stokes_identity(const Grid& g, int fields, std::uint64_t seed, double tol = 1e-12) {
    auto rng = derived_rng(seed, 0x56);
    PropertyResult r{"stokes-identity", true, 0, tol};
    for (int i = 0; i < fields; ++i) {
        const auto u = random_field(g, test_field_spec(g), rng);
        const double au = inner(apply_A(u), u), gg = h1_seminorm_sq(u);
        if (au < 0) r.detail = "negative <Au,u>";
        r.measured = std::max(r.measured, std::abs(au - gg) / gg);
    }
    r.passed = r.measured <= tol && r.detail.empty();
    return r;
}

inline PropertyResult dealias_idempotence(const Grid& g, int fields, std::uint64_t seed) {
    auto rng = derived_rng(seed, 0x57);
    PropertyResult r{"dealias-idempotence", true, 0, 0};
    for (int i = 0; i < fields; ++i) {
        const auto d1 = dealias(random_raw_field(g, g.n() / 2, rng));
        const auto d2 = dealias(d1);
        r.measured = std::max(r.measured, (d2 - d1).max_abs());
    }
    r.passed = r.measured == 0.0;
    return r;
}

/// <G(u) - G(v), u - v> >= 0 for random field pairs (quadrature slack).
inline PropertyResult damping_monotonicity(const Grid& g, int fields, std::uint64_t seed) {
    auto rng = derived_rng(seed, 0x58);
    PropertyResult r{"damping-monotonicity", true, 0, 1e-12};
    for (double gamma : {0.5, 1.0, 2.0}) {
        for (int i = 0; i < fields; ++i) {
            const auto u = random_field(g, test_field_spec(g), rng), v = random_field(g, test_field_spec(g), rng);
            const auto gu = damping(u, gamma, 1.0), gv = damping(v, gamma, 1.0);
            const double val = inner(gu - gv, u - v);
            const double scale = std::sqrt(l2_norm_sq(gu - gv) * l2_norm_sq(u - v));
            r.measured = std::max(r.measured, -val / scale);
        }
    }
    r.passed = r.measured <= r.tolerance;
    return r;
}

/// Monotone pointwise inequality over random pairs for several exponents,
/// and the Lipschitz-type inequality with the kappa fitted on an
/// independent sample.
inline std::vector<PropertyResult> damping_inequalities(long pairs, std::uint64_t seed,
                                                        const std::vector<double>& gammas = {0.5, 1.0, 2.0, 3.0}) {
    PropertyResult mono{"damping-monotone-pointwise", true, 0, 0}, lip{"damping-lipschitz-pointwise", true, 0, 0};
    for (double gamma : gammas) {
        const double kappa = estimate_kappa(gamma, std::max(1000L, pairs / 10), seed ^ 0x6b).kappa;
        auto rng = derived_rng(seed, 0x59 + static_cast<std::uint64_t>(gamma * 16));
        long bad_mono = 0, bad_lip = 0;
        for (long i = 0; i < pairs; ++i) {
            const auto [x, y] = random_vector_pair(rng);
            const auto res = pointwise_damping_inequalities(x, y, gamma, kappa);
            bad_mono += !res.monotone;
            bad_lip += !res.lipschitz;
        }
        mono.measured += double(bad_mono);
        lip.measured += double(bad_lip);
        lip.detail += (lip.detail.empty() ? "" : " ") + std::string("kappa(") + fmt17(gamma) + ")=" + fmt17(kappa);
    }
    mono.detail = std::to_string(static_cast<long>(mono.measured)) + " violations";
    mono.passed = mono.measured == 0;
    lip.passed = lip.measured == 0;
    return {mono, lip};
}

/// Approximation inequality with the declared constants for every kind at h.
inline std::vector<PropertyResult> interpolant_inequality(const Grid& g, double h, int trials, std::uint64_t seed) {
    std::vector<PropertyResult> out;
    for (auto kind : {InterpolantKind::FourierLowpass, InterpolantKind::VolumeAverage, InterpolantKind::TrilinearNodal}) {
        const auto spec = InterpolantSpec::declared(kind, h);
        const auto rep = verify_inequality(spec, g, trials, seed);
        PropertyResult r{"interpolant-" + to_string(kind), rep.declared_hold(), rep.max_violation, 1.0};
        r.detail = "c0_fit=" + fmt17(rep.c0_fit) + " c1_fit=" + fmt17(rep.c1_fit) + " max_ratio=" + fmt17(rep.max_ratio);
        out.push_back(r);
    }
    return out;
}

/// Observed order of a single forced, linearly growing mode against its closed form.
inline PropertyResult manufactured_order(const Grid& g) {
    const double nu = 0.2, lambda = 0.9, T = 2.0;
    const auto idx = g.spectral_index(1, 1, 0);
    const double mu = lambda - nu * 2 * g.k0() * g.k0();
    const double c = 1.0 + 1.0 / (1 + mu * mu);
    const double exact = c * std::exp(mu * T) - (mu * std::sin(T) + std::cos(T)) / (1 + mu * mu);
    double err[3];
    for (int r = 0; r < 3; ++r) {
        const int steps = 20 << r;
        const double dt = T / steps;
        FieldPack<1> s{SpectralField(g)};
        s[0].at(0, idx) = 1.0;
        double t = 0;
        StepperConfig cfg{dt};
        auto rhs = [&](const FieldPack<1>& x, double ts) {
            FieldPack<1> out{lambda * SpectralField(x[0])};
            out[0].at(0, idx) += std::sin(ts);
            return out;
        };
        for (int i = 0; i < steps; ++i) step(s, t, dt, nu, cfg, rhs, {"truth"});
        err[r] = std::abs(s[0].at(0, idx) - exact);
    }
    const double o = std::min(std::log2(err[0] / err[1]), std::log2(err[1] / err[2]));
    PropertyResult res{"manufactured-order", std::abs(std::log2(err[0] / err[1]) - 3) <= 0.2 &&
                                                 std::abs(std::log2(err[1] / err[2]) - 3) <= 0.2,
                       o, 0.2};
    res.detail = "orders " + fmt17(std::log2(err[0] / err[1])) + " " + fmt17(std::log2(err[1] / err[2]));
    return res;
}

/// Self-convergence of the full nonlinear forced system over dt, dt/2, dt/4.
inline PropertyResult self_convergence(const Grid& g, std::uint64_t seed, double min_order = 2.7) {
    constexpr double pi = std::numbers::pi;
    auto rng = derived_rng(seed, 0x5c);
    const PhysicalParams p{0.05, 2 * pi, 2.0, 3e-6};
    const Forcing f(g, {ForcingKind::RandomLowMode, 0.5, 1, 2, 9});
    const auto u0 = random_field(g, {4, 1.0, 4.0}, rng);
    const double T = 0.5;
    std::vector<SpectralField> out;
    for (int r = 0; r < 3; ++r) {
        const int steps = 10 << r;
        SpectralField u = u0;
        double t = 0;
        StepperConfig cfg{T / steps};
        for (int i = 0; i < steps; ++i) step_truth(u, t, cfg.dt, p, f, cfg);
        out.push_back(std::move(u));
    }
    const double order = std::log2(std::sqrt(l2_norm_sq(out[0] - out[1]) / l2_norm_sq(out[1] - out[2])));
    return {"self-convergence-order", order >= min_order, order, min_order};
}

/// Viscous decay of one mode with the nonlinear terms off, against exp(-nu |k|^2 T).
inline PropertyResult exact_viscous_decay(const Grid& g, double tol = 1e-12) {
    const double nu = 0.37;
    const auto idx = g.spectral_index(0, 2, 3);
    FieldPack<1> s{SpectralField(g)};
    s[0].at(0, idx) = Complex(0.8, -0.2);
    double t = 0;
    StepperConfig cfg{0.05};
    auto zero = [&](const FieldPack<1>& x, double) { return FieldPack<1>{SpectralField(x[0].grid())}; };
    for (int i = 0; i < 40; ++i) step(s, t, cfg.dt, nu, cfg, zero, {"truth"});
    const double kk = g.k0() * g.k0() * 13;
    const Complex expect = Complex(0.8, -0.2) * std::exp(-nu * kk * t);
    const double err = std::abs(s[0].at(0, idx) - expect) / std::abs(expect);
    return {"exact-viscous-decay", err <= tol, err, tol};
}

} // namespace props

/// The full property suite on an n = 16 grid.
inline std::vector<PropertyResult> run_property_suite(std::uint64_t seed = 12345, int fields = 20, long pairs = 100000) {
    constexpr double pi = std::numbers::pi;
    const Grid g(2 * pi, 16);
    std::vector<PropertyResult> out;
    out.push_back(props::skew_symmetry(g, fields, seed));
    out.push_back(props::energy_orthogonality(g, fields, seed));
    out.push_back(props::difference_identity(g, fields, seed));
    for (auto& r : props::leray(g, fields, seed)) out.push_back(r);
    out.push_back(props::parseval(g, fields, seed));
    out.push_back(props::stokes_identity(g, fields, seed));
    out.push_back(props::dealias_idempotence(g, fields, seed));
    out.push_back(props::damping_monotonicity(g, std::max(1, fields / 4), seed));
    for (auto& r : props::damping_inequalities(pairs, seed)) out.push_back(r);
    for (auto& r : props::interpolant_inequality(g, 2 * pi / 4, 30, seed)) out.push_back(r);
    out.push_back(props::manufactured_order(g));
    out.push_back(props::self_convergence(g, seed));
    out.push_back(props::exact_viscous_decay(g));
    return out;
}

} // namespace bfda
