#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <utility>

#include "forcing.hpp"
#include "interpolants.hpp"
#include "params.hpp"
#include "spectral.hpp"

namespace bfda {

namespace detail {

/// Physical-space nonlinear term  u.grad(v) + coeff |u|^{2 gamma} u  for the
/// staged fields, transformed, projected and dealiased. coeff = 0 skips damping.
inline SpectralField nonlinear_physical(const PhysicalField& up, const SpectralField& v, double gamma, double coeff) {
    const Grid& g = up.grid();
    const auto grad = gradient(v);
    std::array<PhysicalField, 3> dv{backward_transform(grad[0]), backward_transform(grad[1]), backward_transform(grad[2])};
    PhysicalField out(g);
    const std::size_t P = g.points();
    const auto ux = up.component(0), uy = up.component(1), uz = up.component(2);
    for (int c = 0; c < 3; ++c) {
        auto o = out.component(c);
        const auto d0 = dv[0].component(c), d1 = dv[1].component(c), d2 = dv[2].component(c);
        for (std::size_t i = 0; i < P; ++i) o[i] = ux[i] * d0[i] + uy[i] * d1[i] + uz[i] * d2[i];
    }
    if (coeff != 0.0) {
        for (std::size_t i = 0; i < P; ++i) {
            const double m2 = ux[i] * ux[i] + uy[i] * uy[i] + uz[i] * uz[i];
            // |u|^{2 gamma}; at u = 0 the product with u vanishes for every gamma >= 0.
            const double f = coeff * (gamma == 0.0 ? 1.0 : (gamma == 1.0 ? m2 : std::pow(m2, gamma)));
            out.component(0)[i] += f * ux[i];
            out.component(1)[i] += f * uy[i];
            out.component(2)[i] += f * uz[i];
        }
    }
    return dealias(leray_project(forward_transform(out)));
}

} // namespace detail

/// B(u, v) = P(u . grad v), pseudo-spectral with 2/3-rule dealiasing.
inline SpectralField advection(const SpectralField& u, const SpectralField& v) {
    require_same_grid(u.grid(), v.grid(), "advection");
    return detail::nonlinear_physical(backward_transform(u), v, 0.0, 0.0);
}

/// coeff * P(|u|^{2 gamma} u), evaluated pointwise and dealiased once.
inline SpectralField damping(const SpectralField& u, double gamma, double coeff) {
    if (!(coeff >= 0)) throw InvalidInput("damping: coefficient must be nonnegative");
    if (!(gamma >= 0)) throw InvalidInput("damping: exponent must be nonnegative");
    const Grid& g = u.grid();
    PhysicalField p = backward_transform(u);
    const std::size_t P = g.points();
    auto x = p.component(0), y = p.component(1), z = p.component(2);
    for (std::size_t i = 0; i < P; ++i) {
        const double m2 = x[i] * x[i] + y[i] * y[i] + z[i] * z[i];
        const double f = coeff * (gamma == 0.0 ? 1.0 : std::pow(m2, gamma));
        x[i] *= f;
        y[i] *= f;
        z[i] *= f;
    }
    return dealias(leray_project(forward_transform(p)));
}

/// Explicit part of the truth right-hand side: P f(t) - B(u,u) - a G_alpha(u).
inline SpectralField nonlinear_truth(const SpectralField& u, double t, const PhysicalParams& p, const Forcing& f) {
    SpectralField r = detail::nonlinear_physical(backward_transform(u), u, p.alpha, p.a());
    r *= -1.0;
    if (f.spec().kind != ForcingKind::Zero) r.axpy(f.modulation(t), f.pattern());
    return r;
}

/// P f - nu A u - B(u,u) - a G_alpha(u)
inline SpectralField rhs_truth(const SpectralField& u, double t, const PhysicalParams& p, const Forcing& f) {
    SpectralField r = nonlinear_truth(u, t, p, f);
    r.axpy(-p.nu, apply_A(u));
    return r;
}

/// eta P(I_h(u_obs) - I_h(w)), dealiased.
inline SpectralField nudging_term(const SpectralField& w, const SpectralField& u_obs, const AssimParams& q) {
    require_same_grid(w.grid(), u_obs.grid(), "nudging");
    if (q.eta == 0.0) return SpectralField(w.grid());
    // I_h is linear, so one application to the difference suffices.
    SpectralField d = apply_interpolant(q.interpolant, u_obs - w);
    d = dealias(leray_project(std::move(d)));
    d *= q.eta;
    return d;
}

/// Explicit part of the nudged right-hand side (everything except -nu A w).
inline SpectralField nonlinear_nudged(const SpectralField& w, const SpectralField& u_obs, double t,
                                      const PhysicalParams& p, const AssimParams& q, const Forcing& f) {
    SpectralField r = detail::nonlinear_physical(backward_transform(w), w, q.beta, q.b(p));
    r *= -1.0;
    if (f.spec().kind != ForcingKind::Zero) r.axpy(f.modulation(t), f.pattern());
    r += nudging_term(w, u_obs, q);
    return r;
}

/// P f - nu A w - B(w,w) - b G_beta(w) + eta P(I_h(u_obs) - I_h(w))
inline SpectralField rhs_nudged(const SpectralField& w, const SpectralField& u_obs, double t, const PhysicalParams& p,
                                const AssimParams& q, const Forcing& f) {
    SpectralField r = nonlinear_nudged(w, u_obs, t, p, q, f);
    r.axpy(-p.nu, apply_A(w));
    return r;
}

using Vec3 = std::array<double, 3>;

struct DampingInequalityResult {
    bool monotone = false;    ///< (|x|^g x - |y|^g y).(x-y) >= 1/2 |x-y|^2 (|x|^g + |y|^g)
    bool lipschitz = false;   ///< ||x|^g x - |y|^g y| <= kappa |x-y| (|x|+|y|)^g
    double monotone_lhs = 0, monotone_rhs = 0;
    double lipschitz_lhs = 0, lipschitz_rhs = 0;
};

namespace detail {
inline double norm3(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }
} // namespace detail

/// Evaluates both sides of the two pointwise damping inequalities.
/// Comparisons allow a rounding slack of 64 ulp of the natural magnitude of
/// each side, since both sides agree to leading order for nearby x, y.
inline DampingInequalityResult pointwise_damping_inequalities(const Vec3& x, const Vec3& y, double gamma, double kappa) {
    if (!(gamma >= 0)) throw InvalidInput("damping inequalities: gamma must be nonnegative");
    const double nx = detail::norm3(x), ny = detail::norm3(y);
    const double px = gamma == 0 ? 1.0 : std::pow(nx, gamma), py = gamma == 0 ? 1.0 : std::pow(ny, gamma);
    Vec3 d{}, gd{};
    for (int i = 0; i < 3; ++i) {
        d[i] = x[i] - y[i];
        gd[i] = px * x[i] - py * y[i];
    }
    const double nd = detail::norm3(d);
    DampingInequalityResult r;
    r.monotone_lhs = gd[0] * d[0] + gd[1] * d[1] + gd[2] * d[2];
    r.monotone_rhs = 0.5 * nd * nd * (px + py);
    r.lipschitz_lhs = detail::norm3(gd);
    r.lipschitz_rhs = kappa * nd * (gamma == 0 ? 1.0 : std::pow(nx + ny, gamma));
    constexpr double slack = 64 * std::numeric_limits<double>::epsilon();
    const double mscale = (px + py) * (nx + ny) * (nx + ny);
    const double lscale = (px * nx + py * ny);
    r.monotone = r.monotone_lhs >= r.monotone_rhs - slack * mscale;
    r.lipschitz = r.lipschitz_lhs <= r.lipschitz_rhs + slack * lscale;
    return r;
}

/// ||x|^g x - |y|^g y| / (|x-y| (|x|+|y|)^g); 0 when x = y.
inline double damping_kappa_ratio(const Vec3& x, const Vec3& y, double gamma) {
    const auto r = pointwise_damping_inequalities(x, y, gamma, 1.0);
    return r.lipschitz_rhs > 0 ? r.lipschitz_lhs / r.lipschitz_rhs : 0.0;
}

/// Random pair for the damping-inequality searches: Gaussian directions with
/// log-uniform magnitudes over six decades, so nearly equal, nearly opposite
/// and very unequal pairs all occur.
inline std::pair<Vec3, Vec3> random_vector_pair(std::mt19937_64& rng) {
    std::normal_distribution<double> N(0.0, 1.0);
    std::uniform_real_distribution<double> logmag(-3.0, 3.0);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    Vec3 x{N(rng), N(rng), N(rng)}, y{N(rng), N(rng), N(rng)};
    const double sx = std::pow(10.0, logmag(rng)), sy = std::pow(10.0, logmag(rng));
    for (int i = 0; i < 3; ++i) {
        x[i] *= sx;
        y[i] *= sy;
    }
    // A quarter of the pairs are small perturbations of each other.
    if (U(rng) < 0.25) {
        const double eps = std::pow(10.0, -6.0 * U(rng));
        for (int i = 0; i < 3; ++i) y[i] = x[i] + eps * sx * N(rng);
    }
    return {x, y};
}

struct KappaEstimate {
    double gamma = 0;
    double kappa = 0;       ///< max observed ratio
    long samples = 0;
};

/// Minimal admissible kappa(gamma) estimated by maximizing the ratio over
/// random pairs plus deterministic probes (y = 0, collinear pairs).
inline KappaEstimate estimate_kappa(double gamma, long samples, std::uint64_t seed) {
    auto rng = derived_rng(seed, static_cast<std::uint64_t>(gamma * 1000) + 0xca);
    KappaEstimate est{gamma, 0.0, samples};
    for (long i = 0; i < samples; ++i) {
        const auto [x, y] = random_vector_pair(rng);
        est.kappa = std::max(est.kappa, damping_kappa_ratio(x, y, gamma));
    }
    const Vec3 e{1.0, 0.0, 0.0};
    est.kappa = std::max(est.kappa, damping_kappa_ratio(e, Vec3{0, 0, 0}, gamma));
    for (int i = 1; i < 2000; ++i) {
        const double t = 1.0 - std::pow(10.0, -6.0 * i / 2000.0) * (1.0 - 1e-9);
        est.kappa = std::max(est.kappa, damping_kappa_ratio(e, Vec3{t, 0, 0}, gamma));
        est.kappa = std::max(est.kappa, damping_kappa_ratio(e, Vec3{-t, 0, 0}, gamma));
        const double s = double(i) / 2000.0;
        est.kappa = std::max(est.kappa, damping_kappa_ratio(e, Vec3{s, 0, 0}, gamma));
    }
    return est;
}

} // namespace bfda
