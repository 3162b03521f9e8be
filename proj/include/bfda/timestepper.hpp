#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "dynamics.hpp"

namespace bfda {

enum class Scheme { IFRK3, IFEuler };

inline std::string to_string(Scheme s) { return s == Scheme::IFRK3 ? "if-rk3" : "if-euler"; }

inline Scheme scheme_from(const std::string& s) {
    if (s == "if-rk3") return Scheme::IFRK3;
    if (s == "if-euler") return Scheme::IFEuler;
    throw InvalidInput("unknown scheme '" + s + "'");
}

struct StepperConfig {
    double dt = 0.01;          ///< base (and, when adaptive, maximal) step
    Scheme scheme = Scheme::IFRK3;
    double cfl_safety = 0.5;
    bool adaptive = false;
    double blowup_threshold = 1e12;  ///< max coefficient magnitude treated as divergence

    void validate() const {
        if (!(dt > 0)) throw InvalidInput("stepper.dt must be positive");
        if (!(cfl_safety > 0 && cfl_safety <= 1)) throw InvalidInput("stepper.cfl_safety must lie in (0,1]");
    }

    bool operator==(const StepperConfig&) const = default;
};

/// Individual step-size limits; each is +inf when inactive.
struct DtLimits {
    double advective = std::numeric_limits<double>::infinity();
    double damping = std::numeric_limits<double>::infinity();
    double nudging = std::numeric_limits<double>::infinity();
};

inline DtLimits dt_limits(double umax, const Grid& g, double a, double alpha, double eta, double cfl) {
    DtLimits lim;
    if (umax > 0) {
        lim.advective = cfl * g.length() / (g.n() * umax);
        const double d = a * std::pow(umax, 2 * alpha);
        if (d > 0) lim.damping = cfl / d;
    }
    if (eta > 0) lim.nudging = cfl / eta;
    return lim;
}

/// Step size honoring the advective CFL, explicit damping and nudging limits,
/// capped at cfg.dt. A zero field returns cfg.dt.
inline double stable_dt(const SpectralField& u, const PhysicalParams& p, const StepperConfig& cfg,
                        const AssimParams* q = nullptr) {
    const double umax = max_pointwise(backward_transform(u));
    const auto lim = dt_limits(umax, u.grid(), p.a(), p.alpha, q ? q->eta : 0.0, cfg.cfl_safety);
    return std::min({cfg.dt, lim.advective, lim.damping, lim.nudging});
}

template <std::size_t N>
using FieldPack = std::array<SpectralField, N>;

namespace detail {

/// Williamson low-storage RK3 coefficients.
inline constexpr double rk3_A[3] = {0.0, -5.0 / 9.0, -153.0 / 128.0};
inline constexpr double rk3_B[3] = {1.0 / 3.0, 15.0 / 16.0, 8.0 / 15.0};
inline constexpr double rk3_c[4] = {0.0, 1.0 / 3.0, 3.0 / 4.0, 1.0};

template <std::size_t N>
void check_finite(const FieldPack<N>& s, double t, double threshold, const std::array<const char*, N>& names) {
    for (std::size_t i = 0; i < N; ++i) {
        const double m = s[i].max_abs();
        if (!std::isfinite(m) || m > threshold || !s[i].finite())
            throw BlowUp(names[i], t, std::isfinite(m) ? m : std::numeric_limits<double>::infinity());
    }
}

} // namespace detail

/// One step of the integrating-factor scheme. `explicit_part(pack, t)`
/// returns the non-viscous right-hand side for every member; the viscous
/// term -nu A is integrated exactly. Members are advanced independently
/// except through explicit_part, so a member whose explicit part ignores
/// the others evolves exactly as in a solo run.
template <std::size_t N, class F>
void if_step(FieldPack<N>& s, double t, double dt, double nu, Scheme scheme, F&& explicit_part) {
    if (scheme == Scheme::IFEuler) {
        const auto rhs = explicit_part(s, t);
        for (std::size_t i = 0; i < N; ++i) {
            s[i].axpy(dt, rhs[i]);
            apply_heat(s[i], nu * dt);
        }
        return;
    }
    // q is carried in the frame of the most recent stage time.
    std::array<SpectralField, N> q = s;
    for (int stage = 0; stage < 3; ++stage) {
        const double ts = t + detail::rk3_c[stage] * dt;
        auto rhs = explicit_part(s, ts);
        for (std::size_t i = 0; i < N; ++i) {
            if (stage == 0) {
                q[i] = std::move(rhs[i]);
                q[i] *= dt;
            } else {
                apply_heat(q[i], nu * (detail::rk3_c[stage] - detail::rk3_c[stage - 1]) * dt);
                q[i] *= detail::rk3_A[stage];
                q[i].axpy(dt, rhs[i]);
            }
            s[i].axpy(detail::rk3_B[stage], q[i]);
            apply_heat(s[i], nu * (detail::rk3_c[stage + 1] - detail::rk3_c[stage]) * dt);
        }
    }
}

/// Advances a pack by one step and checks for blow-up.
template <std::size_t N, class F>
void step(FieldPack<N>& s, double& t, double dt, double nu, const StepperConfig& cfg, F&& explicit_part,
          const std::array<const char*, N>& names) {
    if_step(s, t, dt, nu, cfg.scheme, explicit_part);
    t += dt;
    detail::check_finite(s, t, cfg.blowup_threshold, names);
}

/// Explicit part closures for the two systems.
inline auto truth_explicit(const PhysicalParams& p, const Forcing& f) {
    return [&p, &f](const FieldPack<1>& s, double t) { return FieldPack<1>{nonlinear_truth(s[0], t, p, f)}; };
}

inline auto coupled_explicit(const PhysicalParams& p, const AssimParams& q, const Forcing& f) {
    return [&p, &q, &f](const FieldPack<2>& s, double t) {
        return FieldPack<2>{nonlinear_truth(s[0], t, p, f), nonlinear_nudged(s[1], s[0], t, p, q, f)};
    };
}

/// Convenience: advance the truth system alone.
inline void step_truth(SpectralField& u, double& t, double dt, const PhysicalParams& p, const Forcing& f,
                       const StepperConfig& cfg) {
    FieldPack<1> s{std::move(u)};
    try {
        step(s, t, dt, p.nu, cfg, truth_explicit(p, f), {"truth"});
    } catch (...) {
        u = std::move(s[0]);
        throw;
    }
    u = std::move(s[0]);
}

} // namespace bfda
