#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>

#include "fft.hpp"
#include "fields.hpp"

namespace bfda {

namespace testing {

namespace detail {
inline std::atomic<double>& leray_fault() {
    static std::atomic<double> eps{0.0};
    return eps;
}
} // namespace detail

/// Test hook: after projection, scale each mode by (1 + eps*|m_x|/n).
/// Breaks the orthogonality of the projection; zero disables it.
inline void inject_leray_fault(double eps) { detail::leray_fault().store(eps); }

} // namespace testing

inline SpectralField forward_transform(const PhysicalField& p) {
    if (!p.finite()) throw InvalidInput("forward_transform: non-finite value in physical field");
    SpectralField s(p.grid());
    for (int c = 0; c < 3; ++c) forward_scalar(p.grid(), p.component(c), s.component(c));
    return s;
}

inline PhysicalField backward_transform(const SpectralField& s) {
    PhysicalField p(s.grid());
    for (int c = 0; c < 3; ++c) backward_scalar(s.grid(), s.component(c), p.component(c));
    return p;
}

inline SpectralField leray_project(SpectralField s) {
    const Grid& g = s.grid();
    const std::size_t M = g.modes();
    auto* u = s.coeffs().data();
    for_each_mode(g, [&](std::size_t idx, int mx, int my, int mz, double) {
        const double kk = double(mx) * mx + double(my) * my + double(mz) * mz;
        if (kk == 0.0) return;
        // Scaling k by 2pi/l cancels in k (k.u) / |k|^2, so integer modes suffice.
        const Complex dot = double(mx) * u[idx] + double(my) * u[M + idx] + double(mz) * u[2 * M + idx];
        const Complex r = dot / kk;
        u[idx] -= double(mx) * r;
        u[M + idx] -= double(my) * r;
        u[2 * M + idx] -= double(mz) * r;
    });
    if (const double eps = testing::detail::leray_fault().load(); eps != 0.0) {
        for_each_mode(g, [&](std::size_t idx, int mx, int, int, double) {
            const double f = 1.0 + eps * std::abs(mx) / g.n();
            for (int c = 0; c < 3; ++c) u[c * M + idx] *= f;
        });
    }
    return s;
}

inline SpectralField dealias(SpectralField s) {
    const Grid& g = s.grid();
    const std::size_t M = g.modes();
    auto* u = s.coeffs().data();
    for_each_mode(g, [&](std::size_t idx, int mx, int my, int mz, double) {
        if (g.retained(mx, my, mz)) return;
        u[idx] = u[M + idx] = u[2 * M + idx] = Complex{};
    });
    return s;
}

/// Per-mode multiplication by |k|^power (power 1 gives |k|, 2 gives A).
inline SpectralField scale_by_wavenumber(SpectralField s, int power) {
    const Grid& g = s.grid();
    const std::size_t M = g.modes();
    const double k0 = g.k0();
    auto* u = s.coeffs().data();
    for_each_mode(g, [&](std::size_t idx, int mx, int my, int mz, double) {
        const double kk = k0 * k0 * (double(mx) * mx + double(my) * my + double(mz) * mz);
        const double f = power == 2 ? kk : std::pow(kk, 0.5 * power);
        for (int c = 0; c < 3; ++c) u[c * M + idx] *= f;
    });
    return s;
}

/// Stokes operator: multiplication by |k|^2.
inline SpectralField apply_A(SpectralField s) { return scale_by_wavenumber(std::move(s), 2); }

/// Integrating factor: multiplication by exp(-nu |k|^2 tau).
inline void apply_heat(SpectralField& s, double nu_tau) {
    const Grid& g = s.grid();
    const std::size_t M = g.modes();
    const double k0sq = g.k0() * g.k0();
    auto* u = s.coeffs().data();
    for_each_mode(g, [&](std::size_t idx, int mx, int my, int mz, double) {
        const double f = std::exp(-nu_tau * k0sq * (double(mx) * mx + double(my) * my + double(mz) * mz));
        for (int c = 0; c < 3; ++c) u[c * M + idx] *= f;
    });
}

/// Derivatives d/dx_j of every component. Nyquist entries along the
/// differentiated direction are set to zero so the result stays real.
inline GradientField gradient(const SpectralField& s) {
    const Grid& g = s.grid();
    const std::size_t M = g.modes();
    const double k0 = g.k0();
    const int ny = g.n() / 2;
    GradientField out{SpectralField(g), SpectralField(g), SpectralField(g)};
    const auto* u = s.coeffs().data();
    for_each_mode(g, [&](std::size_t idx, int mx, int my, int mz, double) {
        const int m[3] = {mx, my, mz};
        for (int j = 0; j < 3; ++j) {
            if (m[j] == ny) continue;
            const Complex ik(0.0, k0 * m[j]);
            auto* d = out[j].coeffs().data();
            for (int c = 0; c < 3; ++c) d[c * M + idx] = ik * u[c * M + idx];
        }
    });
    return out;
}

/// L2 inner product over the box, computed from coefficients.
inline double inner(const SpectralField& a, const SpectralField& b) {
    require_same_grid(a.grid(), b.grid(), "inner");
    const Grid& g = a.grid();
    const std::size_t M = g.modes();
    const auto* x = a.coeffs().data();
    const auto* y = b.coeffs().data();
    double sum = 0.0;
    for_each_mode(g, [&](std::size_t idx, int, int, int, double w) {
        double m = 0.0;
        for (int c = 0; c < 3; ++c) {
            const Complex p = x[c * M + idx], q = y[c * M + idx];
            m += p.real() * q.real() + p.imag() * q.imag();
        }
        sum += w * m;
    });
    return g.volume() * sum;
}

namespace detail {
inline double weighted_norm_sq(const SpectralField& s, int power) {
    const Grid& g = s.grid();
    const std::size_t M = g.modes();
    const double k0sq = g.k0() * g.k0();
    const auto* u = s.coeffs().data();
    double sum = 0.0;
    for_each_mode(g, [&](std::size_t idx, int mx, int my, int mz, double w) {
        const double kk = k0sq * (double(mx) * mx + double(my) * my + double(mz) * mz);
        double m = std::norm(u[idx]) + std::norm(u[M + idx]) + std::norm(u[2 * M + idx]);
        if (power == 0) sum += w * m;
        else if (kk > 0.0) sum += w * m * (power == 1 ? kk : kk * kk);
    });
    return g.volume() * sum;
}
} // namespace detail

/// ||u||^2_{L2}
inline double l2_norm_sq(const SpectralField& s) { return detail::weighted_norm_sq(s, 0); }
/// ||grad u||^2_{L2}
inline double h1_seminorm_sq(const SpectralField& s) { return detail::weighted_norm_sq(s, 1); }
/// ||A u||^2_{L2}
inline double a_norm_sq(const SpectralField& s) { return detail::weighted_norm_sq(s, 2); }

/// Collocation quadrature of |u|^p over the box.
inline double lp_integral(const PhysicalField& p, double power) {
    const Grid& g = p.grid();
    const auto x = p.component(0), y = p.component(1), z = p.component(2);
    double sum = 0.0;
    for (std::size_t i = 0; i < g.points(); ++i) {
        const double m2 = x[i] * x[i] + y[i] * y[i] + z[i] * z[i];
        sum += power == 2.0 ? m2 : std::pow(m2, 0.5 * power);
    }
    return g.cell_volume() * sum;
}

inline double lp_integral(const SpectralField& s, double power) {
    return lp_integral(backward_transform(s), power);
}

/// ||u||_{L^p}
inline double lp_norm(const SpectralField& s, double power) {
    return std::pow(lp_integral(s, power), 1.0 / power);
}

/// max over collocation points of |u(x)|
inline double max_pointwise(const PhysicalField& p) {
    const auto x = p.component(0), y = p.component(1), z = p.component(2);
    double m = 0.0;
    for (std::size_t i = 0; i < p.grid().points(); ++i)
        m = std::max(m, x[i] * x[i] + y[i] * y[i] + z[i] * z[i]);
    return std::sqrt(m);
}

/// Largest |k.u(k)| / (|k| |u(k)|) over nonzero modes; 0 for a solenoidal field.
inline double max_divergence_ratio(const SpectralField& s) {
    const Grid& g = s.grid();
    const std::size_t M = g.modes();
    const auto* u = s.coeffs().data();
    double worst = 0.0;
    for_each_mode(g, [&](std::size_t idx, int mx, int my, int mz, double) {
        const double kk = double(mx) * mx + double(my) * my + double(mz) * mz;
        const double mag = std::sqrt(std::norm(u[idx]) + std::norm(u[M + idx]) + std::norm(u[2 * M + idx]));
        if (kk == 0.0 || mag == 0.0) return;
        const Complex dot = double(mx) * u[idx] + double(my) * u[M + idx] + double(mz) * u[2 * M + idx];
        worst = std::max(worst, std::abs(dot) / (std::sqrt(kk) * mag));
    });
    return worst;
}

/// Largest coefficient magnitude outside the dealiasing box.
inline double max_outside_dealias(const SpectralField& s) {
    const Grid& g = s.grid();
    const std::size_t M = g.modes();
    const auto* u = s.coeffs().data();
    double worst = 0.0;
    for_each_mode(g, [&](std::size_t idx, int mx, int my, int mz, double) {
        if (g.retained(mx, my, mz)) return;
        for (int c = 0; c < 3; ++c) worst = std::max(worst, std::abs(u[c * M + idx]));
    });
    return worst;
}

/// Direct evaluation of the Fourier series at an arbitrary point.
inline std::array<double, 3> evaluate_at(const SpectralField& s, double x, double y, double z) {
    const Grid& g = s.grid();
    const std::size_t M = g.modes();
    const double k0 = g.k0();
    const auto* u = s.coeffs().data();
    std::array<double, 3> out{};
    for_each_mode(g, [&](std::size_t idx, int mx, int my, int mz, double w) {
        const Complex e = std::polar(1.0, k0 * (mx * x + my * y + mz * z));
        for (int c = 0; c < 3; ++c) out[c] += w * (u[c * M + idx] * e).real();
    });
    return out;
}

} // namespace bfda
