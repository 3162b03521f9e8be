#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <random>
#include <vector>

#include "params.hpp"
#include "random_fields.hpp"

namespace bfda {

namespace detail {

/// Number of coarse cells per side, l/h, checked to be an integer dividing n.
inline int coarse_cells(const InterpolantSpec& spec, const Grid& g) {
    const double ratio = g.length() / spec.h;
    const double nearest = std::round(ratio);
    if (std::abs(ratio - nearest) > 1e-9 * ratio || nearest < 1)
        throw InvalidInput(to_string(spec.kind) + ": l/h = " + std::to_string(ratio) + " is not an integer");
    const int cells = static_cast<int>(nearest);
    if (g.n() % cells != 0)
        throw InvalidInput(to_string(spec.kind) + ": l/h = " + std::to_string(cells) +
                           " does not divide the grid size n = " + std::to_string(g.n()));
    return cells;
}

inline void check_lowpass(const InterpolantSpec& spec, const Grid& g) {
    const double kc = g.length() / spec.h;  // cutoff in integer mode units
    if (kc < 1.0 - 1e-12)
        throw InvalidInput("fourier-lowpass: cutoff 2pi/h is below the fundamental wavenumber");
    if (kc > g.n() / 2 + 1e-12)
        throw InvalidInput("fourier-lowpass: cutoff 2pi/h exceeds the grid's Nyquist wavenumber");
}

} // namespace detail

/// Throws InvalidInput explaining why h does not fit the grid.
inline void check_compatible(const InterpolantSpec& spec, const Grid& g) {
    if (!(spec.h > 0 && spec.h <= g.length())) throw InvalidInput("interpolant: h must lie in (0, l]");
    if (spec.kind == InterpolantKind::FourierLowpass) detail::check_lowpass(spec, g);
    else detail::coarse_cells(spec, g);
}

/// I_h(g) for the configured observation operator.
inline SpectralField apply_interpolant(const InterpolantSpec& spec, const SpectralField& s) {
    const Grid& g = s.grid();
    check_compatible(spec, g);
    switch (spec.kind) {
    case InterpolantKind::FourierLowpass: {
        const double kc = g.length() / spec.h;
        const double kc2 = kc * kc * (1 + 1e-12);
        SpectralField out(s);
        const std::size_t M = g.modes();
        auto* u = out.coeffs().data();
        for_each_mode(g, [&](std::size_t idx, int mx, int my, int mz, double) {
            if (double(mx) * mx + double(my) * my + double(mz) * mz <= kc2) return;
            u[idx] = u[M + idx] = u[2 * M + idx] = Complex{};
        });
        return out;
    }
    case InterpolantKind::VolumeAverage: {
        const int cells = detail::coarse_cells(spec, g);
        const int r = g.n() / cells, n = g.n();
        auto p = backward_transform(s);
        std::vector<double> mean(std::size_t(cells) * cells * cells);
        for (int c = 0; c < 3; ++c) {
            auto v = p.component(c);
            std::fill(mean.begin(), mean.end(), 0.0);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    for (int k = 0; k < n; ++k)
                        mean[(std::size_t(i / r) * cells + j / r) * cells + k / r] += v[g.physical_index(i, j, k)];
            const double inv = 1.0 / (double(r) * r * r);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    for (int k = 0; k < n; ++k)
                        v[g.physical_index(i, j, k)] = inv * mean[(std::size_t(i / r) * cells + j / r) * cells + k / r];
        }
        return dealias(forward_transform(p));
    }
    case InterpolantKind::TrilinearNodal: {
        const int cells = detail::coarse_cells(spec, g);
        const int r = g.n() / cells, n = g.n();
        const auto p = backward_transform(s);
        PhysicalField q(g);
        for (int c = 0; c < 3; ++c) {
            const auto v = p.component(c);
            auto out = q.component(c);
            auto node = [&](int ci, int cj, int ck) {
                return v[g.physical_index((ci % cells) * r, (cj % cells) * r, (ck % cells) * r)];
            };
            for (int i = 0; i < n; ++i) {
                const int ci = i / r;
                const double tx = double(i % r) / r;
                for (int j = 0; j < n; ++j) {
                    const int cj = j / r;
                    const double ty = double(j % r) / r;
                    for (int k = 0; k < n; ++k) {
                        const int ck = k / r;
                        const double tz = double(k % r) / r;
                        double acc = 0.0;
                        for (int dx = 0; dx < 2; ++dx)
                            for (int dy = 0; dy < 2; ++dy)
                                for (int dz = 0; dz < 2; ++dz) {
                                    const double w = (dx ? tx : 1 - tx) * (dy ? ty : 1 - ty) * (dz ? tz : 1 - tz);
                                    if (w != 0.0) acc += w * node(ci + dx, cj + dy, ck + dz);
                                }
                        out[g.physical_index(i, j, k)] = acc;
                    }
                }
            }
        }
        return dealias(forward_transform(q));
    }
    }
    return s;
}

/// Nonnegative least squares for y ~ c0 x1 + c1 x2 (two regressors).
struct Nnls2 {
    double c0 = 0.0, c1 = 0.0;
};

inline Nnls2 nnls2(const std::vector<double>& y, const std::vector<double>& x1, const std::vector<double>& x2) {
    double s11 = 0, s12 = 0, s22 = 0, s1y = 0, s2y = 0, syy = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        s11 += x1[i] * x1[i];
        s12 += x1[i] * x2[i];
        s22 += x2[i] * x2[i];
        s1y += x1[i] * y[i];
        s2y += x2[i] * y[i];
        syy += y[i] * y[i];
    }
    auto residual = [&](double a, double b) {
        return syy - 2 * a * s1y - 2 * b * s2y + a * a * s11 + 2 * a * b * s12 + b * b * s22;
    };
    const double det = s11 * s22 - s12 * s12;
    if (det > 1e-14 * s11 * s22) {
        const double a = (s22 * s1y - s12 * s2y) / det;
        const double b = (s11 * s2y - s12 * s1y) / det;
        if (a >= 0 && b >= 0) return {a, b};
    }
    // Active set on the boundary: one coefficient pinned to zero.
    Nnls2 only0{s11 > 0 ? std::max(0.0, s1y / s11) : 0.0, 0.0};
    Nnls2 only1{0.0, s22 > 0 ? std::max(0.0, s2y / s22) : 0.0};
    return residual(only0.c0, 0) <= residual(0, only1.c1) ? only0 : only1;
}

struct InterpolantReport {
    InterpolantSpec spec;
    int trials = 0;
    double c0_fit = 0.0;
    double c1_fit = 0.0;
    double max_ratio = 0.0;      ///< max ||I_h g - g||^2 / (h^2||grad g||^2 + h^4||lap g||^2)
    double max_violation = 0.0;  ///< max ||I_h g - g||^2 / (c0 h^2||grad g||^2 + c1 h^4||lap g||^2), declared c's
    double mean_c0_term = 0.0;   ///< mean of c0_fit * h^2||grad g||^2 over trials
    double mean_c1_term = 0.0;   ///< mean of c1_fit * h^4||lap g||^2 over trials

    bool declared_hold() const { return max_violation <= 1.0; }
};

/// Test-field family for the approximation inequality: smooth random fields
/// with Gaussian spectra whose width is log-uniform in [1, 10] mode units.
inline SpectralField interpolant_trial_field(const Grid& g, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> logw(0.0, std::log(10.0));
    return random_smooth_field(g, std::exp(logw(rng)), rng);
}

/// Measure (I_h g - g) against the two regressors of the approximation
/// inequality over random fields and fit (c0, c1) by nonnegative least squares.
inline InterpolantReport verify_inequality(const InterpolantSpec& spec, const Grid& g, int trials, std::uint64_t seed) {
    if (trials < 1) throw InvalidInput("verify_inequality: trials must be >= 1");
    check_compatible(spec, g);
    const double h2 = spec.h * spec.h, h4 = h2 * h2;
    std::vector<double> y(trials), x1(trials), x2(trials);
    InterpolantReport rep{spec, trials};
    for (int t = 0; t < trials; ++t) {
        auto rng = derived_rng(seed, static_cast<std::uint64_t>(t));
        const auto f = interpolant_trial_field(g, rng);
        const double err = l2_norm_sq(apply_interpolant(spec, f) - f);
        const double r1 = h2 * h1_seminorm_sq(f), r2 = h4 * a_norm_sq(f);
        y[t] = err;
        x1[t] = r1;
        x2[t] = r2;
        rep.max_ratio = std::max(rep.max_ratio, err / (r1 + r2));
        const double bound = spec.c0 * r1 + spec.c1 * r2;
        rep.max_violation = std::max(rep.max_violation, bound > 0 ? err / bound : (err > 0 ? INFINITY : 0.0));
    }
    const auto fit = nnls2(y, x1, x2);
    rep.c0_fit = fit.c0;
    rep.c1_fit = fit.c1;
    for (int t = 0; t < trials; ++t) {
        rep.mean_c0_term += fit.c0 * x1[t] / trials;
        rep.mean_c1_term += fit.c1 * x2[t] / trials;
    }
    return rep;
}

inline void write_interpolant_csv_header(std::ostream& os) {
    os << "kind,h,trials,c0_fit,c1_fit,max_ratio,c0_declared,c1_declared,max_violation\n";
}

inline void write_interpolant_csv_row(std::ostream& os, const InterpolantReport& r) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%s,%.17g,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  to_string(r.spec.kind).c_str(), r.spec.h, r.trials, r.c0_fit, r.c1_fit, r.max_ratio, r.spec.c0,
                  r.spec.c1, r.max_violation);
    os << buf;
}

} // namespace bfda
