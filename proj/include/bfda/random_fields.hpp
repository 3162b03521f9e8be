#pragma once

#include <cstdint>
#include <random>

#include "spectral.hpp"

namespace bfda {

/// Independent generator for sub-stream `stream` of a run seeded with `seed`.
inline std::mt19937_64 derived_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(stream),
                      std::uint32_t(stream >> 32), 0x5eedu};
    return std::mt19937_64(seq);
}

struct RandomFieldSpec {
    int max_mode = 4;      ///< keep modes with min_mode <= |m| <= max_mode (Euclidean, integer units)
    double slope = 2.0;    ///< coefficient magnitude ~ |m|^-slope
    double l2_norm = 1.0;  ///< target ||u||_{L2}; <= 0 leaves the raw scale
    int min_mode = 1;

    bool operator==(const RandomFieldSpec&) const = default;
};

/// Random real, divergence-free, dealiased, zero-mean field.
inline SpectralField random_field(const Grid& g, const RandomFieldSpec& spec, std::mt19937_64& rng) {
    std::normal_distribution<double> N(0.0, 1.0);
    SpectralField s(g);
    const std::size_t M = g.modes();
    auto* u = s.coeffs().data();
    const double r2max = double(spec.max_mode) * spec.max_mode;
    const double r2min = std::max(1.0, double(spec.min_mode) * spec.min_mode);
    for_each_mode(g, [&](std::size_t idx, int mx, int my, int mz, double) {
        const double r2 = double(mx) * mx + double(my) * my + double(mz) * mz;
        // Draw for every mode so the stream does not depend on the cutoff.
        Complex v[3];
        for (auto& x : v) x = Complex(N(rng), N(rng));
        if (r2 < r2min || r2 > r2max) return;
        const double amp = std::pow(r2, -0.5 * spec.slope);
        for (int c = 0; c < 3; ++c) u[c * M + idx] = amp * v[c];
    });
    // The round trip through physical space enforces conjugate symmetry.
    s = dealias(leray_project(forward_transform(backward_transform(s))));
    if (spec.l2_norm > 0.0) {
        const double n2 = l2_norm_sq(s);
        if (n2 > 0.0) s *= spec.l2_norm / std::sqrt(n2);
    }
    return s;
}

/// Random real, divergence-free, dealiased field with a Gaussian spectrum
/// exp(-|m|^2 / (2 width^2)), normalized to unit L2 norm.
inline SpectralField random_smooth_field(const Grid& g, double width, std::mt19937_64& rng) {
    std::normal_distribution<double> N(0.0, 1.0);
    SpectralField s(g);
    const std::size_t M = g.modes();
    auto* u = s.coeffs().data();
    for_each_mode(g, [&](std::size_t idx, int mx, int my, int mz, double) {
        Complex v[3];
        for (auto& x : v) x = Complex(N(rng), N(rng));
        const double r2 = double(mx) * mx + double(my) * my + double(mz) * mz;
        if (r2 == 0.0) return;
        const double amp = std::exp(-r2 / (2 * width * width));
        for (int c = 0; c < 3; ++c) u[c * M + idx] = amp * v[c];
    });
    s = dealias(leray_project(forward_transform(backward_transform(s))));
    const double n2 = l2_norm_sq(s);
    if (n2 > 0.0) s *= 1.0 / std::sqrt(n2);
    return s;
}

/// Random real field with no projection or dealiasing applied.
inline SpectralField random_raw_field(const Grid& g, int max_mode, std::mt19937_64& rng) {
    std::normal_distribution<double> N(0.0, 1.0);
    SpectralField s(g);
    const std::size_t M = g.modes();
    auto* u = s.coeffs().data();
    for_each_mode(g, [&](std::size_t idx, int mx, int my, int mz, double) {
        Complex v[3];
        for (auto& x : v) x = Complex(N(rng), N(rng));
        if (std::abs(mx) > max_mode || std::abs(my) > max_mode || mz > max_mode) return;
        for (int c = 0; c < 3; ++c) u[c * M + idx] = v[c];
    });
    return forward_transform(backward_transform(s));
}

} // namespace bfda
