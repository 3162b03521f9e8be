#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "random_fields.hpp"

namespace bfda {

enum class ForcingKind { Zero, TaylorGreenLike, RandomLowMode };

inline std::string to_string(ForcingKind k) {
    switch (k) {
    case ForcingKind::Zero: return "zero";
    case ForcingKind::TaylorGreenLike: return "taylor-green-like";
    case ForcingKind::RandomLowMode: return "random-low-mode";
    }
    return "?";
}

inline ForcingKind forcing_kind_from(const std::string& s) {
    if (s == "zero") return ForcingKind::Zero;
    if (s == "taylor-green-like") return ForcingKind::TaylorGreenLike;
    if (s == "random-low-mode") return ForcingKind::RandomLowMode;
    throw InvalidInput("unknown forcing kind '" + s + "'");
}

struct ForcingSpec {
    ForcingKind kind = ForcingKind::RandomLowMode;
    double amplitude = 0.0;   ///< ||f||_{L2} of the frozen pattern
    int min_mode = 1;
    int max_mode = 2;
    std::uint64_t seed = 7;
    double omega = 0.0;       ///< f(t) = f0 cos(omega t) when positive

    /// sup_t ||f(t)||_{L2}
    double sup_norm() const { return kind == ForcingKind::Zero ? 0.0 : amplitude; }
    /// sup_t ||f_t(t)||_{L2}
    double sup_dt_norm() const { return sup_norm() * omega; }

    void validate() const {
        if (!(amplitude >= 0)) throw InvalidInput("forcing.amplitude must be nonnegative");
        if (min_mode < 1 || max_mode < min_mode) throw InvalidInput("forcing mode range must satisfy 1 <= min <= max");
        if (!(omega >= 0)) throw InvalidInput("forcing.omega must be nonnegative");
    }

    bool operator==(const ForcingSpec&) const = default;
};

/// Divergence-free, zero-mean forcing field evaluated on a fixed grid.
class Forcing {
public:
    Forcing(const Grid& g, const ForcingSpec& spec) : spec_(spec), f0_(g) {
        spec.validate();
        switch (spec.kind) {
        case ForcingKind::Zero: break;
        case ForcingKind::TaylorGreenLike: {
            // (sin x cos y cos z, -cos x sin y cos z, 0) at the fundamental wavenumber
            PhysicalField p(g);
            const double k0 = g.k0(), h = g.spacing();
            for (int i = 0; i < g.n(); ++i)
                for (int j = 0; j < g.n(); ++j)
                    for (int k = 0; k < g.n(); ++k) {
                        const double x = k0 * i * h, y = k0 * j * h, z = k0 * k * h;
                        const auto idx = g.physical_index(i, j, k);
                        p.component(0)[idx] = std::sin(x) * std::cos(y) * std::cos(z);
                        p.component(1)[idx] = -std::cos(x) * std::sin(y) * std::cos(z);
                    }
            f0_ = dealias(leray_project(forward_transform(p)));
            normalize();
            break;
        }
        case ForcingKind::RandomLowMode: {
            auto rng = derived_rng(spec.seed, 0xf0);
            f0_ = random_field(g, {spec.max_mode, 0.0, 1.0, spec.min_mode}, rng);
            normalize();
            break;
        }
        }
    }

    const ForcingSpec& spec() const { return spec_; }

    bool time_dependent() const { return spec_.omega > 0.0 && spec_.kind != ForcingKind::Zero; }
    double modulation(double t) const { return time_dependent() ? std::cos(spec_.omega * t) : 1.0; }
    double modulation_dt(double t) const { return time_dependent() ? -spec_.omega * std::sin(spec_.omega * t) : 0.0; }

    /// f(t), already projected and dealiased.
    SpectralField at(double t) const { return modulation(t) * SpectralField(f0_); }
    SpectralField dt_at(double t) const { return modulation_dt(t) * SpectralField(f0_); }
    const SpectralField& pattern() const { return f0_; }

private:
    void normalize() {
        const double n2 = l2_norm_sq(f0_);
        if (n2 > 0) f0_ *= spec_.amplitude / std::sqrt(n2);
    }

    ForcingSpec spec_;
    SpectralField f0_;
};

} // namespace bfda
