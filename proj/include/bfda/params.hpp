#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "errors.hpp"

namespace bfda {

/// Truth-system parameters in dimensionless form; the damping coefficient
/// a is always derived from (a_tilde, alpha, l, nu).
struct PhysicalParams {
    double nu = 0.1;
    double l = 2.0 * std::numbers::pi;
    double alpha = 2.0;
    double a_tilde = 0.1;

    double a() const { return a_tilde * std::pow(l, 2 * alpha - 2) / std::pow(nu, 2 * alpha - 1); }

    void validate() const {
        if (!(nu > 0)) throw InvalidInput("physical.nu must be positive");
        if (!(l > 0)) throw InvalidInput("physical.l must be positive");
        if (!(alpha > 1)) throw InvalidInput("physical.alpha must exceed 1");
        if (!(a_tilde > 0)) throw InvalidInput("physical.a_tilde must be positive");
    }

    bool operator==(const PhysicalParams&) const = default;
};

enum class InterpolantKind { FourierLowpass, VolumeAverage, TrilinearNodal };

inline std::string to_string(InterpolantKind k) {
    switch (k) {
    case InterpolantKind::FourierLowpass: return "fourier-lowpass";
    case InterpolantKind::VolumeAverage: return "volume-average";
    case InterpolantKind::TrilinearNodal: return "trilinear-nodal";
    }
    return "?";
}

inline InterpolantKind interpolant_kind_from(const std::string& s) {
    if (s == "fourier-lowpass") return InterpolantKind::FourierLowpass;
    if (s == "volume-average") return InterpolantKind::VolumeAverage;
    if (s == "trilinear-nodal") return InterpolantKind::TrilinearNodal;
    throw InvalidInput("unknown interpolant kind '" + s + "'");
}

/// Observation operator I_h with its approximation constants.
struct InterpolantSpec {
    InterpolantKind kind = InterpolantKind::FourierLowpass;
    double h = 0.0;
    double c0 = 0.0;
    double c1 = 0.0;

    bool type1() const { return kind != InterpolantKind::TrilinearNodal; }

    /// Declared constants for each kind, with a safety factor over the
    /// sharp or measured values (see interpolants.hpp).
    static InterpolantSpec declared(InterpolantKind kind, double h) {
        constexpr double pi = std::numbers::pi;
        InterpolantSpec s{kind, h, 0.0, 0.0};
        switch (kind) {
        case InterpolantKind::FourierLowpass: s.c0 = 2.0 / (4 * pi * pi); break;
        case InterpolantKind::VolumeAverage: s.c0 = 2.0 / (pi * pi); break;
        case InterpolantKind::TrilinearNodal:
            s.c0 = 1.0 / (pi * pi);
            s.c1 = 6.0 / (pi * pi * pi * pi);
            break;
        }
        return s;
    }

    void validate(double l) const {
        if (!(h > 0 && h <= l)) throw InvalidInput("interpolant.h must lie in (0, l]");
        if (c0 < 0 || c1 < 0) throw InvalidInput("interpolant constants must be nonnegative");
        if (type1() && c1 != 0.0) throw InvalidInput("type-1 interpolant must have c1 = 0");
    }

    bool operator==(const InterpolantSpec&) const = default;
};

/// Parameters of the assimilated (guess) system.
struct AssimParams {
    double beta = 2.0;
    double b_tilde = 0.1;
    double eta = 10.0;
    InterpolantSpec interpolant;

    double b(const PhysicalParams& p) const {
        return b_tilde * std::pow(p.l, 2 * beta - 2) / std::pow(p.nu, 2 * beta - 1);
    }

    void validate(double l) const {
        if (!(beta > 1)) throw InvalidInput("assim.beta must exceed 1");
        if (!(b_tilde > 0)) throw InvalidInput("assim.b_tilde must be positive");
        if (!(eta >= 0)) throw InvalidInput("assim.eta must be nonnegative");
        interpolant.validate(l);
    }

    bool operator==(const AssimParams&) const = default;
};

} // namespace bfda
