#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include "assimilation.hpp"
#include "log_real.hpp"

namespace bfda {

/// Inputs of the a-priori constants that the simulation does not fix.
struct BoundsConfig {
    // Gagliardo-Nirenberg constants.
    double C3 = 1.0, C4 = 1.0, C6 = 1.0, C42_5 = 1.0, C10 = 1.0, C6beta = 1.0, Cinf = 1.0;
    /// kappa(2 beta); 0 means "estimate by the max-ratio search".
    double kappa = 0.0;
    long kappa_samples = 200000;
    /// sup_t ||f||_{L2} and sup_t ||f_t||_{L2}; negative means "take from the forcing".
    double f_norm = -1.0;
    double ft_norm = -1.0;

    void validate() const {
        for (double c : {C3, C4, C6, C42_5, C10, C6beta, Cinf})
            if (!(c > 0)) throw InvalidInput("bounds: Gagliardo-Nirenberg constants must be positive");
        if (!(kappa >= 0)) throw InvalidInput("bounds.kappa must be positive (or 0 to estimate)");
        if (kappa_samples < 1) throw InvalidInput("bounds.kappa_samples must be >= 1");
    }

    bool operator==(const BoundsConfig&) const = default;
};

/// Fully resolved inputs of every formula.
struct BoundsInputs {
    PhysicalParams p;
    AssimParams q;
    BoundsConfig cfg;  ///< kappa, f_norm, ft_norm resolved
    double M = 0;
};

inline BoundsInputs resolve_bounds_inputs(const PhysicalParams& p, const AssimParams& q, BoundsConfig cfg,
                                          const ForcingSpec& f, double M, std::uint64_t seed = 1) {
    p.validate();
    cfg.validate();
    if (!(M > 0)) throw InvalidInput("bounds: M must be positive");
    if (cfg.f_norm < 0) cfg.f_norm = f.sup_norm();
    if (cfg.ft_norm < 0) cfg.ft_norm = f.sup_dt_norm();
    if (cfg.kappa == 0.0) cfg.kappa = estimate_kappa(2 * q.beta, cfg.kappa_samples, seed).kappa;
    return {p, q, cfg, M};
}

/// Uniform and integral bounds on the truth solution.
struct MLadder {
    LogReal K, M1, Mtilde, M2, M3, M4;
    bool late_time_bounds = false;  ///< M5..M8 and K2 need 1 < alpha < 2
    LogReal M5, M6, M7, M8, K2;
    LogReal corr43;        ///< bound on int_0^t exp(eta (s - t) / 8) ||A u||^2
};

namespace detail {

inline LogReal L(double v) { return LogReal(v); }

/// nu^{e_nu} a^{e_a}, the recurring denominator pattern.
inline LogReal nu_a(double nu, double e_nu, double a, double e_a) { return L(nu).pow(e_nu) * L(a).pow(e_a); }

} // namespace detail

inline LogReal eval_K(const PhysicalParams& p, double f_norm) {
    using detail::L;
    const double nu = p.nu, l = p.l, al = p.alpha, a = p.a();
    return L(l * l / nu) * L(f_norm * f_norm) +
           L(4.0) * L(nu).pow((al + 1) / al) / (L(a).pow(1 / al) * L(l).pow((2 - al) / al));
}

inline MLadder eval_M_ladder(const BoundsInputs& in) {
    using detail::L;
    using detail::nu_a;
    const double nu = in.p.nu, l = in.p.l, al = in.p.alpha, a = in.p.a();
    const auto& c = in.cfg;
    const LogReal F2 = L(c.f_norm * c.f_norm), M = L(in.M);
    const LogReal l2 = L(l * l);
    MLadder m;
    m.K = eval_K(in.p, c.f_norm);
    m.M1 = l2 * M + l2 * m.K / L(nu);
    const LogReal mt_a =
        L(1.0) / nu_a(nu, al / (al - 1), a, 1 / (al - 1)) *
        (L(l).pow(4) / L(nu).pow(3) * F2 + L(4.0) * L(l).pow((3 * al - 2) / al) / nu_a(nu, (al - 1) / al, a, 1 / al));
    const LogReal mt_b = l2 / (L(2.0) * nu_a(nu, (2 * al - 1) / (al - 1), a, 1 / (al - 1))) * M +
                         m.K * (L(1.5 / nu) + L(1.5) * l2 / nu_a(nu, (3 * al - 2) / (al - 1), a, 1 / (al - 1)));
    m.Mtilde = max(mt_a, mt_b);
    m.M2 = l2 / L(nu * nu) * F2 + M + m.Mtilde;
    m.M3 = L(2.0) / nu_a(nu, (2 * al - 1) / (al - 1), a, 1 / (al - 1)) * m.M2 + L(4.0 / (nu * nu)) * F2;
    m.M4 = L(2 * l * l / (a * nu)) * F2 +
           L(2.0).pow((1 + al) / al) * L(nu).pow((al + 1) / al) * L(l).pow((al - 2) / al) / L(a).pow((1 + al) / al);
    if (in.q.eta > 0)
        m.corr43 = L(4.0 / nu) * m.M2 +
                   L(16.0) / (L(in.q.eta) * nu_a(nu, (3 * al - 2) / (al - 1), a, 1 / (al - 1))) * m.M2 +
                   L(32.0) / L(in.q.eta * nu * nu) * F2;

    m.late_time_bounds = al > 1 && al < 2;
    if (!m.late_time_bounds) return m;
    const LogReal Ci2 = L(c.Cinf * c.Cinf);
    const LogReal M1 = m.M1, M2 = m.M2, M3 = m.M3;
    const LogReal S5 = L(4 * l * l / (nu * nu * nu)) * M2.pow(3) + L(2 * nu) * M2 + L(l * l * nu) * M3 +
                       L(1 / (l * l * nu)) * M1 * M2;
    m.M5 = L(nu / (a * l * l)) * M1 + m.M4 + L(nu * (al + 1) / a) * M2 + L((2 * al + 2) * l * l / (a * nu)) * F2 +
           L(4 * (2 * al + 2) / a) * Ci2 * S5;
    // The last product carries 1/(l nu), not 1/(l^2 nu) as in M5; kept as written.
    const LogReal S6 = L(4 * l * l / (nu * nu * nu)) * M2.pow(3) + L(2 * nu) * M2 + L(l * l * nu) * M3 +
                       L(1 / (l * nu)) * M1 * M2;
    m.M6 = L(nu) * M2 + L(a / (al + 1)) * m.M5 + L(2 * l * l / nu) * F2 + L(8.0) * Ci2 * S6;
    const double c36 = c.C3 * c.C6;
    const LogReal br = L(1.5 * nu / (l * l)) + L(108 * std::pow(c36, 4) / (nu * nu * nu)) * M2.pow(2) +
                       L(6 * std::pow(c36, 4.0 / 3) / (std::cbrt(nu) * std::pow(l, 4.0 / 3))) * M2.pow(2.0 / 3) +
                       L(4 * c36 * c36 / (nu * l)) * M2 + L(2 * c36 / std::pow(l, 1.5)) * M2.pow(0.5);
    m.M7 = m.M6 * br + L(2 * std::pow(l, 4) / (nu * nu)) * L(c.ft_norm * c.ft_norm);
    const double r = 2 - al;
    m.M8 = L(2 / nu) * m.M7 + L(1024 * std::pow(c.C4, 8) / std::pow(nu, 4)) *
                                  (M1.pow(0.5) * M2.pow(1.5) + M1.pow(2) / L(l * l * l)) * M2.pow(0.5) +
           L(2.0).pow(4 * al / r) * L(a).pow(2 / r) * m.M5.pow(1 / r) * L(c.Cinf).pow(2 * al / r) / L(nu).pow(2 / r) *
               M2.pow(al / (4 - 2 * al)) +
           L(std::pow(2.0, al) * a * std::pow(c.Cinf, al) / (nu * std::pow(l, 1.5 * al))) * m.M5.pow(0.5) *
               M1.pow(al / 2) +
           L(2 / nu * c.f_norm);
    m.K2 = L(nu / (4 * l * l)) + L(54 * std::pow(c36, 4) / (nu * nu * nu)) * M2.pow(2) +
           L(3 * std::pow(c36, 4.0 / 3) / (std::cbrt(nu) * std::pow(l, 4.0 / 3))) * M2.pow(2.0 / 3) +
           L(2 * c36 * c36 / (nu * l)) * M2 + L(c36 / std::pow(l, 1.5)) * M2.pow(0.5);
    return m;
}

/// L2 synchronization bound for the weak assimilated solution.
struct Thm31Constants {
    bool low_branch = true;  ///< both exponents below 2 (A0), else A1
    LogReal A0, A1;
    LogReal coef_alpha;      ///< multiplies |alpha - beta|^2
    LogReal coef_a;          ///< multiplies |a_tilde - b_tilde|^2
    double d_alpha_sq = 0, d_a_sq = 0;
    double eta = 0;

    /// e^{-eta t / 8} ||g(0)||^2 + |alpha-beta|^2 coef_alpha + |a~-b~|^2 coef_a
    LogReal bound(double t, double g0_sq) const {
        return LogReal(g0_sq) * LogReal::exp(-eta * t / 8) + LogReal(d_alpha_sq) * coef_alpha +
               LogReal(d_a_sq) * coef_a;
    }
};

inline Thm31Constants eval_thm31_constants(const BoundsInputs& in, const MLadder& m) {
    using detail::L;
    const double al = in.p.alpha, be = in.q.beta;
    if (!(al > 1 && al < 3 && be > 1 && be < 3))
        throw InvalidInput("L2 synchronization bound needs 1 < alpha, beta < 3");
    const double nu = in.p.nu, l = in.p.l, a = in.p.a(), eta = in.q.eta, at = in.p.a_tilde;
    if (!(eta > 0)) throw InvalidInput("L2 synchronization bound needs eta > 0");
    const auto& c = in.cfg;
    const LogReal F2 = L(c.f_norm * c.f_norm);
    Thm31Constants r;
    r.eta = eta;
    r.d_alpha_sq = (al - be) * (al - be);
    r.d_a_sq = (at - in.q.b_tilde) * (at - in.q.b_tilde);
    r.low_branch = al < 2 && be < 2;
    const double mx = std::max(al, be);
    const LogReal S = m.M2 + m.M1 / L(l * l);
    r.A0 = L(l * l * (eta * l * l + 2 * nu)) / (L(eta * eta) * L(nu).pow(7)) * S.pow(5);
    // The bracket raises M2 to the seventh power, where A0 uses (M2 + M1/l^2)^5; kept as written.
    r.A1 = L(std::pow(l, 8)) / L(nu).pow(10) * L(1 / nu + 2 / (eta * l * l)) *
           (L(1 / nu) * m.M2.pow(7) +
            L(4.0) / (L(eta) * detail::nu_a(nu, (3 * al - 2) / (al - 1), a, 1 / (al - 1))) * m.M2.pow(7) +
            L(8 / (eta * nu * nu)) * F2 * m.M2.pow(6) + L(2.0) / (L(eta) * L(l).pow(16)) * m.M1.pow(7));
    const LogReal nl = L(nu * nu / (eta * std::pow(l, 4))) * m.M1;
    if (r.low_branch) {
        r.coef_alpha = L(32 * at * at) * nl + L(64 * at * at) * L(c.C6).pow(12) / L((2 - mx) * (2 - mx)) * r.A0;
        r.coef_a = L(2.0) * nl + L(2.0) * L(c.C6).pow(10) * r.A0;
    } else {
        const LogReal nl2 = nl / L(eta);
        r.coef_alpha = L(512 * at * at) * nl2 + L(std::ldexp(at * at, 22)) * L(c.C6 * c.C6) * L(c.C42_5).pow(14) /
                                                     L((3 - mx) * (3 - mx)) * r.A1;
        r.coef_a = L(32.0) * nl2 + L(65536.0) * L(c.C42_5).pow(14) * r.A1;
    }
    return r;
}

/// H1 synchronization constants for strong assimilated solutions.
struct Thm3233Constants {
    LogReal B, C, D, Ctilde, Dtilde, Ztilde1, H;
    LogReal Z3, Z5;
    LogReal Z2c, Z4c, Z6c;  ///< coefficients of ||A u(t)||^2 in Z2, Z4, Z6
    LogReal W;              ///< the exponentially weighted ||A u||^2 bound appearing in C, D and H
};

inline Thm3233Constants eval_thm32_33_constants(const BoundsInputs& in, const MLadder& m) {
    using detail::L;
    const double al = in.p.alpha, be = in.q.beta;
    if (!(al > 1 && al < 2 && be > 1 && be < 2)) throw InvalidInput("H1 synchronization bounds need 1 < alpha, beta < 2");
    const double nu = in.p.nu, l = in.p.l, eta = in.q.eta, at = in.p.a_tilde, b = in.q.b(in.p);
    if (!(eta > 0)) throw InvalidInput("H1 synchronization bounds need eta > 0");
    const auto& c = in.cfg;
    const double mx = std::max(al, be);
    const LogReal M1 = m.M1, M2 = m.M2, l2 = L(l * l);
    const LogReal kc = L(c.kappa * c.kappa) * L(c.C6 * c.C6) * L(c.C6beta).pow(4 * be);  // kappa^2 C6^2 C6b^{4 beta}
    Thm3233Constants r;
    r.B = LogReal::exp((L(8192.0) * kc * L(l / (nu * nu)) * M2).value());
    const LogReal S5 = (M2 + M1 / l2).pow(5);
    const LogReal d2 = L((2 - mx) * (2 - mx));
    r.Z3 = L(64 * at * at * std::exp(-2.0) * nu / std::pow(l, 4)) * M1 +
           L(std::ldexp(at * at, 15)) * (L(c.C6).pow(12) + L(c.C10).pow(10)) / d2 * L(l * l) / L(nu).pow(7) * S5;
    r.Z4c = L(std::ldexp(at * at, 14)) * L(c.C10).pow(10) / d2 * L(std::pow(l, 4)) / L(nu).pow(7) * M2.pow(4);
    r.Z5 = L(6 * nu / std::pow(l, 4)) * M1 +
           L(4096.0) * (L(c.C6).pow(10) + L(c.C10).pow(10)) * L(l * l) / L(nu).pow(7) * S5;
    r.Z6c = L(2048.0) * L(c.C10).pow(10) * L(std::pow(l, 4)) / L(nu).pow(7) * M2.pow(4);
    r.Z2c = L(4096.0) * kc * L(l / nu);
    r.W = m.corr43;
    const LogReal dab = L((al - be) * (al - be)), dat = L((at - in.q.b_tilde) * (at - in.q.b_tilde));
    const LogReal tC = L(8 / eta) * r.Z3 + r.Z4c * r.W;
    const LogReal tD = L(8 / eta) * r.Z5 + r.Z6c * r.W;
    r.C = L(2.0) * r.B * tC;
    r.D = L(2.0) * r.B * tD;
    r.H = M2 + M1 / l2 + r.B * (L(4 * in.M) + L(2.0) * dab * tC + L(2.0) * dat * tD);
    const LogReal H = r.H, H4 = L(4.0) * H;
    const double q = (1 + be) / (2 - be);
    const double Ci = c.Cinf, c63 = c.C6 * c.C3;
    // The second term drops the 1/l of the time-dependent version and the fifth
    // reads (l^2 4H)^{2 beta}; both kept as written.
    r.Ztilde1 = L(432 * std::pow(Ci, 4) / std::pow(nu, 3)) * M2.pow(2) + L(4 * Ci * Ci / nu) * M2 +
                L(8 * c63 * c63 / (nu * l)) * H4 + L(1728 * std::pow(c63, 4) / std::pow(nu, 3)) * L(16.0) * H.pow(2) +
                L(2.0).pow(4 * be + 11) * kc * L(b * b) / (L(nu) * L(l).pow(6 * be - 2)) *
                    (M1.pow(2 * be) + (l2 * H4).pow(2 * be)) +
                L(2.0).pow((24 - 9 * be) / (2 - be)) * kc * L(b).pow(2 / (2 - be)) /
                    (L(l).pow((be - 1) / (2 - be)) * L(nu)) * (M2.pow(q) + H4.pow(q)) +
                L(2.0).pow((7 * be + 7) / (2 - be)) * kc.pow(1 / (2 - be)) * L(b).pow(2 / (2 - be)) /
                    L(nu).pow(be / (2 - be)) * H.pow((be - 1) / (2 - be)) * (M2.pow(q) + H4.pow(q)) +
                L(nu / (2 * l * l));
    if (m.late_time_bounds) {
        const LogReal M8sq = m.M8.pow(2);
        r.Ctilde = L(2.0) * r.B / L(eta) * (L(8.0) * r.Z3 + r.Z4c * M8sq);
        r.Dtilde = L(2.0) * r.B / L(eta) * (L(8.0) * r.Z5 + r.Z6c * M8sq);
    }
    return r;
}

/// One hypothesis inequality lhs > rhs.
struct Inequality {
    std::string name;
    LogReal lhs, rhs;
    bool holds = false;
};

struct HypothesisReport {
    std::vector<Inequality> items;
    bool l2_theorem = false;   ///< hypotheses of the L2 bound
    bool h1_theorem = false;   ///< hypotheses of the H1 bounds
    std::vector<std::string> notes;
};

inline HypothesisReport check_hypotheses(const BoundsInputs& in, const MLadder& m,
                                         const Thm3233Constants* h1 = nullptr) {
    using detail::L;
    const double nu = in.p.nu, l = in.p.l, eta = in.q.eta, be = in.q.beta, al = in.p.alpha;
    const double c0 = in.q.interpolant.c0, c1 = in.q.interpolant.c1, h = in.q.interpolant.h, b = in.q.b(in.p);
    HypothesisReport r;
    auto add = [&](const std::string& n, LogReal lhs, LogReal rhs) {
        r.items.push_back({n, lhs, rhs, lhs > rhs});
        return lhs > rhs;
    };
    const bool e1 = add("eta_over_damping_floor", L(eta),
                        L(8 * (be - 1) / be) / (L(b).pow(1 / (be - 1)) * L(nu).pow(be / (be - 1))));
    const bool e2 = add("nu_over_resolution", L(nu), L(4 * eta * c0 * h * h));
    r.l2_theorem = e1 && e2 && c1 == 0.0 && al > 1 && al < 3 && be > 1 && be < 3 && eta > 0;
    if (c1 != 0.0) r.notes.push_back("L2 bound requires c1 = 0");
    if (h1) {
        const LogReal kc = L(in.cfg.kappa * in.cfg.kappa) * L(in.cfg.C6 * in.cfg.C6) * L(in.cfg.C6beta).pow(4 * be);
        const bool e3 = add("eta_over_Z", L(eta),
                            L(32 * eta * eta * c0 * h * h / nu) + L(4.0) * h1->Ztilde1 + L(16384.0) * kc * L(l / nu) * m.M3);
        const bool e4 = add("nu2_over_c1_resolution", L(nu * nu),
                            L(32 * c1 / 7 * std::pow(h, 4) * eta * (nu + 8 * eta * l * l) / (l * l)));
        r.h1_theorem = e1 && e2 && e3 && e4;
    } else {
        r.notes.push_back("H1 bounds need 1 < alpha, beta < 2");
    }
    return r;
}

struct BoundsReport {
    BoundsInputs inputs;
    MLadder ladder;
    bool have_l2_constants = false, have_h1_constants = false;
    Thm31Constants thm31;
    Thm3233Constants thm32;
    HypothesisReport hypotheses;
    std::vector<std::string> notes;  ///< literal-transcription and availability remarks

    /// (name, value, available) in report order.
    std::vector<std::tuple<std::string, LogReal, bool>> entries() const {
        const auto& m = ladder;
        const bool late = m.late_time_bounds;
        return {{"K", m.K, true},           {"M1", m.M1, true},       {"Mtilde", m.Mtilde, true},
                {"M2", m.M2, true},         {"M3", m.M3, true},       {"M4", m.M4, true},
                {"M5", m.M5, late},          {"M6", m.M6, late},        {"M7", m.M7, late},
                {"M8", m.M8, late},          {"K2", m.K2, late},        {"Wexp", m.corr43, inputs.q.eta > 0},
                {"A0", thm31.A0, have_l2_constants}, {"A1", thm31.A1, have_l2_constants},
                {"coef_alpha", thm31.coef_alpha, have_l2_constants}, {"coef_a", thm31.coef_a, have_l2_constants},
                {"B", thm32.B, have_h1_constants}, {"C", thm32.C, have_h1_constants}, {"D", thm32.D, have_h1_constants},
                {"Ctilde", thm32.Ctilde, have_h1_constants && late}, {"Dtilde", thm32.Dtilde, have_h1_constants && late},
                {"Ztilde1", thm32.Ztilde1, have_h1_constants}, {"H", thm32.H, have_h1_constants},
                {"Z3", thm32.Z3, have_h1_constants}, {"Z5", thm32.Z5, have_h1_constants}};
    }
};

inline BoundsReport evaluate_bounds(const BoundsInputs& in) {
    BoundsReport r;
    r.inputs = in;
    r.ladder = eval_M_ladder(in);
    const double al = in.p.alpha, be = in.q.beta;
    if (!r.ladder.late_time_bounds) r.notes.push_back("M5-M8 and K2 unavailable: they need 1 < alpha < 2");
    if (in.q.eta > 0 && al > 1 && al < 3 && be > 1 && be < 3) {
        r.thm31 = eval_thm31_constants(in, r.ladder);
        r.have_l2_constants = true;
        r.notes.push_back("A1 bracket uses M2^7 while A0 uses (M2 + M1/l^2)^5; transcribed literally");
    } else {
        r.notes.push_back("A0/A1 unavailable: need eta > 0 and 1 < alpha, beta < 3");
    }
    if (in.q.eta > 0 && al > 1 && al < 2 && be > 1 && be < 2) {
        r.thm32 = eval_thm32_33_constants(in, r.ladder);
        r.have_h1_constants = true;
        r.notes.push_back("Ztilde1 second term lacks the 1/l factor of its time-dependent form; transcribed literally");
        r.notes.push_back("Ztilde1 fifth term read as (4 l^2 H)^(2 beta); transcribed literally");
        if (!r.thm32.B.representable()) r.notes.push_back("B overflows double range; reported in log10 form");
    } else {
        r.notes.push_back("B, C, D, Ctilde, Dtilde, Ztilde1, H unavailable: need eta > 0 and 1 < alpha, beta < 2");
    }
    if (r.ladder.late_time_bounds) {
        r.notes.push_back("M5 and M6 differ in the M1 M2 term (1/(l^2 nu) vs 1/(l nu)); transcribed literally");
        r.notes.push_back("M8 bounds ||Au|| (not squared) and ends with 2/nu ||f|| unsquared; transcribed literally");
    }
    r.hypotheses = check_hypotheses(in, r.ladder, r.have_h1_constants ? &r.thm32 : nullptr);
    return r;
}

/// Flat key = value serialization; values beyond double range are written
/// as mantissa e exponent, and every constant also gets a log10 entry.
inline void write_bounds_kv(std::ostream& os, const BoundsReport& r) {
    const auto& in = r.inputs;
    os << "nu = " << fmt17(in.p.nu) << "\nl = " << fmt17(in.p.l) << "\nalpha = " << fmt17(in.p.alpha)
       << "\na_tilde = " << fmt17(in.p.a_tilde) << "\na = " << fmt17(in.p.a()) << "\nbeta = " << fmt17(in.q.beta)
       << "\nb_tilde = " << fmt17(in.q.b_tilde) << "\neta = " << fmt17(in.q.eta) << "\nh = " << fmt17(in.q.interpolant.h)
       << "\nc0 = " << fmt17(in.q.interpolant.c0) << "\nc1 = " << fmt17(in.q.interpolant.c1) << "\nM = " << fmt17(in.M)
       << "\nkappa = " << fmt17(in.cfg.kappa) << "\nf_norm = " << fmt17(in.cfg.f_norm)
       << "\nft_norm = " << fmt17(in.cfg.ft_norm) << "\n";
    for (const auto& [name, v, ok] : r.entries()) {
        if (!ok) {
            os << name << " = unavailable\n";
            continue;
        }
        os << name << " = " << v.str() << "\n" << name << ".log10 = " << fmt17(v.log10()) << "\n";
    }
    for (const auto& h : r.hypotheses.items)
        os << "hyp." << h.name << " = " << (h.holds ? "pass" : "fail") << " (" << h.lhs.str() << " > " << h.rhs.str()
           << ")\n";
    os << "hyp.l2_theorem = " << (r.hypotheses.l2_theorem ? "pass" : "fail") << "\n";
    os << "hyp.h1_theorem = " << (r.hypotheses.h1_theorem ? "pass" : "fail") << "\n";
    for (std::size_t i = 0; i < r.notes.size(); ++i) os << "note." << i << " = " << r.notes[i] << "\n";
}

inline void write_bounds_csv(std::ostream& os, const BoundsReport& r) {
    os << "name,value,log10,available\n";
    for (const auto& [name, v, ok] : r.entries())
        os << name << "," << (ok ? v.str() : "") << "," << (ok ? fmt17(v.log10()) : "") << "," << (ok ? 1 : 0) << "\n";
}

/// A parameter point where the L2-bound hypotheses hold but the H1-bound
/// ones fail. Scans eta upward and h = l/2^k downward from the inputs.
struct HypothesisGap {
    bool found = false;
    double eta = 0, h = 0;
    HypothesisReport report;
};

inline HypothesisGap find_hypothesis_gap(BoundsInputs in, int max_eta_doublings = 12, int max_h_halvings = 12) {
    HypothesisGap gap;
    const double eta0 = in.q.eta > 0 ? in.q.eta : 1.0;
    for (int i = 0; i <= max_eta_doublings; ++i) {
        in.q.eta = eta0 * std::ldexp(1.0, i);
        for (int k = 1; k <= max_h_halvings; ++k) {
            in.q.interpolant.h = in.p.l * std::ldexp(1.0, -k);
            const auto m = eval_M_ladder(in);
            const bool h1_ok = in.p.alpha > 1 && in.p.alpha < 2 && in.q.beta > 1 && in.q.beta < 2;
            Thm3233Constants c;
            if (h1_ok) c = eval_thm32_33_constants(in, m);
            auto rep = check_hypotheses(in, m, h1_ok ? &c : nullptr);
            if (rep.l2_theorem && !rep.h1_theorem) {
                gap = {true, in.q.eta, in.q.interpolant.h, std::move(rep)};
                return gap;
            }
        }
    }
    return gap;
}

/// Result of checking one a-priori estimate against a trajectory.
struct EstimateVerdict {
    std::string name;
    double max_ratio = 0;     ///< max measured / bound over the checked samples
    double measured = 0;      ///< measured value at the worst sample
    double bound = 0;         ///< bound at the worst sample
    std::size_t checked = 0;  ///< number of samples (or windows) compared
    bool holds() const { return max_ratio <= 1.0; }
};

/// Checks every implemented a-priori estimate on a recorded truth trajectory.
/// Integral estimates use the per-step trapezoid integrals carried by the
/// record, compared over every pair of samples r < t.
inline std::vector<EstimateVerdict> verify_apriori(const RunRecord& rec, const BoundsReport& rep) {
    const auto& in = rep.inputs;
    const auto& m = rep.ladder;
    const double nu = in.p.nu, l = in.p.l, al = in.p.alpha, a = in.p.a();
    const double F2 = in.cfg.f_norm * in.cfg.f_norm;
    const double L1 = l * l / nu, L2 = 2 * l * l / nu;
    const double tol = 1e-9;
    std::vector<EstimateVerdict> out;
    const auto& rows = rec.rows;
    if (rows.empty()) return out;
    const double u0sq = rows.front().u_l2 * rows.front().u_l2;
    const double gu0sq = rows.front().u_h1 * rows.front().u_h1;
    const double K = m.K.value();

    auto check = [](EstimateVerdict& v, double measured, double bound) {
        ++v.checked;
        const double ratio = bound > 0 ? measured / bound : (measured > 0 ? INFINITY : 0.0);
        if (ratio > v.max_ratio || v.checked == 1) {
            v.max_ratio = std::max(v.max_ratio, ratio);
            v.measured = measured;
            v.bound = bound;
        }
    };

    EstimateVerdict l2decay{"l2_decay"}, m1{"M1_uniform"}, m2{"M2_uniform"}, grad_late{"grad_late"},
        grad_early{"grad_early"};
    for (const auto& r : rows) {
        const double u2 = r.u_l2 * r.u_l2, g2 = r.u_h1 * r.u_h1;
        check(l2decay, u2, std::exp(-2 * nu * r.t / (l * l)) * u0sq + L1 * K);
        check(m1, u2, m.M1.value());
        check(m2, g2, m.M2.value());
        const double nak = std::pow(nu, (2 * al - 1) / (al - 1)) * std::pow(a, 1 / (al - 1));
        if (r.t >= L1 - tol) {
            const double b = (1 / (2 * l * l) + 1 / (2 * nak)) * std::exp(-2 * nu * (r.t - L1) / (l * l)) * u0sq +
                             K * (1.5 / nu + 1.5 * l * l / (std::pow(nu, (3 * al - 2) / (al - 1)) * std::pow(a, 1 / (al - 1)))) +
                             l * l / (nu * nu) * F2;
            check(grad_late, g2, b);
        }
        if (r.t <= L1 + tol) {
            const double b = gu0sq +
                             1 / (std::pow(nu, al / (al - 1)) * std::pow(a, 1 / (al - 1))) *
                                 (std::pow(l, 4) / std::pow(nu, 3) * F2 +
                                  4 * std::pow(l, (3 * al - 2) / al) / (std::pow(nu, (al - 1) / al) * std::pow(a, 1 / al))) +
                             l * l / (nu * nu) * F2;
            check(grad_early, g2, b);
        }
    }
    // Per-step maxima of the uniform bounds catch excursions between samples.
    if (rec.steps > 0) {
        check(m1, rec.max_u_l2_sq, m.M1.value());
        check(m2, rec.max_u_h1_sq, m.M2.value());
    }
    out.insert(out.end(), {l2decay, m1, m2});
    if (grad_late.checked) out.push_back(grad_late);
    if (grad_early.checked) out.push_back(grad_early);

    EstimateVerdict lp_int{"lp_integral"}, lp_m4{"lp_integral_M4"}, a_int{"A_integral"}, a_m3{"A_integral_M3"};
    const double nak = std::pow(nu, (2 * al - 1) / (al - 1)) * std::pow(a, 1 / (al - 1));
    const double M4 = m.M4.value(), M3 = m.M3.value(), M1v = m.M1.value(), M2v = m.M2.value();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r0 = rows[i];
        const double ur2 = r0.u_l2 * r0.u_l2, gr2 = r0.u_h1 * r0.u_h1;
        for (std::size_t j = i + 1; j < rows.size(); ++j) {
            const auto& r1 = rows[j];
            const double dt = r1.t - r0.t;
            const double lp = r1.int_lp - r0.int_lp, A = r1.int_A_sq - r0.int_A_sq, gi = r1.int_grad_sq - r0.int_grad_sq;
            check(lp_int, lp, ur2 / a + M4 * dt);
            check(lp_m4, lp, M1v / a + M4 * dt);
            check(a_int, A, 2 / nu * gr2 + 2 / nak * gi + 4 * dt / (nu * nu) * F2);
            check(a_m3, A, 2 / nu * M2v + dt * M3);
        }
    }
    if (lp_int.checked) out.insert(out.end(), {lp_int, lp_m4, a_int, a_m3});

    if (in.q.eta > 0 && rec.weight_eta == in.q.eta) {
        EstimateVerdict w{"A_weighted_integral"};
        for (const auto& r : rows) check(w, r.corr43, m.corr43.value());
        out.push_back(w);
    }

    if (m.late_time_bounds) {
        EstimateVerdict m5{"M5_lp_late"}, m6{"M6_ut_window"}, m7{"M7_ut_late"}, m8{"M8_A_late"};
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& r = rows[i];
            if (r.t >= L1 - tol) check(m5, std::pow(r.u_lp, 2 * al + 2), m.M5.value());
            if (r.t >= L2 - tol) {
                check(m7, r.ut_l2 * r.ut_l2, m.M7.value());
                check(m8, r.u_A, m.M8.value());
            }
            // Window [t, t + l^2/nu] widened to the next sample: a larger window
            // only increases the integral.
            if (r.t >= L1 - tol) {
                auto it = std::lower_bound(rows.begin() + i, rows.end(), r.t + L1 - tol,
                                           [](const RecordRow& x, double v) { return x.t < v; });
                if (it != rows.end()) check(m6, it->int_ut_sq - r.int_ut_sq, m.M6.value());
            }
        }
        if (rec.steps > 0 && rec.max_lp_pow_late > 0) check(m5, rec.max_lp_pow_late, m.M5.value());
        if (rec.steps > 0 && rec.max_ut_sq_late > 0) check(m7, rec.max_ut_sq_late, m.M7.value());
        if (rec.steps > 0 && rec.max_uA_late > 0) check(m8, rec.max_uA_late, m.M8.value());
        for (auto* v : {&m5, &m6, &m7, &m8})
            if (v->checked) out.push_back(*v);
    }
    return out;
}

inline void write_verdicts_csv(std::ostream& os, const std::vector<EstimateVerdict>& v) {
    os << "estimate,max_ratio,measured,bound,checked,verdict\n";
    for (const auto& e : v)
        os << e.name << "," << fmt17(e.max_ratio) << "," << fmt17(e.measured) << "," << fmt17(e.bound) << ","
           << e.checked << "," << (e.holds() ? "HOLDS" : "FAILS") << "\n";
}

} // namespace bfda
