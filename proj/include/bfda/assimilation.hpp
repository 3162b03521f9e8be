#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "timestepper.hpp"

namespace bfda {

struct CoupledState {
    double t = 0.0;
    SpectralField u;
    SpectralField w;
};

/// One sampled row of a run. Cumulative integrals run from the start of the
/// run to t and are accumulated every step by the trapezoid rule.
struct RecordRow {
    double t = 0;
    double u_l2 = 0;          ///< ||u||_{L2}
    double u_h1 = 0;          ///< ||grad u||_{L2}
    double u_lp = 0;          ///< ||u||_{L^{2 alpha + 2}}
    double u_A = 0;           ///< ||A u||_{L2}
    double g_l2 = 0;          ///< ||w - u||_{L2}
    double g_h1 = 0;          ///< ||grad (w - u)||_{L2}
    double h1_error = 0;      ///< ||grad g||^2 + ||g||^2 / l^2
    double energy_residual = 0;  ///< discrete energy-balance residual of the step ending at t
    double ut_l2 = 0;         ///< ||u_t||_{L2}
    double w_l2 = 0;          ///< ||w||_{L2}
    double rel_error = 0;     ///< ||g|| / ||u||
    double int_grad_sq = 0;   ///< int_0^t ||grad u||^2
    double int_lp = 0;        ///< int_0^t ||u||^{2 alpha + 2}_{L^{2 alpha + 2}}
    double int_A_sq = 0;      ///< int_0^t ||A u||^2
    double int_ut_sq = 0;     ///< int_0^t ||u_t||^2
    double corr43 = 0;        ///< int_0^t exp(eta (s - t) / 8) ||A u(s)||^2 ds
};

inline const std::vector<std::string>& record_columns() {
    static const std::vector<std::string> cols{
        "t",         "u_l2",  "u_h1",      "u_lp",        "u_A",    "g_l2",      "g_h1",      "h1_error",
        "energy_residual", "ut_l2", "w_l2", "rel_error", "int_grad_sq", "int_lp", "int_A_sq", "int_ut_sq",
        "corr43"};
    return cols;
}

inline std::vector<double> row_values(const RecordRow& r) {
    return {r.t,     r.u_l2,      r.u_h1,        r.u_lp,   r.u_A,     r.g_l2,     r.g_h1,  r.h1_error, r.energy_residual,
            r.ut_l2, r.w_l2,      r.rel_error,   r.int_grad_sq, r.int_lp, r.int_A_sq, r.int_ut_sq, r.corr43};
}

struct RunRecord {
    std::vector<std::pair<std::string, std::string>> metadata;
    std::vector<RecordRow> rows;
    double max_abs_energy_residual = 0;
    double M = 0;               ///< ||grad u(0)||^2 + ||u(0)||^2 / l^2
    double M_w0 = 0;            ///< same quantity for w(0)
    bool w0_within_M = true;
    double max_u_h1_sq = 0;     ///< over every step, not just samples
    double max_u_l2_sq = 0;
    double max_u_lp_pow = 0;    ///< max ||u||^{2 alpha + 2}_{L^{2 alpha + 2}}
    double max_ut_sq_late = 0;  ///< max ||u_t||^2 for t >= 2 l^2 / nu
    double max_uA_late = 0;     ///< max ||A u|| for t >= 2 l^2 / nu
    double max_lp_pow_late = 0; ///< max ||u||^{2 alpha + 2} for t >= l^2 / nu
    double weight_eta = 0;      ///< decay rate used for the corr43 column
    double first_exit_H = -1;   ///< first time ||grad g||^2 + ||g||^2/l^2 exceeds the threshold (diagnostic)
    std::size_t steps = 0;

    void add_meta(const std::string& k, const std::string& v) { metadata.emplace_back(k, v); }
};

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// CSV with a '#'-prefixed metadata preamble, a header row and one row per sample.
inline void write_record_csv(std::ostream& os, const RunRecord& rec) {
    for (const auto& [k, v] : rec.metadata) os << "# " << k << " = " << v << "\n";
    const auto& cols = record_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << "\n";
    for (const auto& r : rec.rows) {
        const auto v = row_values(r);
        for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << fmt17(v[i]);
        os << "\n";
    }
}

/// M = ||grad u||^2 + ||u||^2 / l^2
inline double m_value(const SpectralField& u) {
    const double l = u.grid().length();
    return h1_seminorm_sq(u) + l2_norm_sq(u) / (l * l);
}

/// Pointwise diagnostics of the truth state used for records and the energy balance.
struct TruthDiagnostics {
    double l2_sq = 0, grad_sq = 0, A_sq = 0, lp_pow = 0, ut_sq = 0;
    double power = 0;      ///< (f,u) - nu ||grad u||^2 - a ||u||^{2a+2}
    double power_dt = 0;   ///< time derivative of power along the solution
};

inline TruthDiagnostics truth_diagnostics(const SpectralField& u, double t, const PhysicalParams& p, const Forcing& f) {
    const Grid& g = u.grid();
    TruthDiagnostics d;
    const double a = p.a(), alpha = p.alpha;
    d.l2_sq = l2_norm_sq(u);
    d.grad_sq = h1_seminorm_sq(u);
    d.A_sq = a_norm_sq(u);
    const auto ut = rhs_truth(u, t, p, f);
    d.ut_sq = l2_norm_sq(ut);
    const auto up = backward_transform(u);
    const auto tp = backward_transform(ut);
    // |u|^{2 alpha + 2} and |u|^{2 alpha} u . u_t by collocation; the latter equals the
    // spectral pairing with the projected, dealiased G_alpha(u) because u_t is solenoidal
    // and band-limited.
    double lp = 0, gut = 0;
    const auto ux = up.component(0), uy = up.component(1), uz = up.component(2);
    const auto tx = tp.component(0), ty = tp.component(1), tz = tp.component(2);
    for (std::size_t i = 0; i < g.points(); ++i) {
        const double m2 = ux[i] * ux[i] + uy[i] * uy[i] + uz[i] * uz[i];
        const double pw = std::pow(m2, alpha);
        lp += pw * m2;
        gut += pw * (ux[i] * tx[i] + uy[i] * ty[i] + uz[i] * tz[i]);
    }
    d.lp_pow = lp * g.cell_volume();
    gut *= g.cell_volume();
    double fu = 0, fut = 0, ftu = 0;
    if (f.spec().kind != ForcingKind::Zero) {
        fu = f.modulation(t) * inner(f.pattern(), u);
        fut = f.modulation(t) * inner(f.pattern(), ut);
        ftu = f.modulation_dt(t) * inner(f.pattern(), u);
    }
    d.power = fu - p.nu * d.grad_sq - a * d.lp_pow;
    d.power_dt = ftu + fut - 2 * p.nu * inner(apply_A(u), ut) - a * (2 * alpha + 2) * gut;
    return d;
}

struct RunOptions {
    double T = 0.0;
    int sample_stride = 1;
    StepperConfig stepper;
    double exit_threshold = INFINITY;  ///< H-ball radius for the first-exit diagnostic
    double weight_eta = -1;            ///< rate of the weighted ||Au||^2 integral; negative means the run's eta
};

/// Advances the truth system (and, with assimilation parameters, the nudged
/// system in lockstep) to time T, recording every sample_stride steps.
/// The truth integrator never sees w.
inline RunRecord run_coupled(const PhysicalParams& p, const std::optional<AssimParams>& q, const Forcing& f,
                             const SpectralField& u0, const std::optional<SpectralField>& w0_in, const RunOptions& opt) {
    if (!(opt.T >= 0)) throw InvalidInput("run: T must be nonnegative");
    if (opt.sample_stride < 1) throw InvalidInput("run: sample_stride must be >= 1");
    const Grid& g = u0.grid();
    if (q) check_compatible(q->interpolant, g);
    SpectralField w0 = w0_in ? *w0_in : SpectralField(g);
    require_same_grid(g, w0.grid(), "run_coupled");

    RunRecord rec;
    rec.M = m_value(u0);
    rec.M_w0 = q ? m_value(w0) : 0.0;
    rec.w0_within_M = rec.M_w0 <= rec.M;
    if (opt.T == 0.0) return rec;

    const double l = g.length();
    const double eta = opt.weight_eta >= 0 ? opt.weight_eta : (q ? q->eta : 0.0);
    rec.weight_eta = eta;
    const double t_late1 = l * l / p.nu, t_late2 = 2 * l * l / p.nu;
    // Fixed stepping uses dt = T / ceil(T / dt) so the run ends exactly at T;
    // adaptive stepping takes stable_dt each step and clips the last one.
    const bool adaptive = opt.stepper.adaptive;
    const long nsteps = adaptive ? std::numeric_limits<long>::max()
                                 : static_cast<long>(std::ceil(opt.T / opt.stepper.dt - 1e-9));
    const double dt_fixed = adaptive ? opt.stepper.dt : opt.T / nsteps;

    FieldPack<2> s{u0, std::move(w0)};
    double t = 0.0;
    auto diag = truth_diagnostics(s[0], t, p, f);
    RecordRow acc;  // running integrals
    auto make_row = [&](const TruthDiagnostics& d, double residual) {
        RecordRow r = acc;
        r.t = t;
        r.u_l2 = std::sqrt(d.l2_sq);
        r.u_h1 = std::sqrt(d.grad_sq);
        r.u_lp = std::pow(d.lp_pow, 1.0 / (2 * p.alpha + 2));
        r.u_A = std::sqrt(d.A_sq);
        r.ut_l2 = std::sqrt(d.ut_sq);
        r.energy_residual = residual;
        if (q) {
            const auto gd = s[1] - s[0];
            const double g2 = l2_norm_sq(gd), gh = h1_seminorm_sq(gd);
            r.g_l2 = std::sqrt(g2);
            r.g_h1 = std::sqrt(gh);
            r.h1_error = gh + g2 / (l * l);
            r.w_l2 = std::sqrt(l2_norm_sq(s[1]));
            r.rel_error = r.u_l2 > 0 ? r.g_l2 / r.u_l2 : 0.0;
        }
        return r;
    };
    auto track = [&](const TruthDiagnostics& d, const RecordRow& row) {
        rec.max_u_h1_sq = std::max(rec.max_u_h1_sq, d.grad_sq);
        rec.max_u_l2_sq = std::max(rec.max_u_l2_sq, d.l2_sq);
        rec.max_u_lp_pow = std::max(rec.max_u_lp_pow, d.lp_pow);
        if (t >= t_late1 - 1e-9) rec.max_lp_pow_late = std::max(rec.max_lp_pow_late, d.lp_pow);
        if (t >= t_late2 - 1e-9) {
            rec.max_ut_sq_late = std::max(rec.max_ut_sq_late, d.ut_sq);
            rec.max_uA_late = std::max(rec.max_uA_late, std::sqrt(d.A_sq));
        }
        if (q && rec.first_exit_H < 0 && row.h1_error > opt.exit_threshold) rec.first_exit_H = t;
    };
    {
        const auto row = make_row(diag, 0.0);
        rec.rows.push_back(row);
        track(diag, row);
    }

    for (long n = 1; n <= nsteps; ++n) {
        const double e0 = diag.l2_sq;
        double dt = dt_fixed;
        if (adaptive) {
            dt = stable_dt(s[0], p, opt.stepper, q ? &*q : nullptr);
            if (q) dt = std::min(dt, stable_dt(s[1], p, opt.stepper, &*q));
            if (t + dt > opt.T * (1 - 1e-12)) dt = opt.T - t;
        }
        const bool last = adaptive ? t + dt >= opt.T * (1 - 1e-12) : n == nsteps;
        if (q) {
            step(s, t, dt, p.nu, opt.stepper, coupled_explicit(p, *q, f), {"truth", "assimilated"});
        } else {
            FieldPack<1> one{std::move(s[0])};
            try {
                step(one, t, dt, p.nu, opt.stepper, truth_explicit(p, f), {"truth"});
            } catch (...) {
                s[0] = std::move(one[0]);
                throw;
            }
            s[0] = std::move(one[0]);
        }
        // Sample times are recomputed from n to avoid drift from repeated addition.
        t = last ? opt.T : (adaptive ? t : n * dt);
        const auto next = truth_diagnostics(s[0], t, p, f);
        const double quad = 0.5 * dt * (diag.power + next.power) + dt * dt / 12.0 * (diag.power_dt - next.power_dt);
        const double residual = 0.5 * (next.l2_sq - e0) - quad;
        rec.max_abs_energy_residual = std::max(rec.max_abs_energy_residual, std::abs(residual));
        acc.int_grad_sq += 0.5 * dt * (diag.grad_sq + next.grad_sq);
        acc.int_lp += 0.5 * dt * (diag.lp_pow + next.lp_pow);
        acc.int_A_sq += 0.5 * dt * (diag.A_sq + next.A_sq);
        acc.int_ut_sq += 0.5 * dt * (diag.ut_sq + next.ut_sq);
        const double decay = std::exp(-eta * dt / 8.0);
        acc.corr43 = decay * acc.corr43 + 0.5 * dt * (decay * diag.A_sq + next.A_sq);
        diag = next;
        const bool sample = n % opt.sample_stride == 0 || last;
        if (sample || q) {
            const auto row = make_row(diag, residual);
            track(diag, row);
            if (sample) rec.rows.push_back(row);
        } else {
            track(diag, RecordRow{});
        }
        rec.steps = static_cast<std::size_t>(n);
        if (last) break;
    }
    return rec;
}

struct SpinUpResult {
    SpectralField u;
    double M = 0;
};

/// Random low-mode initial data advanced by the truth system for T_spin.
inline SpinUpResult spin_up(const Grid& g, const PhysicalParams& p, const Forcing& f, std::uint64_t seed,
                            const RandomFieldSpec& ic, double T_spin, const StepperConfig& cfg) {
    if (!(T_spin >= 0)) throw InvalidInput("spin_up: T_spin must be nonnegative");
    auto rng = derived_rng(seed, 0x1c);
    SpectralField u = random_field(g, ic, rng);
    if (T_spin > 0) {
        const long nsteps = static_cast<long>(std::ceil(T_spin / cfg.dt - 1e-9));
        const double dt = T_spin / nsteps;
        double t = 0;
        for (long n = 0; n < nsteps; ++n) step_truth(u, t, dt, p, f, cfg);
    }
    const double M = m_value(u);
    return {std::move(u), M};
}

struct DecayFit {
    double lambda = 0;      ///< fitted decay rate of the series
    double plateau = 0;     ///< median of the final 20% of samples
    bool decaying = false;  ///< false when no decaying segment was found
    std::size_t seg_begin = 0, seg_end = 0;
};

/// Fits y(t) ~ C exp(-lambda t) over the initial transient and reports the
/// long-time plateau. The transient runs from the largest sample up to the
/// first sample within 10x of the plateau.
inline DecayFit fit_decay_and_plateau(const std::vector<double>& t, const std::vector<double>& y) {
    if (t.size() != y.size() || t.size() < 10) throw InvalidInput("fit_decay_and_plateau: need >= 10 samples");
    DecayFit fit;
    const std::size_t n = y.size();
    const std::size_t tail = std::max<std::size_t>(1, n / 5);
    std::vector<double> last(y.end() - tail, y.end());
    std::nth_element(last.begin(), last.begin() + tail / 2, last.end());
    fit.plateau = last[tail / 2];
    if (tail % 2 == 0) {
        const double upper = last[tail / 2];
        std::nth_element(last.begin(), last.begin() + tail / 2 - 1, last.end());
        fit.plateau = 0.5 * (upper + last[tail / 2 - 1]);
    }
    const std::size_t search_end = n - tail;
    std::size_t begin = 0;
    for (std::size_t i = 0; i < search_end; ++i)
        if (y[i] > y[begin]) begin = i;
    std::size_t end = begin;
    while (end < search_end && y[end] > 10 * fit.plateau && y[end] > 0) ++end;
    fit.seg_begin = begin;
    fit.seg_end = end;
    if (end - begin < 3) return fit;
    double st = 0, sl = 0, stt = 0, stl = 0;
    const double m = double(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
        const double lt = std::log(y[i]);
        st += t[i];
        sl += lt;
        stt += t[i] * t[i];
        stl += t[i] * lt;
    }
    const double slope = (m * stl - st * sl) / (m * stt - st * st);
    fit.lambda = -slope;
    fit.decaying = slope < 0;
    return fit;
}

/// Fit on the squared L2 error series of a record.
inline DecayFit fit_decay_and_plateau(const RunRecord& rec) {
    std::vector<double> t, y;
    for (const auto& r : rec.rows) {
        t.push_back(r.t);
        y.push_back(r.g_l2 * r.g_l2);
    }
    return fit_decay_and_plateau(t, y);
}

/// Median of the final 20% of the squared H1-type error column.
inline double h1_plateau(const RunRecord& rec) {
    std::vector<double> t, y;
    for (const auto& r : rec.rows) {
        t.push_back(r.t);
        y.push_back(r.h1_error);
    }
    return fit_decay_and_plateau(t, y).plateau;
}

} // namespace bfda
