#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "config.hpp"
#include "properties.hpp"
#include "snapshot.hpp"

namespace bfda {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitBlowUp = 3, kExitProperty = 4 };

/// Analysis of one coupled (or truth-only) run.
struct RunOutcome {
    RunRecord record;
    bool fitted = false;
    DecayFit fit;                 ///< on ||g||^2
    double plateau_l2 = 0;        ///< sqrt of the squared-error plateau
    double plateau_h1 = 0;        ///< plateau of ||grad g||^2 + ||g||^2 / l^2
    double initial_error = 0;     ///< ||g(0)||
    double final_error = 0;       ///< ||g(T)||
    double final_rel = 0;         ///< ||g(T)|| / ||u(T)||
    bool synchronized = false;    ///< plateau below 1e-8 of the initial error
    bool no_decay = false;        ///< error never fell to 1e-6 of its initial size
    BoundsReport bounds;
    std::vector<EstimateVerdict> verdicts;
    bool apriori_hold = true;
};

inline void write_preamble(std::ostream& os, const ExperimentConfig& c,
                           const std::vector<std::pair<std::string, std::string>>& extra = {}) {
    for (const auto& [k, v] : config_pairs(c)) os << "# " << k << " = " << v << "\n";
    for (const auto& [k, v] : extra) os << "# " << k << " = " << v << "\n";
}

inline Forcing make_forcing(const ExperimentConfig& c, const Grid& g) { return Forcing(g, c.forcing); }

inline SpinUpResult prepare_truth(const ExperimentConfig& c) {
    const Grid g = c.grid();
    const Forcing f = make_forcing(c, g);
    return spin_up(g, c.physical, f, c.seed, c.ic, c.T_spin, c.stepper);
}

inline BoundsInputs bounds_inputs_for(const ExperimentConfig& c, double measured_M) {
    const double M = c.bounds_M > 0 ? c.bounds_M : measured_M;
    return resolve_bounds_inputs(c.physical, c.assim, c.bounds, c.forcing, M > 0 ? M : 1e-300, c.seed);
}

/// Runs one point from a prepared truth state and analyses it.
inline RunOutcome execute_point(const ExperimentConfig& c, const SpectralField& u0) {
    const Grid& g = u0.grid();
    const Forcing f = make_forcing(c, g);
    RunOutcome out;
    out.bounds = evaluate_bounds(bounds_inputs_for(c, m_value(u0)));
    RunOptions opt;
    opt.T = c.T;
    opt.sample_stride = c.sample_stride;
    opt.stepper = c.stepper;
    opt.weight_eta = c.assim.eta;
    if (out.bounds.have_h1_constants && out.bounds.thm32.H.representable()) opt.exit_threshold = out.bounds.thm32.H.value();
    std::optional<AssimParams> q;
    if (c.assim_enabled) q = c.assim;
    std::optional<SpectralField> w0;
    if (c.w0 == "truth") w0 = u0;
    out.record = run_coupled(c.physical, q, f, u0, w0, opt);
    auto& rec = out.record;
    for (const auto& [k, v] : config_pairs(c)) rec.add_meta(k, v);
    rec.add_meta("a", fmt17(c.physical.a()));
    rec.add_meta("b", fmt17(c.assim.b(c.physical)));
    rec.add_meta("M", fmt17(rec.M));
    rec.add_meta("M_w0", fmt17(rec.M_w0));
    rec.add_meta("w0_within_M", rec.w0_within_M ? "true" : "false");
    rec.add_meta("steps", std::to_string(rec.steps));
    rec.add_meta("max_abs_energy_residual", fmt17(rec.max_abs_energy_residual));
    rec.add_meta("weight_eta", fmt17(rec.weight_eta));
    rec.add_meta("first_exit_H", fmt17(rec.first_exit_H));
    if (!rec.rows.empty()) {
        out.initial_error = rec.rows.front().g_l2;
        out.final_error = rec.rows.back().g_l2;
        out.final_rel = rec.rows.back().rel_error;
    }
    if (c.assim_enabled && rec.rows.size() >= 10) {
        out.fit = fit_decay_and_plateau(rec);
        out.fitted = true;
        out.plateau_l2 = std::sqrt(out.fit.plateau);
        out.plateau_h1 = h1_plateau(rec);
        out.synchronized = out.initial_error > 0 && out.plateau_l2 <= 1e-8 * out.initial_error;
        double min_err = out.initial_error;
        for (const auto& r : rec.rows) min_err = std::min(min_err, r.g_l2);
        out.no_decay = !out.fit.decaying || min_err > 1e-6 * out.initial_error;
    }
    out.verdicts = verify_apriori(rec, out.bounds);
    for (const auto& v : out.verdicts) out.apriori_hold = out.apriori_hold && v.holds();
    return out;
}

inline void write_summary(std::ostream& os, const RunOutcome& o) {
    os << "rows = " << o.record.rows.size() << "\n";
    os << "steps = " << o.record.steps << "\n";
    os << "M = " << fmt17(o.record.M) << "\n";
    os << "M_w0 = " << fmt17(o.record.M_w0) << "\n";
    os << "w0_within_M = " << (o.record.w0_within_M ? "true" : "false") << "\n";
    os << "initial_error = " << fmt17(o.initial_error) << "\n";
    os << "final_error = " << fmt17(o.final_error) << "\n";
    os << "final_rel_error = " << fmt17(o.final_rel) << "\n";
    os << "fitted = " << (o.fitted ? "true" : "false") << "\n";
    if (o.fitted) {
        os << "decay_rate = " << fmt17(o.fit.lambda) << "\n";
        os << "decay_reference_eta_over_8 = " << fmt17(o.bounds.inputs.q.eta / 8) << "\n";
        os << "decaying = " << (o.fit.decaying ? "true" : "false") << "\n";
        os << "plateau_l2 = " << fmt17(o.plateau_l2) << "\n";
        os << "plateau_h1 = " << fmt17(o.plateau_h1) << "\n";
        os << "synchronized = " << (o.synchronized ? "true" : "false") << "\n";
        os << "no_decay = " << (o.no_decay ? "true" : "false") << "\n";
    }
    os << "max_abs_energy_residual = " << fmt17(o.record.max_abs_energy_residual) << "\n";
    os << "first_exit_H = " << fmt17(o.record.first_exit_H) << "\n";
    os << "hyp.l2_theorem = " << (o.bounds.hypotheses.l2_theorem ? "pass" : "fail") << "\n";
    os << "hyp.h1_theorem = " << (o.bounds.hypotheses.h1_theorem ? "pass" : "fail") << "\n";
    os << "apriori_all_hold = " << (o.apriori_hold ? "true" : "false") << "\n";
}

namespace detail {

inline std::filesystem::path prepare_dir(const std::string& dir) {
    std::filesystem::path p(dir);
    std::filesystem::create_directories(p);
    return p;
}

inline std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream os(p);
    if (!os) throw ConfigError("cannot write '" + p.string() + "'");
    return os;
}

} // namespace detail

/// Writes every output of a run into dir.
inline void write_run_outputs(const std::string& dir, const ExperimentConfig& c, const RunOutcome& o) {
    const auto base = detail::prepare_dir(dir);
    {
        auto os = detail::open_out(base / "run.csv");
        write_record_csv(os, o.record);
    }
    {
        auto os = detail::open_out(base / "bounds.txt");
        write_preamble(os, c);
        write_bounds_kv(os, o.bounds);
    }
    {
        auto os = detail::open_out(base / "bounds.csv");
        write_preamble(os, c);
        write_bounds_csv(os, o.bounds);
    }
    {
        auto os = detail::open_out(base / "apriori.csv");
        write_preamble(os, c);
        write_verdicts_csv(os, o.verdicts);
    }
    {
        auto os = detail::open_out(base / "summary.txt");
        write_preamble(os, c);
        write_summary(os, o);
    }
}

/// spin-up, coupled run, fit, a-priori verification, outputs.
inline int cmd_run(const ExperimentConfig& c, const std::string& out_dir, std::ostream& log) {
    try {
        const auto spun = prepare_truth(c);
        const auto o = execute_point(c, spun.u);
        write_run_outputs(out_dir, c, o);
        Snapshot::write((std::filesystem::path(out_dir) / "truth_initial.bfed").string(), spun.u, 0.0);
        log << "run: " << o.record.rows.size() << " rows, final relative error " << fmt17(o.final_rel) << "\n";
        if (o.fitted)
            log << "run: decay rate " << fmt17(o.fit.lambda) << ", plateau " << fmt17(o.plateau_l2)
                << (o.synchronized ? ", synchronized" : "") << (o.no_decay ? ", no decay" : "") << "\n";
        log << "run: a-priori estimates " << (o.apriori_hold ? "all hold" : "VIOLATED") << "\n";
        return kExitOk;
    } catch (const BlowUp& e) {
        log << "error: " << e.what() << "\n";
        return kExitBlowUp;
    }
}

/// One point of a sweep: the overridden parameters and its outcome.
struct SweepPoint {
    ExperimentConfig cfg;
    double delta_beta = 0, delta_b = 0;  ///< relative mismatches beta/alpha - 1, b~/a~ - 1
    bool ok = false;
    std::string status;
    RunOutcome outcome;
    double wall_seconds = 0;
};

inline std::vector<SweepPoint> sweep_points(const ExperimentConfig& c) {
    std::vector<SweepPoint> pts(1, SweepPoint{c});
    auto expand = [&](const std::vector<double>& axis, auto apply) {
        if (axis.empty()) return;
        std::vector<SweepPoint> next;
        for (const auto& p : pts)
            for (double v : axis) {
                SweepPoint q = p;
                apply(q, v);
                next.push_back(std::move(q));
            }
        pts = std::move(next);
    };
    expand(c.sweep.beta, [](SweepPoint& p, double v) { p.cfg.assim.beta = v; });
    expand(c.sweep.beta_delta, [&](SweepPoint& p, double v) { p.cfg.assim.beta = c.physical.alpha * (1 + v); });
    expand(c.sweep.b_tilde, [](SweepPoint& p, double v) { p.cfg.assim.b_tilde = v; });
    expand(c.sweep.b_tilde_delta, [&](SweepPoint& p, double v) { p.cfg.assim.b_tilde = c.physical.a_tilde * (1 + v); });
    expand(c.sweep.eta, [](SweepPoint& p, double v) { p.cfg.assim.eta = v; });
    expand(c.sweep.h, [](SweepPoint& p, double v) {
        const auto kind = p.cfg.assim.interpolant.kind;
        p.cfg.assim.interpolant = InterpolantSpec::declared(kind, v);
    });
    for (auto& p : pts) {
        p.cfg.sweep = SweepAxes{};
        p.delta_beta = p.cfg.assim.beta / c.physical.alpha - 1;
        p.delta_b = p.cfg.assim.b_tilde / c.physical.a_tilde - 1;
    }
    return pts;
}

/// Least-squares slope and intercept of log y on log x.
struct LogLogFit {
    double slope = 0, intercept = 0;
    std::size_t points = 0;
};

inline LogLogFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
    LogLogFit f;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0 && y[i] > 0)) continue;
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++f.points;
    }
    if (f.points < 2) return f;
    const double n = double(f.points);
    f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    f.intercept = (sy - f.slope * sx) / n;
    return f;
}

/// Runs points in parallel over `threads` workers; results keep point order.
inline void run_sweep_points(std::vector<SweepPoint>& pts, const SpectralField& u0, int threads) {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= pts.size()) return;
            auto& p = pts[i];
            const auto t0 = std::chrono::steady_clock::now();
            try {
                p.outcome = execute_point(p.cfg, u0);
                p.ok = true;
                p.status = "ok";
            } catch (const BlowUp& e) {
                p.status = std::string("blow-up: ") + e.what();
            } catch (const std::exception& e) {
                p.status = std::string("error: ") + e.what();
            }
            p.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
    };
    const int n = std::max(1, std::min<int>(threads, static_cast<int>(pts.size())));
    std::vector<std::thread> pool;
    for (int i = 1; i < n; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
}

inline std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
}

/// Writes summary.csv, regression.csv, sweep_timing.csv and one record per point.
inline void write_sweep_outputs(const std::string& dir, const ExperimentConfig& c, const std::vector<SweepPoint>& pts) {
    const auto base = detail::prepare_dir(dir);
    {
        auto os = detail::open_out(base / "summary.csv");
        write_preamble(os, c);
        os << "point,beta,b_tilde,eta,h,delta_beta,delta_b,decay_rate,decaying,plateau_l2,plateau_h1,final_rel_error,"
              "hyp_l2,hyp_h1,apriori_hold,status\n";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const auto& p = pts[i];
            const auto& o = p.outcome;
            os << i << "," << fmt17(p.cfg.assim.beta) << "," << fmt17(p.cfg.assim.b_tilde) << "," << fmt17(p.cfg.assim.eta)
               << "," << fmt17(p.cfg.assim.interpolant.h) << "," << fmt17(p.delta_beta) << "," << fmt17(p.delta_b) << ",";
            if (p.ok)
                os << fmt17(o.fit.lambda) << "," << (o.fit.decaying ? 1 : 0) << "," << fmt17(o.plateau_l2) << ","
                   << fmt17(o.plateau_h1) << "," << fmt17(o.final_rel) << "," << (o.bounds.hypotheses.l2_theorem ? 1 : 0)
                   << "," << (o.bounds.hypotheses.h1_theorem ? 1 : 0) << "," << (o.apriori_hold ? 1 : 0) << ",";
            else
                os << ",,,,,,,,";
            os << csv_quote(p.status) << "\n";
        }
    }
    {
        auto os = detail::open_out(base / "sweep_timing.csv");
        os << "point,wall_seconds\n";
        for (std::size_t i = 0; i < pts.size(); ++i) os << i << "," << fmt17(pts[i].wall_seconds) << "\n";
    }
    {
        // Plateau against each swept mismatch, grouped by the other parameters.
        auto os = detail::open_out(base / "regression.csv");
        write_preamble(os, c);
        os << "axis,group,slope,intercept,points\n";
        auto regress = [&](const std::string& axis, auto mismatch, auto group_key) {
            std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> groups;
            for (const auto& p : pts) {
                if (!p.ok) continue;
                auto& gp = groups[group_key(p)];
                gp.first.push_back(mismatch(p));
                gp.second.push_back(p.outcome.plateau_l2);
            }
            for (const auto& [key, xy] : groups) {
                const auto f = loglog_fit(xy.first, xy.second);
                os << axis << "," << csv_quote(key) << "," << fmt17(f.slope) << "," << fmt17(f.intercept) << "," << f.points
                   << "\n";
            }
        };
        auto key = [](const SweepPoint& p, bool with_beta, bool with_b) {
            std::string k = "eta=" + fmt17(p.cfg.assim.eta) + " h=" + fmt17(p.cfg.assim.interpolant.h);
            if (with_beta) k += " beta=" + fmt17(p.cfg.assim.beta);
            if (with_b) k += " b_tilde=" + fmt17(p.cfg.assim.b_tilde);
            return k;
        };
        if (!c.sweep.b_tilde.empty() || !c.sweep.b_tilde_delta.empty())
            regress("b_tilde", [](const SweepPoint& p) { return std::abs(p.delta_b); },
                    [&](const SweepPoint& p) { return key(p, true, false); });
        if (!c.sweep.beta.empty() || !c.sweep.beta_delta.empty())
            regress("beta", [](const SweepPoint& p) { return std::abs(p.delta_beta); },
                    [&](const SweepPoint& p) { return key(p, false, true); });
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (!pts[i].ok) continue;
        auto os = detail::open_out(base / ("point_" + std::to_string(i) + ".csv"));
        write_record_csv(os, pts[i].outcome.record);
    }
}

inline int cmd_sweep(const ExperimentConfig& c, const std::string& out_dir, int threads, std::ostream& log) {
    if (!c.sweep.any()) throw ConfigError("sweep needs at least one non-empty sweep.* axis");
    std::optional<SpinUpResult> spun;
    try {
        spun = prepare_truth(c);
    } catch (const BlowUp& e) {
        log << "error: spin-up " << e.what() << "\n";
        return kExitBlowUp;
    }
    auto pts = sweep_points(c);
    run_sweep_points(pts, spun->u, threads);
    write_sweep_outputs(out_dir, c, pts);
    std::size_t failed = 0;
    for (const auto& p : pts) failed += !p.ok;
    log << "sweep: " << pts.size() << " points, " << failed << " failed\n";
    return kExitOk;
}

/// Property suite; returns 4 naming the first failing property.
inline int cmd_verify(std::ostream& log, std::uint64_t seed = 12345, double leray_fault = 0.0) {
    testing::inject_leray_fault(leray_fault);
    const auto results = run_property_suite(seed);
    testing::inject_leray_fault(0.0);
    const PropertyResult* first_fail = nullptr;
    for (const auto& r : results) {
        log << (r.passed ? "ok   " : "FAIL ") << r.name << "  measured " << fmt17(r.measured) << "  tolerance "
            << fmt17(r.tolerance) << (r.detail.empty() ? "" : "  " + r.detail) << "\n";
        if (!r.passed && !first_fail) first_fail = &r;
    }
    if (first_fail) {
        log << "verify: FAIL (" << first_fail->name << ")\n";
        return kExitProperty;
    }
    log << "verify: PASS\n";
    return kExitOk;
}

/// Evaluates the bounds report without simulating. M defaults to the
/// value of the (unevolved) random initial field.
inline int cmd_bounds(const ExperimentConfig& c, const std::string& out_dir, std::ostream& log) {
    double M = c.bounds_M;
    if (!(M > 0)) {
        auto rng = derived_rng(c.seed, 0x1c);
        M = m_value(random_field(c.grid(), c.ic, rng));
    }
    ExperimentConfig cc = c;
    cc.bounds_M = M;
    const auto in = bounds_inputs_for(cc, M);
    const auto rep = evaluate_bounds(in);
    const auto gap = find_hypothesis_gap(in);
    const auto base = detail::prepare_dir(out_dir);
    {
        auto os = detail::open_out(base / "bounds.txt");
        write_preamble(os, cc);
        write_bounds_kv(os, rep);
        os << "gap.found = " << (gap.found ? "true" : "false") << "\n";
        if (gap.found) os << "gap.eta = " << fmt17(gap.eta) << "\ngap.h = " << fmt17(gap.h) << "\n";
    }
    {
        auto os = detail::open_out(base / "bounds.csv");
        write_preamble(os, cc);
        write_bounds_csv(os, rep);
    }
    log << "bounds: M = " << fmt17(M) << ", L2 hypotheses " << (rep.hypotheses.l2_theorem ? "pass" : "fail")
        << ", H1 hypotheses " << (rep.hypotheses.h1_theorem ? "pass" : "fail") << "\n";
    return kExitOk;
}

} // namespace bfda
