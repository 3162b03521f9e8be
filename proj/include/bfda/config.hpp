#pragma once

#include <cerrno>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bounds.hpp"

namespace bfda {

/// Lists of values for the swept parameters. Relative deltas set
/// b_tilde = a_tilde (1 + d) and beta = alpha (1 + d).
struct SweepAxes {
    std::vector<double> beta, beta_delta, b_tilde, b_tilde_delta, eta, h;

    bool any() const {
        return !beta.empty() || !beta_delta.empty() || !b_tilde.empty() || !b_tilde_delta.empty() || !eta.empty() ||
               !h.empty();
    }
    std::size_t points() const {
        std::size_t n = 1;
        for (const auto* v : {&beta, &beta_delta, &b_tilde, &b_tilde_delta, &eta, &h})
            if (!v->empty()) n *= v->size();
        return n;
    }
    bool operator==(const SweepAxes&) const = default;
};

struct ExperimentConfig {
    int n = 32;
    double dealias_fraction = 2.0 / 3.0;
    PhysicalParams physical;
    bool assim_enabled = true;
    AssimParams assim;
    ForcingSpec forcing{ForcingKind::RandomLowMode, 0.2};
    StepperConfig stepper{0.05};
    BoundsConfig bounds;
    double bounds_M = 0.0;  ///< 0: take M from the run's initial state
    RandomFieldSpec ic{4, 2.0, 0.3, 1};
    double T = 50.0;
    double T_spin = 50.0;
    int sample_stride = 10;
    std::uint64_t seed = 1;
    std::string w0 = "zero";  ///< zero | truth
    std::string output = "out";
    SweepAxes sweep;

    bool operator==(const ExperimentConfig&) const = default;

    Grid grid() const { return Grid(physical.l, n, dealias_fraction); }
};

namespace detail {

inline double parse_double(const std::string& key, const std::string& v) {
    const char* s = v.c_str();
    char* end = nullptr;
    errno = 0;
    const double d = std::strtod(s, &end);
    if (end == s || *end != '\0' || errno == ERANGE || !std::isfinite(d))
        throw ConfigError("key '" + key + "': '" + v + "' is not a finite number");
    return d;
}

inline long long parse_int(const std::string& key, const std::string& v) {
    const char* s = v.c_str();
    char* end = nullptr;
    errno = 0;
    const long long i = std::strtoll(s, &end, 10);
    if (end == s || *end != '\0' || errno == ERANGE) throw ConfigError("key '" + key + "': '" + v + "' is not an integer");
    return i;
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    const char* s = v.c_str();
    char* end = nullptr;
    errno = 0;
    if (!v.empty() && v[0] == '-') throw ConfigError("key '" + key + "': must be nonnegative");
    const unsigned long long i = std::strtoull(s, &end, 10);
    if (end == s || *end != '\0' || errno == ERANGE)
        throw ConfigError("key '" + key + "': '" + v + "' is not an unsigned integer");
    return i;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw ConfigError("key '" + key + "': expected true or false, got '" + v + "'");
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    if (trim(v).empty()) return out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
    return out;
}

inline std::string emit_list(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt17(v[i]);
    return s;
}

struct ConfigField {
    std::string key;
    std::function<void(const std::string&)> set;
    std::function<std::string()> get;
};

/// Every accepted key, in canonical emission order.
inline std::vector<ConfigField> config_fields(ExperimentConfig& c) {
    std::vector<ConfigField> f;
    auto num = [&f](const std::string& k, double& x) {
        f.push_back({k, [&x, k](const std::string& v) { x = parse_double(k, v); }, [&x] { return fmt17(x); }});
    };
    auto integer = [&f](const std::string& k, int& x) {
        f.push_back({k, [&x, k](const std::string& v) { x = static_cast<int>(parse_int(k, v)); },
                     [&x] { return std::to_string(x); }});
    };
    auto boolean = [&f](const std::string& k, bool& x) {
        f.push_back({k, [&x, k](const std::string& v) { x = parse_bool(k, v); }, [&x] { return std::string(x ? "true" : "false"); }});
    };
    auto list = [&f](const std::string& k, std::vector<double>& x) {
        f.push_back({k, [&x, k](const std::string& v) { x = parse_list(k, v); }, [&x] { return emit_list(x); }});
    };
    integer("grid.n", c.n);
    num("grid.dealias_fraction", c.dealias_fraction);
    num("physical.nu", c.physical.nu);
    num("physical.l", c.physical.l);
    num("physical.alpha", c.physical.alpha);
    num("physical.a_tilde", c.physical.a_tilde);
    boolean("assim.enabled", c.assim_enabled);
    num("assim.beta", c.assim.beta);
    num("assim.b_tilde", c.assim.b_tilde);
    num("assim.eta", c.assim.eta);
    f.push_back({"interpolant.kind",
                 [&c](const std::string& v) {
                     try {
                         c.assim.interpolant.kind = interpolant_kind_from(v);
                     } catch (const InvalidInput& e) {
                         throw ConfigError("key 'interpolant.kind': " + std::string(e.what()));
                     }
                 },
                 [&c] { return to_string(c.assim.interpolant.kind); }});
    num("interpolant.h", c.assim.interpolant.h);
    num("interpolant.c0", c.assim.interpolant.c0);
    num("interpolant.c1", c.assim.interpolant.c1);
    f.push_back({"forcing.kind",
                 [&c](const std::string& v) {
                     try {
                         c.forcing.kind = forcing_kind_from(v);
                     } catch (const InvalidInput& e) {
                         throw ConfigError("key 'forcing.kind': " + std::string(e.what()));
                     }
                 },
                 [&c] { return to_string(c.forcing.kind); }});
    num("forcing.amplitude", c.forcing.amplitude);
    integer("forcing.min_mode", c.forcing.min_mode);
    integer("forcing.max_mode", c.forcing.max_mode);
    f.push_back({"forcing.seed", [&c](const std::string& v) { c.forcing.seed = parse_u64("forcing.seed", v); },
                 [&c] { return std::to_string(c.forcing.seed); }});
    num("forcing.omega", c.forcing.omega);
    num("stepper.dt", c.stepper.dt);
    f.push_back({"stepper.scheme",
                 [&c](const std::string& v) {
                     try {
                         c.stepper.scheme = scheme_from(v);
                     } catch (const InvalidInput& e) {
                         throw ConfigError("key 'stepper.scheme': " + std::string(e.what()));
                     }
                 },
                 [&c] { return to_string(c.stepper.scheme); }});
    num("stepper.cfl_safety", c.stepper.cfl_safety);
    boolean("stepper.adaptive", c.stepper.adaptive);
    num("stepper.blowup_threshold", c.stepper.blowup_threshold);
    num("bounds.C3", c.bounds.C3);
    num("bounds.C4", c.bounds.C4);
    num("bounds.C6", c.bounds.C6);
    num("bounds.C42_5", c.bounds.C42_5);
    num("bounds.C10", c.bounds.C10);
    num("bounds.C6beta", c.bounds.C6beta);
    num("bounds.Cinf", c.bounds.Cinf);
    num("bounds.kappa", c.bounds.kappa);
    f.push_back({"bounds.kappa_samples",
                 [&c](const std::string& v) { c.bounds.kappa_samples = static_cast<long>(parse_int("bounds.kappa_samples", v)); },
                 [&c] { return std::to_string(c.bounds.kappa_samples); }});
    num("bounds.f_norm", c.bounds.f_norm);
    num("bounds.ft_norm", c.bounds.ft_norm);
    num("bounds.M", c.bounds_M);
    integer("ic.max_mode", c.ic.max_mode);
    integer("ic.min_mode", c.ic.min_mode);
    num("ic.slope", c.ic.slope);
    num("ic.l2_norm", c.ic.l2_norm);
    num("run.T", c.T);
    num("run.T_spin", c.T_spin);
    integer("run.sample_stride", c.sample_stride);
    f.push_back({"run.seed", [&c](const std::string& v) { c.seed = parse_u64("run.seed", v); },
                 [&c] { return std::to_string(c.seed); }});
    f.push_back({"run.w0", [&c](const std::string& v) { c.w0 = v; }, [&c] { return c.w0; }});
    f.push_back({"run.output", [&c](const std::string& v) { c.output = v; }, [&c] { return c.output; }});
    list("sweep.beta", c.sweep.beta);
    list("sweep.beta_delta", c.sweep.beta_delta);
    list("sweep.b_tilde", c.sweep.b_tilde);
    list("sweep.b_tilde_delta", c.sweep.b_tilde_delta);
    list("sweep.eta", c.sweep.eta);
    list("sweep.h", c.sweep.h);
    return f;
}

} // namespace detail

/// Fills derived defaults (h = l/4, declared c0/c1) and checks every invariant.
/// Component errors are reported as ConfigError.
inline void resolve_and_validate(ExperimentConfig& c, const std::set<std::string>& explicit_keys = {}) {
    try {
        if (c.n < 8 || c.n % 2) throw ConfigError("key 'grid.n': must be even and >= 8");
        if (!(c.dealias_fraction > 0 && c.dealias_fraction <= 1))
            throw ConfigError("key 'grid.dealias_fraction': must lie in (0, 1]");
        c.physical.validate();
        auto& I = c.assim.interpolant;
        if (I.h == 0.0) I.h = c.physical.l / 4;
        const auto declared = InterpolantSpec::declared(I.kind, I.h);
        if (!explicit_keys.count("interpolant.c0") && I.c0 == 0.0) I.c0 = declared.c0;
        if (!explicit_keys.count("interpolant.c1") && I.c1 == 0.0) I.c1 = declared.c1;
        c.assim.validate(c.physical.l);
        check_compatible(I, c.grid());
        c.forcing.validate();
        c.stepper.validate();
        c.bounds.validate();
        if (c.bounds_M < 0) throw ConfigError("key 'bounds.M': must be nonnegative");
        if (c.ic.max_mode < c.ic.min_mode || c.ic.min_mode < 1) throw ConfigError("key 'ic.max_mode': need 1 <= ic.min_mode <= ic.max_mode");
        if (!(c.ic.l2_norm > 0)) throw ConfigError("key 'ic.l2_norm': must be positive");
        if (!(c.T >= 0)) throw ConfigError("key 'run.T': must be nonnegative");
        if (!(c.T_spin >= 0)) throw ConfigError("key 'run.T_spin': must be nonnegative");
        if (c.sample_stride < 1) throw ConfigError("key 'run.sample_stride': must be >= 1");
        if (c.w0 != "zero" && c.w0 != "truth") throw ConfigError("key 'run.w0': expected zero or truth");
        if (!c.sweep.beta.empty() && !c.sweep.beta_delta.empty())
            throw ConfigError("keys 'sweep.beta' and 'sweep.beta_delta' are mutually exclusive");
        if (!c.sweep.b_tilde.empty() && !c.sweep.b_tilde_delta.empty())
            throw ConfigError("keys 'sweep.b_tilde' and 'sweep.b_tilde_delta' are mutually exclusive");
        for (double h : c.sweep.h) {
            InterpolantSpec s = InterpolantSpec::declared(I.kind, h);
            s.validate(c.physical.l);
            check_compatible(s, c.grid());
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const InvalidInput& e) {
        throw ConfigError(e.what());
    }
}

/// Flat "key = value" text; '#' starts a comment; unknown or repeated keys are errors.
inline ExperimentConfig parse_config(std::istream& is, const std::string& origin = "<config>") {
    ExperimentConfig c;
    auto fields = detail::config_fields(c);
    std::map<std::string, const detail::ConfigField*> by_key;
    for (const auto& f : fields) by_key[f.key] = &f;
    std::set<std::string> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq)), value = detail::trim(line.substr(eq + 1));
        const auto it = by_key.find(key);
        if (it == by_key.end()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        if (!seen.insert(key).second)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": key '" + key + "' given twice");
        if (value.empty() && key.rfind("sweep.", 0) != 0)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": key '" + key + "' has no value");
        try {
            it->second->set(value);
        } catch (const std::exception& e) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    resolve_and_validate(c, seen);
    return c;
}

inline ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in, path);
}

/// Canonical form: every key, one per line, numbers at full precision.
inline void emit_config(std::ostream& os, const ExperimentConfig& c, const std::string& prefix = "") {
    ExperimentConfig copy = c;
    for (const auto& f : detail::config_fields(copy)) os << prefix << f.key << " = " << f.get() << "\n";
}

inline std::vector<std::pair<std::string, std::string>> config_pairs(const ExperimentConfig& c) {
    ExperimentConfig copy = c;
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& f : detail::config_fields(copy)) out.emplace_back(f.key, f.get());
    return out;
}

} // namespace bfda
