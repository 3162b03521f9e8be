#pragma once

#include <cfloat>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <utility>

#include "errors.hpp"

namespace bfda {

/// Nonnegative real stored by its natural logarithm, so products, powers
/// and sums of astronomically large constants stay representable.
class LogReal {
public:
    LogReal() = default;  // zero

    LogReal(double v) {  // NOLINT: implicit from plain numbers is intended
        if (!(v >= 0)) throw InvalidInput("LogReal: value must be nonnegative, got " + std::to_string(v));
        ln_ = v > 0 ? std::log(v) : -std::numeric_limits<double>::infinity();
        if (std::isinf(v)) ln_ = std::numeric_limits<double>::infinity();
    }

    static LogReal from_log(double ln) {
        LogReal r;
        r.ln_ = ln;
        return r;
    }
    static LogReal exp(double x) { return from_log(x); }

    double ln() const { return ln_; }
    double log10() const { return ln_ / std::log(10.0); }
    double value() const { return std::exp(ln_); }  ///< +inf when out of double range
    bool is_zero() const { return ln_ == -std::numeric_limits<double>::infinity(); }
    bool representable() const { return ln_ <= std::log(DBL_MAX); }

    /// (mantissa in [1,10), decimal exponent); (0, 0) for zero.
    std::pair<double, long> mantissa_exponent() const {
        if (is_zero()) return {0.0, 0};
        const double l10 = log10();
        const double e = std::floor(l10);
        return {std::pow(10.0, l10 - e), static_cast<long>(e)};
    }

    std::string str() const {
        if (is_zero()) return "0";
        char buf[64];
        if (representable() && std::abs(log10()) < 300) std::snprintf(buf, sizeof buf, "%.15g", value());
        else {
            const auto [m, e] = mantissa_exponent();
            std::snprintf(buf, sizeof buf, "%.15fe%+ld", m, e);
        }
        return buf;
    }

    LogReal pow(double e) const {
        if (is_zero()) {
            if (e > 0) return {};
            if (e == 0) return from_log(0.0);
            return from_log(std::numeric_limits<double>::infinity());
        }
        return from_log(e * ln_);
    }

    friend LogReal operator*(LogReal a, LogReal b) {
        if (a.is_zero() || b.is_zero()) return {};
        return from_log(a.ln_ + b.ln_);
    }
    friend LogReal operator/(LogReal a, LogReal b) {
        if (b.is_zero()) throw InvalidInput("LogReal: division by zero");
        if (a.is_zero()) return {};
        return from_log(a.ln_ - b.ln_);
    }
    friend LogReal operator+(LogReal a, LogReal b) {
        if (a.is_zero()) return b;
        if (b.is_zero()) return a;
        const double hi = std::max(a.ln_, b.ln_), lo = std::min(a.ln_, b.ln_);
        return from_log(hi + std::log1p(std::exp(lo - hi)));
    }
    LogReal& operator+=(LogReal o) { return *this = *this + o; }
    LogReal& operator*=(LogReal o) { return *this = *this * o; }

    friend bool operator<(LogReal a, LogReal b) { return a.ln_ < b.ln_; }
    friend bool operator>(LogReal a, LogReal b) { return a.ln_ > b.ln_; }
    friend bool operator<=(LogReal a, LogReal b) { return a.ln_ <= b.ln_; }
    friend bool operator>=(LogReal a, LogReal b) { return a.ln_ >= b.ln_; }

private:
    double ln_ = -std::numeric_limits<double>::infinity();
};

inline LogReal max(LogReal a, LogReal b) { return a < b ? b : a; }

} // namespace bfda
