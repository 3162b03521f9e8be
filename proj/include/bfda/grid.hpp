#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>

#include "errors.hpp"

namespace bfda {

/// Uniform collocation grid on the periodic cube [0,l]^3.
///
/// Physical arrays are row-major (x slowest, z fastest) with n^3 points.
/// Spectral arrays use the real-to-complex half layout n x n x (n/2+1);
/// index i along x or y maps to the integer mode m = i for i <= n/2 and
/// m = i - n otherwise, and index k along z maps to m = k.
class Grid {
public:
    Grid(double l, int n, double dealias_fraction = 2.0 / 3.0)
        : l_(l), n_(n), dealias_fraction_(dealias_fraction) {
        if (!(l > 0.0) || !std::isfinite(l)) throw InvalidInput("grid: box length must be positive");
        if (n < 8 || n % 2 != 0) throw InvalidInput("grid: n must be even and >= 8");
        if (!(dealias_fraction > 0.0 && dealias_fraction <= 1.0))
            throw InvalidInput("grid: dealias_fraction must lie in (0,1]");
        cutoff_ = static_cast<int>(std::floor(dealias_fraction * n / 2.0 + 1e-12));
    }

    double length() const { return l_; }
    int n() const { return n_; }
    double dealias_fraction() const { return dealias_fraction_; }

    int nz() const { return n_ / 2 + 1; }
    std::size_t points() const { return std::size_t(n_) * n_ * n_; }
    std::size_t modes() const { return std::size_t(n_) * n_ * nz(); }

    double spacing() const { return l_ / n_; }
    double volume() const { return l_ * l_ * l_; }
    double cell_volume() const { double h = spacing(); return h * h * h; }
    double k0() const { return 2.0 * std::numbers::pi / l_; }

    /// Integer mode for index i along x or y.
    int mode(int i) const { return i <= n_ / 2 ? i : i - n_; }

    /// Largest |m_j| kept by the dealiasing truncation.
    int dealias_cutoff() const { return cutoff_; }

    bool retained(int mx, int my, int mz) const {
        return std::abs(mx) <= cutoff_ && std::abs(my) <= cutoff_ && std::abs(mz) <= cutoff_;
    }

    std::size_t spectral_index(int i, int j, int k) const {
        return (std::size_t(i) * n_ + j) * nz() + k;
    }
    std::size_t physical_index(int i, int j, int k) const {
        return (std::size_t(i) * n_ + j) * n_ + k;
    }

    /// Multiplicity of a half-layout entry in the full spectrum.
    double weight(int k) const { return (k == 0 || k == n_ / 2) ? 1.0 : 2.0; }

    friend bool operator==(const Grid& a, const Grid& b) {
        return a.n_ == b.n_ && a.l_ == b.l_ && a.dealias_fraction_ == b.dealias_fraction_;
    }

private:
    double l_;
    int n_;
    double dealias_fraction_;
    int cutoff_ = 0;
};

/// Iterate over every half-layout spectral entry.
/// The callback receives (flat index, mx, my, mz, weight).
template <class F>
void for_each_mode(const Grid& g, F&& f) {
    const int n = g.n(), nz = g.nz();
    std::size_t idx = 0;
    for (int i = 0; i < n; ++i) {
        const int mx = g.mode(i);
        for (int j = 0; j < n; ++j) {
            const int my = g.mode(j);
            for (int k = 0; k < nz; ++k, ++idx) f(idx, mx, my, k, g.weight(k));
        }
    }
}

inline void require_same_grid(const Grid& a, const Grid& b, const char* what) {
    if (!(a == b)) throw GridMismatch(std::string(what) + ": fields live on different grids");
}

} // namespace bfda
