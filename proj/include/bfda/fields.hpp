#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "grid.hpp"

namespace bfda {

using Complex = std::complex<double>;

/// Real 3-vector field sampled at the n^3 collocation points.
class PhysicalField {
public:
    explicit PhysicalField(const Grid& g) : grid_(g), values_(3 * g.points(), 0.0) {}

    const Grid& grid() const { return grid_; }

    std::span<double> component(int c) { return {values_.data() + c * grid_.points(), grid_.points()}; }
    std::span<const double> component(int c) const {
        return {values_.data() + c * grid_.points(), grid_.points()};
    }
    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

    bool finite() const {
        return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
    }

private:
    Grid grid_;
    std::vector<double> values_;
};

/// Fourier coefficients of a real 3-vector field in the half layout.
///
/// Convention: u(x) = sum_k u_hat(k) exp(i k.x), with k = (2 pi / l) m.
class SpectralField {
public:
    explicit SpectralField(const Grid& g) : grid_(g), coeffs_(3 * g.modes()) {}

    const Grid& grid() const { return grid_; }

    std::span<Complex> component(int c) { return {coeffs_.data() + c * grid_.modes(), grid_.modes()}; }
    std::span<const Complex> component(int c) const {
        return {coeffs_.data() + c * grid_.modes(), grid_.modes()};
    }
    std::span<Complex> coeffs() { return coeffs_; }
    std::span<const Complex> coeffs() const { return coeffs_; }

    Complex& at(int c, std::size_t idx) { return coeffs_[c * grid_.modes() + idx]; }
    const Complex& at(int c, std::size_t idx) const { return coeffs_[c * grid_.modes() + idx]; }

    SpectralField& operator+=(const SpectralField& o) {
        require_same_grid(grid_, o.grid_, "field add");
        for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
        return *this;
    }
    SpectralField& operator-=(const SpectralField& o) {
        require_same_grid(grid_, o.grid_, "field subtract");
        for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
        return *this;
    }
    SpectralField& operator*=(double s) {
        for (auto& c : coeffs_) c *= s;
        return *this;
    }
    /// this += s * o
    SpectralField& axpy(double s, const SpectralField& o) {
        require_same_grid(grid_, o.grid_, "field axpy");
        for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += s * o.coeffs_[i];
        return *this;
    }

    friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
    friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
    friend SpectralField operator*(double s, SpectralField a) { return a *= s; }

    bool finite() const {
        return std::all_of(coeffs_.begin(), coeffs_.end(),
                           [](const Complex& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& v : coeffs_) m = std::max(m, std::abs(v));
        return m;
    }

private:
    Grid grid_;
    std::vector<Complex> coeffs_;
};

/// Spatial gradient of a vector field: entry j holds d/dx_j of every component.
using GradientField = std::array<SpectralField, 3>;

} // namespace bfda
