#pragma once

#include <fftw3.h>

#include <complex>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <span>

#include "fields.hpp"

namespace bfda {

namespace detail {

// FFTW's planner is not thread safe; execution on distinct buffers is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

/// Scalar r2c/c2r plan pair for one grid size with its own aligned buffers.
/// Plans use FFTW_ESTIMATE so that results do not depend on timing.
class FftPlan {
public:
    explicit FftPlan(int n) : n_(n), points_(std::size_t(n) * n * n), modes_(std::size_t(n) * n * (n / 2 + 1)) {
        real_ = static_cast<double*>(fftw_malloc(sizeof(double) * points_));
        spec_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * modes_));
        std::lock_guard lock(fftw_planner_mutex());
        r2c_ = fftw_plan_dft_r2c_3d(n, n, n, real_, spec_, FFTW_ESTIMATE);
        c2r_ = fftw_plan_dft_c2r_3d(n, n, n, spec_, real_, FFTW_ESTIMATE);
    }
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;
    ~FftPlan() {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(r2c_);
        fftw_destroy_plan(c2r_);
        fftw_free(real_);
        fftw_free(spec_);
    }

    /// out = FFT(in) / n^3
    void forward(std::span<const double> in, std::span<Complex> out) {
        std::memcpy(real_, in.data(), sizeof(double) * points_);
        fftw_execute(r2c_);
        const double scale = 1.0 / static_cast<double>(points_);
        for (std::size_t i = 0; i < modes_; ++i) out[i] = Complex(spec_[i][0] * scale, spec_[i][1] * scale);
    }

    /// out = inverse FFT(in), unnormalized, so coefficients map to point values.
    void backward(std::span<const Complex> in, std::span<double> out) {
        std::memcpy(spec_, in.data(), sizeof(fftw_complex) * modes_);
        fftw_execute(c2r_);
        std::memcpy(out.data(), real_, sizeof(double) * points_);
    }

private:
    int n_;
    std::size_t points_, modes_;
    double* real_ = nullptr;
    fftw_complex* spec_ = nullptr;
    fftw_plan r2c_ = nullptr, c2r_ = nullptr;
};

inline FftPlan& plan_for(int n) {
    thread_local std::map<int, std::unique_ptr<FftPlan>> cache;
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<FftPlan>(n);
    return *slot;
}

} // namespace detail

inline void forward_scalar(const Grid& g, std::span<const double> in, std::span<Complex> out) {
    detail::plan_for(g.n()).forward(in, out);
}

inline void backward_scalar(const Grid& g, std::span<const Complex> in, std::span<double> out) {
    detail::plan_for(g.n()).backward(in, out);
}

} // namespace bfda
