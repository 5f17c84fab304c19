#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "cwt.hpp"
#include "error.hpp"
#include "matrix.hpp"

namespace wavescope {

/// W_xy = W_x * conj(W_y) with the tighter of the two cones of influence.
struct CrossSpectrum {
    Matrix<std::complex<double>> values;
    ScaleGrid grid;
    double dt = 1.0;
    std::vector<double> coi;
    MotherWavelet wavelet = MotherWavelet::morlet();

    bool in_coi(std::size_t j, std::size_t k) const noexcept { return grid[j] <= coi[k]; }
};

/// Window parameters for coherence smoothing.
///
/// Time: Gaussian with standard deviation `time_sigma_factor * scale / dt`
/// samples, cut at `truncation` standard deviations. Scale: boxcar spanning
/// round(scale_window_fraction * voices) rows, made odd by centring.
struct SmoothingOptions {
    double time_sigma_factor = 1.0;
    double truncation = 3.0;
    double scale_window_fraction = 0.6;

    /// Windows of width one: the smoother becomes a no-op.
    static SmoothingOptions identity() { return {0.0, 3.0, 0.0}; }

    int scale_half_width(int voices) const noexcept
    {
        const long width = std::max(1L, std::lround(scale_window_fraction * voices));
        return static_cast<int>(width / 2);
    }
};

struct CoherenceMap {
    Matrix<double> r2;           ///< squared coherence in [0, 1]
    Matrix<double> phase;        ///< arg of the smoothed cross spectrum, (-pi, pi]
    Matrix<std::uint8_t> flagged; ///< 1 where a smoothed auto-power fell below the division guard
    ScaleGrid grid;
    double dt = 1.0;
    std::vector<double> coi;
    MotherWavelet wavelet = MotherWavelet::morlet();
    SmoothingOptions smoothing;
    std::size_t flagged_count = 0;

    bool in_coi(std::size_t j, std::size_t k) const noexcept { return grid[j] <= coi[k]; }
};

inline constexpr double coherence_power_floor = 1e-300;
inline constexpr double coherence_overshoot_tolerance = 1e-9;

namespace detail {

inline void require_compatible(const WaveletSpectrum& a, const WaveletSpectrum& b)
{
    if (a.length() != b.length())
        throw IncompatibleError("length", "spectra differ in time length: " + std::to_string(a.length()) + " vs "
                                              + std::to_string(b.length()));
    if (a.grid != b.grid)
        throw IncompatibleError("grid", "spectra use different scale grids (" + std::to_string(a.grid.count())
                                            + " vs " + std::to_string(b.grid.count()) + " scales)");
    if (a.dt != b.dt)
        throw IncompatibleError("dt", "spectra use different sampling intervals");
    if (!(a.wavelet == b.wavelet))
        throw IncompatibleError("wavelet", "spectra use different wavelets: " + to_string(a.wavelet) + " vs "
                                               + to_string(b.wavelet));
}

/// Gaussian taps exp(-m^2 / (2 sigma^2)) for |m| <= floor(truncation * sigma), capped at n - 1.
inline std::vector<double> gaussian_taps(double sigma, double truncation, std::size_t n)
{
    if (!(sigma > 0.0))
        return {1.0};
    const auto reach = static_cast<std::size_t>(
        std::min(std::floor(truncation * sigma), static_cast<double>(n > 0 ? n - 1 : 0)));
    std::vector<double> taps(2 * reach + 1);
    for (std::size_t i = 0; i < taps.size(); ++i) {
        const double m = static_cast<double>(i) - static_cast<double>(reach);
        taps[i] = std::exp(-m * m / (2.0 * sigma * sigma));
    }
    return taps;
}

/// out[k] = sum_m taps[m] in[k + m] / sum_m taps[m], both sums over in-range k + m.
template <typename T>
void smooth_row(std::span<const T> in, std::span<T> out, const std::vector<double>& taps)
{
    const std::size_t n = in.size();
    const std::size_t reach = taps.size() / 2;
    if (reach == 0) {
        std::copy(in.begin(), in.end(), out.begin());
        return;
    }
    // Window mass that falls inside the record, for edge renormalization.
    std::vector<double> prefix(taps.size() + 1, 0.0);
    for (std::size_t i = 0; i < taps.size(); ++i)
        prefix[i + 1] = prefix[i] + taps[i];
    auto mass = [&](std::size_t k) {
        const std::size_t lo = reach - std::min(reach, k);
        const std::size_t hi = reach + std::min(reach, n - 1 - k);
        return prefix[hi + 1] - prefix[lo];
    };

    // Direct summation: every term of an auto-power sum is nonnegative, so the
    // smoothed powers keep full relative precision and r2 cannot drift above 1.
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t lo = reach - std::min(reach, k);
        const std::size_t hi = reach + std::min(reach, n - 1 - k);
        T acc{};
        for (std::size_t i = lo; i <= hi; ++i)
            acc += taps[i] * in[k + i - reach];
        out[k] = acc / mass(k);
    }
}

} // namespace detail

/// Smooths along time (scale-dependent Gaussian) and then across scale (boxcar).
///
/// Both windows have unit mass, renormalized over the in-range part near the
/// edges, so constants pass through unchanged.
template <typename T>
Matrix<T> smooth(const Matrix<T>& m, const ScaleGrid& grid, double dt, const SmoothingOptions& opts = {})
{
    if (m.rows() != grid.count())
        throw InputError("smooth: matrix has " + std::to_string(m.rows()) + " rows but grid has "
                         + std::to_string(grid.count()) + " scales");
    if (!(dt > 0.0))
        throw DomainError("smooth: dt must be positive");
    const std::size_t rows = m.rows();
    const std::size_t cols = m.cols();

    Matrix<T> timed(rows, cols);
    for (std::size_t j = 0; j < rows; ++j) {
        const auto taps = detail::gaussian_taps(opts.time_sigma_factor * grid[j] / dt, opts.truncation, cols);
        detail::smooth_row<T>(m.row(j), timed.row(j), taps);
    }

    const auto half = static_cast<std::size_t>(opts.scale_half_width(grid.voices_per_octave()));
    if (half == 0)
        return timed;
    Matrix<T> out(rows, cols);
    for (std::size_t j = 0; j < rows; ++j) {
        const std::size_t lo = j - std::min(j, half);
        const std::size_t hi = std::min(rows - 1, j + half);
        const double inv = 1.0 / static_cast<double>(hi - lo + 1);
        auto dst = out.row(j);
        for (std::size_t i = lo; i <= hi; ++i) {
            auto src = timed.row(i);
            for (std::size_t k = 0; k < cols; ++k)
                dst[k] += src[k];
        }
        for (auto& v : dst)
            v *= inv;
    }
    return out;
}

inline CrossSpectrum cross_wavelet(const WaveletSpectrum& a, const WaveletSpectrum& b)
{
    detail::require_compatible(a, b);
    CrossSpectrum out{Matrix<std::complex<double>>(a.grid.count(), a.length()), a.grid, a.dt,
                      std::vector<double>(a.length()), a.wavelet};
    auto x = a.coefficients.data();
    auto y = b.coefficients.data();
    auto dst = out.values.data();
    for (std::size_t i = 0; i < dst.size(); ++i)
        dst[i] = x[i] * std::conj(y[i]);
    for (std::size_t k = 0; k < a.length(); ++k)
        out.coi[k] = std::min(a.coi[k], b.coi[k]);
    return out;
}

/// Elementwise argument of the cross spectrum; 0 where it vanishes.
inline Matrix<double> phase_difference(const CrossSpectrum& c)
{
    return map(c.values, [](const std::complex<double>& v) { return v == std::complex<double>{} ? 0.0 : std::arg(v); });
}

/// Smoothed squared coherence |S(W_xy)|^2 / (S(|W_x|^2) S(|W_y|^2)).
///
/// Cells where either smoothed auto-power is below 1e-300 get r2 = 0 and are
/// flagged. Rounding overshoot above 1 of at most 1e-9 is clamped; anything
/// larger raises NumericalError.
inline CoherenceMap coherence(const WaveletSpectrum& a, const WaveletSpectrum& b, const SmoothingOptions& opts = {})
{
    const CrossSpectrum cross = cross_wavelet(a, b);
    const auto sxy = smooth(cross.values, a.grid, a.dt, opts);
    const auto sxx = smooth(power(a).values, a.grid, a.dt, opts);
    const auto syy = smooth(power(b).values, a.grid, a.dt, opts);

    const std::size_t rows = a.grid.count();
    const std::size_t cols = a.length();
    CoherenceMap out{Matrix<double>(rows, cols), Matrix<double>(rows, cols), Matrix<std::uint8_t>(rows, cols),
                     a.grid, a.dt, cross.coi, a.wavelet, opts, 0};
    for (std::size_t j = 0; j < rows; ++j) {
        for (std::size_t k = 0; k < cols; ++k) {
            const auto s = sxy(j, k);
            out.phase(j, k) = s == std::complex<double>{} ? 0.0 : std::arg(s);
            const double px = sxx(j, k);
            const double py = syy(j, k);
            if (px < coherence_power_floor || py < coherence_power_floor) {
                out.r2(j, k) = 0.0;
                out.flagged(j, k) = 1;
                ++out.flagged_count;
                continue;
            }
            double r2 = std::norm(s) / (px * py);
            if (r2 > 1.0) {
                if (r2 > 1.0 + coherence_overshoot_tolerance)
                    throw NumericalError("coherence: r2 = " + format_shortest(r2) + " exceeds 1 at scale index "
                                         + std::to_string(j) + ", time index " + std::to_string(k));
                r2 = 1.0;
            }
            out.r2(j, k) = r2;
        }
    }
    return out;
}

} // namespace wavescope
