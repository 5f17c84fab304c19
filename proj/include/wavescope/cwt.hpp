#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "fft.hpp"
#include "matrix.hpp"
#include "parallel.hpp"
#include "text.hpp"
#include "wavelet.hpp"

namespace wavescope {

/// Geometric scale ladder s0 * 2^(j / voices), j = 0 .. count-1.
///
/// Scales are expressed in the same time unit as the sampling interval.
class ScaleGrid {
public:
    ScaleGrid() = default;

    static ScaleGrid dyadic(double s0, int voices, std::size_t count)
    {
        if (!(s0 > 0.0))
            throw DomainError("scale grid: s0 must be positive");
        if (voices < 1)
            throw DomainError("scale grid: voices per octave must be >= 1");
        if (count == 0)
            throw DomainError("scale grid: empty grid");
        ScaleGrid g;
        g.s0_ = s0;
        g.voices_ = voices;
        g.scales_.resize(count);
        for (std::size_t j = 0; j < count; ++j)
            g.scales_[j] = s0 * std::exp2(static_cast<double>(j) / voices);
        return g;
    }

    /// Rebuilds a grid from stored scale values (e.g. a re-imported matrix).
    static ScaleGrid from_scales(std::vector<double> scales)
    {
        if (scales.empty())
            throw DomainError("scale grid: empty grid");
        for (std::size_t j = 0; j < scales.size(); ++j) {
            if (!(scales[j] > 0.0))
                throw DomainError("scale grid: scales must be positive");
            if (j > 0 && !(scales[j] > scales[j - 1]))
                throw DomainError("scale grid: scales must be strictly increasing");
        }
        ScaleGrid g;
        g.s0_ = scales.front();
        g.voices_ = scales.size() > 1
            ? std::max(1, static_cast<int>(std::lround(1.0 / std::log2(scales[1] / scales[0]))))
            : 1;
        g.scales_ = std::move(scales);
        return g;
    }

    double s0() const noexcept { return s0_; }
    int voices_per_octave() const noexcept { return voices_; }
    std::size_t count() const noexcept { return scales_.size(); }
    bool empty() const noexcept { return scales_.empty(); }
    const std::vector<double>& scales() const noexcept { return scales_; }
    double operator[](std::size_t j) const noexcept { return scales_[j]; }

    bool operator==(const ScaleGrid&) const = default;

private:
    double s0_ = 0.0;
    int voices_ = 0;
    std::vector<double> scales_;
};

/// Largest dyadic grid starting at s0 whose top scale stays within the record length n*dt.
inline ScaleGrid build_scale_grid(std::size_t n, double dt, double s0, int voices)
{
    if (n < 8)
        throw DomainError("build_scale_grid: need at least 8 samples, got " + std::to_string(n));
    if (!(dt > 0.0) || !(s0 > 0.0))
        throw DomainError("build_scale_grid: dt and s0 must be positive");
    if (voices < 1)
        throw DomainError("build_scale_grid: voices per octave must be >= 1");
    const double record = static_cast<double>(n) * dt;
    if (s0 >= record)
        throw DomainError("build_scale_grid: s0 = " + format_shortest(s0) + " is not below the record length "
                          + format_shortest(record) + " (empty grid)");
    // The epsilon keeps exact powers of two (record/s0 = 512) from flooring one voice short.
    const auto top = static_cast<std::size_t>(std::floor(voices * std::log2(record / s0) + 1e-9));
    return ScaleGrid::dyadic(s0, voices, top + 1);
}

/// Default grid: s0 = 2 dt, 12 voices per octave.
inline ScaleGrid default_scale_grid(std::size_t n, double dt) { return build_scale_grid(n, dt, 2.0 * dt, 12); }

/// Edge-trust limit per time index: min(k, n-1-k) * dt / e-fold time of the envelope.
inline std::vector<double> cone_of_influence(std::size_t n, double dt, const MotherWavelet& w)
{
    if (n < 2)
        throw DomainError("cone_of_influence: need at least 2 samples");
    std::vector<double> coi(n);
    const double efold = w.efold_time();
    for (std::size_t k = 0; k < n; ++k)
        coi[k] = static_cast<double>(std::min(k, n - 1 - k)) * dt / efold;
    return coi;
}

/// How the record is continued past its ends.
///
/// Symmetric mirrors the samples (x1 | x1 .. xn | xn), so a constant stays
/// constant and the near-zero mean of the wavelet removes it everywhere.
/// Zero treats the signal as zero outside the record: the literal
/// discrete sum over the available samples.
enum class Boundary { Symmetric, Zero };

/// Complex coefficients W(scale, time) with the metadata needed to interpret them.
struct WaveletSpectrum {
    Matrix<std::complex<double>> coefficients; ///< rows = grid scales, cols = time index
    ScaleGrid grid;
    double dt = 1.0;
    std::vector<double> coi;
    MotherWavelet wavelet = MotherWavelet::morlet();
    Boundary boundary = Boundary::Symmetric;

    std::size_t length() const noexcept { return coefficients.cols(); }
    bool in_coi(std::size_t j, std::size_t k) const noexcept { return grid[j] <= coi[k]; }
};

struct PowerSpectrum {
    Matrix<double> values;
    ScaleGrid grid;
    double dt = 1.0;
    std::vector<double> coi;
    MotherWavelet wavelet = MotherWavelet::morlet();

    std::size_t length() const noexcept { return values.cols(); }
    bool in_coi(std::size_t j, std::size_t k) const noexcept { return grid[j] <= coi[k]; }
};

struct CwtOptions {
    unsigned workers = 0; ///< 0 = one per hardware thread
    Boundary boundary = Boundary::Symmetric;
};

namespace detail {
inline void validate_cwt_input(std::span<const double> signal, const ScaleGrid& grid, double dt)
{
    if (signal.size() < 8)
        throw InputError("cwt: signal needs at least 8 samples, got " + std::to_string(signal.size()));
    for (std::size_t i = 0; i < signal.size(); ++i)
        if (!std::isfinite(signal[i]))
            throw InputError("cwt: non-finite value at index " + std::to_string(i));
    if (grid.empty())
        throw InputError("cwt: empty scale grid");
    if (!(dt > 0.0))
        throw DomainError("cwt: dt must be positive");
}

/// Sample i of the continued signal, for any integer i.
inline double extended_sample(std::span<const double> x, long i, Boundary boundary)
{
    const auto n = static_cast<long>(x.size());
    if (boundary == Boundary::Zero)
        return i >= 0 && i < n ? x[static_cast<std::size_t>(i)] : 0.0;
    long r = i % (2 * n);
    if (r < 0)
        r += 2 * n;
    return r < n ? x[static_cast<std::size_t>(r)] : x[static_cast<std::size_t>(2 * n - 1 - r)];
}
} // namespace detail

/// Discrete form of W(s, tau) = s^{-1/2} * sum_k' conj(psi((k' - k) dt / s)) f[k'] dt,
/// with f continued past the record according to `options.boundary`.
///
/// Each scale is a correlation of the continued signal with the sampled,
/// conjugated wavelet, computed by FFT on a power-of-two buffer that holds
/// the record plus one record length of continuation on each side. Under
/// Symmetric the continuation has period 2n, so wavelet taps beyond one
/// period are folded onto their alias; under Zero the taps stop at n - 1.
/// The continuation is dropped before return. Scales run independently
/// across workers; output is bit-identical for any worker count.
inline WaveletSpectrum cwt(std::span<const double> signal, const MotherWavelet& w, const ScaleGrid& grid,
                           double dt, CwtOptions options = {})
{
    detail::validate_cwt_input(signal, grid, dt);
    const std::size_t n = signal.size();
    const auto ln = static_cast<long>(n);
    const std::size_t padded = next_pow2(3 * n);
    const FftPlan plan(padded);

    // buffer[n + i] holds continued sample i for i in [-n, 2n)
    std::vector<std::complex<double>> signal_hat(padded);
    for (long i = -ln; i < 2 * ln; ++i)
        signal_hat[static_cast<std::size_t>(i + ln)] = detail::extended_sample(signal, i, options.boundary);
    plan.forward(signal_hat);

    WaveletSpectrum out{Matrix<std::complex<double>>(grid.count(), n), grid, dt, cone_of_influence(n, dt, w), w,
                        options.boundary};
    const double inv_padded = 1.0 / static_cast<double>(padded);
    // Taps past this radius are below 1e-18 of the peak.
    const double tail = w.support_radius(1e-18);

    parallel_for(grid.count(), options.workers, [&](std::size_t j) {
        const double s = grid[j];
        const double weight = dt / std::sqrt(s);
        std::vector<std::complex<double>> buf(padded);
        // kernel[-q mod padded] = h[q], h[m] = conj(psi(m dt / s)) dt / sqrt(s), so that the
        // circular convolution at buffer position k + n is sum_q ext[k + q] h[q].
        auto place = [&](long q, std::complex<double> v) {
            buf[static_cast<std::size_t>((-q % static_cast<long>(padded) + static_cast<long>(padded))
                                         % static_cast<long>(padded))] += v;
        };
        if (options.boundary == Boundary::Zero) {
            for (long m = -(ln - 1); m < ln; ++m)
                place(m, std::conj(evaluate(w, static_cast<double>(m) * dt / s)) * weight);
        } else {
            const auto reach = static_cast<long>(std::ceil(tail * s / dt));
            for (long m = -reach; m <= reach; ++m) {
                long q = m % (2 * ln);
                if (q < -ln)
                    q += 2 * ln;
                else if (q >= ln)
                    q -= 2 * ln;
                place(q, std::conj(evaluate(w, static_cast<double>(m) * dt / s)) * weight);
            }
        }
        plan.forward(buf);
        for (std::size_t i = 0; i < padded; ++i) {
            const auto a = signal_hat[i];
            const auto b = buf[i];
            buf[i] = {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
        }
        plan.inverse(buf);
        auto row = out.coefficients.row(j);
        for (std::size_t k = 0; k < n; ++k)
            row[k] = buf[k + n] * inv_padded;
    });
    return out;
}

/// Reference evaluation of the same discretization by explicit summation.
///
/// The wavelet is truncated where its envelope drops below 1e-12. Quadratic
/// cost; exists to check cwt().
inline WaveletSpectrum cwt_direct(std::span<const double> signal, const MotherWavelet& w, const ScaleGrid& grid,
                                  double dt, Boundary boundary = Boundary::Symmetric)
{
    detail::validate_cwt_input(signal, grid, dt);
    const std::size_t n = signal.size();
    const double radius = w.support_radius(1e-12);
    WaveletSpectrum out{Matrix<std::complex<double>>(grid.count(), n), grid, dt, cone_of_influence(n, dt, w), w,
                        boundary};

    for (std::size_t j = 0; j < grid.count(); ++j) {
        const double s = grid[j];
        const auto reach = static_cast<long>(std::floor(radius * s / dt));
        // taps[m + reach] = conj(psi(m dt / s)) for offsets m = k' - k
        std::vector<std::complex<double>> taps(2 * static_cast<std::size_t>(reach) + 1);
        for (long m = -reach; m <= reach; ++m)
            taps[static_cast<std::size_t>(m + reach)] = std::conj(evaluate(w, static_cast<double>(m) * dt / s));
        // ext[i + reach] = continued sample i for i in [-reach, n + reach)
        std::vector<double> ext(n + 2 * static_cast<std::size_t>(reach));
        for (std::size_t i = 0; i < ext.size(); ++i)
            ext[i] = detail::extended_sample(signal, static_cast<long>(i) - reach, boundary);
        const double weight = dt / std::sqrt(s);
        for (std::size_t k = 0; k < n; ++k) {
            std::complex<double> acc{};
            for (std::size_t i = 0; i < taps.size(); ++i)
                acc += taps[i] * ext[k + i];
            out.coefficients(j, k) = acc * weight;
        }
    }
    return out;
}

inline PowerSpectrum power(const WaveletSpectrum& spec)
{
    return {map(spec.coefficients, [](const std::complex<double>& c) { return std::norm(c); }), spec.grid,
            spec.dt, spec.coi, spec.wavelet};
}

/// Frequencies (cycles per unit of dt) for every grid scale.
inline std::vector<double> grid_frequencies(const MotherWavelet& w, const ScaleGrid& grid, double dt)
{
    std::vector<double> f(grid.count());
    for (std::size_t j = 0; j < grid.count(); ++j)
        f[j] = scale_to_frequency(w, grid[j], dt);
    return f;
}

} // namespace wavescope
