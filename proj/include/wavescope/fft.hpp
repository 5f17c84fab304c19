#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace wavescope {

inline std::size_t next_pow2(std::size_t n) noexcept { return n <= 1 ? 1 : std::bit_ceil(n); }

/// Iterative radix-2 FFT with precomputed twiddles and bit-reversal table.
///
/// A plan is immutable once built and may be shared across threads; each
/// caller supplies its own buffer.
class FftPlan {
public:
    explicit FftPlan(std::size_t n) : n_(n), twiddles_(n / 2), reversed_(n)
    {
        if (n == 0 || !std::has_single_bit(n))
            throw std::invalid_argument("FftPlan: size must be a power of two");
        for (std::size_t k = 0; k < n / 2; ++k) {
            const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
            twiddles_[k] = {std::cos(angle), std::sin(angle)};
        }
        const int bits = std::countr_zero(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t r = 0;
            for (int b = 0; b < bits; ++b)
                r |= ((i >> b) & 1u) << (bits - 1 - b);
            reversed_[i] = r;
        }
    }

    std::size_t size() const noexcept { return n_; }

    void forward(std::span<std::complex<double>> x) const { run(x, false); }

    /// Unnormalized inverse; divide by size() to undo forward().
    void inverse(std::span<std::complex<double>> x) const { run(x, true); }

private:
    void run(std::span<std::complex<double>> x, bool inverse) const
    {
        if (x.size() != n_)
            throw std::invalid_argument("FftPlan: buffer size mismatch");
        for (std::size_t i = 0; i < n_; ++i)
            if (i < reversed_[i])
                std::swap(x[i], x[reversed_[i]]);
        for (std::size_t len = 2; len <= n_; len <<= 1) {
            const std::size_t half = len / 2;
            const std::size_t stride = n_ / len;
            for (std::size_t start = 0; start < n_; start += len) {
                for (std::size_t k = 0; k < half; ++k) {
                    auto w = twiddles_[k * stride];
                    if (inverse)
                        w = std::conj(w);
                    const auto u = x[start + k];
                    const auto b = x[start + k + half];
                    const std::complex<double> v{b.real() * w.real() - b.imag() * w.imag(),
                                                 b.real() * w.imag() + b.imag() * w.real()};
                    x[start + k] = u + v;
                    x[start + k + half] = u - v;
                }
            }
        }
    }

    std::size_t n_;
    std::vector<std::complex<double>> twiddles_;
    std::vector<std::size_t> reversed_;
};

} // namespace wavescope
