#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <string_view>

#include "error.hpp"
#include "text.hpp"

namespace wavescope {

enum class Family { Morlet, ComplexMorlet };

/// A member of the Morlet or complex-Morlet family.
///
/// Morlet:          psi(t) = pi^{-1/4} exp(-t^2/2) exp(i omega t)
/// Complex Morlet:  psi(t) = (pi delta)^{-1/4} exp(-t^2/delta) exp(i omega t)
///
/// The Morlet form carries no admissibility correction term; its residual
/// mean is reported by admissibility_diagnostic(). `delta` is kept at 2 for
/// Morlet (the envelope exp(-t^2/2) written in complex-Morlet form) and is
/// otherwise ignored by that family.
class MotherWavelet {
public:
    static constexpr double default_morlet_omega = 6.0;

    static MotherWavelet morlet(double omega = default_morlet_omega)
    {
        if (!(omega > 0.0) || !std::isfinite(omega))
            throw DomainError("morlet: omega must be positive, got " + format_shortest(omega));
        return MotherWavelet(Family::Morlet, omega, 2.0);
    }

    static MotherWavelet complex_morlet(double delta, double omega)
    {
        if (!(delta > 0.0) || !std::isfinite(delta))
            throw DomainError("complex morlet: delta must be positive, got " + format_shortest(delta));
        if (!(omega > 0.0) || !std::isfinite(omega))
            throw DomainError("complex morlet: omega must be positive, got " + format_shortest(omega));
        return MotherWavelet(Family::ComplexMorlet, omega, delta);
    }

    Family family() const noexcept { return family_; }
    double omega() const noexcept { return omega_; }
    double delta() const noexcept { return delta_; }

    /// Denominator c in the Gaussian envelope exp(-t^2 / c).
    double envelope_denominator() const noexcept { return family_ == Family::Morlet ? 2.0 : delta_; }

    double normalization() const noexcept
    {
        using std::numbers::pi;
        return family_ == Family::Morlet ? std::pow(pi, -0.25) : std::pow(pi * delta_, -0.25);
    }

    /// |t| at which the envelope has fallen by a factor e.
    double efold_time() const noexcept { return std::sqrt(envelope_denominator()); }

    /// |t| beyond which the envelope is below `threshold`.
    double support_radius(double threshold = 1e-12) const noexcept
    {
        return std::sqrt(-envelope_denominator() * std::log(threshold));
    }

    bool operator==(const MotherWavelet& o) const noexcept
    {
        return family_ == o.family_ && omega_ == o.omega_ && (family_ == Family::Morlet || delta_ == o.delta_);
    }

private:
    MotherWavelet(Family f, double omega, double delta) : family_(f), omega_(omega), delta_(delta) {}

    Family family_;
    double omega_;
    double delta_;
};

inline std::complex<double> evaluate(const MotherWavelet& w, double t)
{
    const double env = w.normalization() * std::exp(-t * t / w.envelope_denominator());
    return std::polar(env, w.omega() * t);
}

namespace detail {
inline std::string decimal_label(double x)
{
    auto s = format_shortest(x);
    if (s.find_first_of(".eE") == std::string::npos)
        s += ".0";
    return s;
}
} // namespace detail

/// Canonical label: "morl" for Morlet(omega = 6), "cmor<delta>-<omega>" otherwise.
///
/// Morlet with a non-default omega has no label of its own and is written
/// "morl<omega>".
inline std::string to_string(const MotherWavelet& w)
{
    if (w.family() == Family::Morlet) {
        if (w.omega() == MotherWavelet::default_morlet_omega)
            return "morl";
        return "morl" + detail::decimal_label(w.omega());
    }
    return "cmor" + detail::decimal_label(w.delta()) + "-" + detail::decimal_label(w.omega());
}

/// Inverse of to_string(). Accepts "morl", "morl<omega>" and "cmor<delta>-<omega>".
inline MotherWavelet parse_wavelet_name(std::string_view name)
{
    const std::string original(name);
    auto positive = [&](std::string_view token, const char* what) {
        auto v = parse_double(token);
        if (!v || !std::isfinite(*v))
            throw ParseError("wavelet '" + original + "': cannot parse " + what + " '" + std::string(token) + "'");
        if (*v <= 0.0)
            throw ParseError("wavelet '" + original + "': " + what + " '" + std::string(token) + "' must be positive");
        return *v;
    };

    if (name.starts_with("morl")) {
        auto rest = name.substr(4);
        if (rest.empty())
            return MotherWavelet::morlet();
        return MotherWavelet::morlet(positive(rest, "omega"));
    }
    if (name.starts_with("cmor")) {
        auto rest = name.substr(4);
        // Skip a leading sign and exponent signs ("1e-05") when looking for the separator.
        auto dash = rest.find('-', 1);
        while (dash != std::string_view::npos && (rest[dash - 1] == 'e' || rest[dash - 1] == 'E'))
            dash = rest.find('-', dash + 1);
        if (rest.empty() || dash == std::string_view::npos)
            throw ParseError("wavelet '" + original + "': expected cmor<delta>-<omega>");
        const double delta = positive(rest.substr(0, dash), "delta");
        const double omega = positive(rest.substr(dash + 1), "omega");
        return MotherWavelet::complex_morlet(delta, omega);
    }
    throw ParseError("wavelet '" + original + "': unknown family (expected 'morl' or 'cmor<delta>-<omega>')");
}

/// omega / (2 pi), in cycles per unit of the wavelet's time argument.
inline double center_frequency(const MotherWavelet& w) noexcept
{
    return w.omega() / (2.0 * std::numbers::pi);
}

inline double scale_to_frequency(const MotherWavelet& w, double scale, double dt)
{
    if (!(scale > 0.0))
        throw DomainError("scale_to_frequency: scale must be positive, got " + format_shortest(scale));
    if (!(dt > 0.0))
        throw DomainError("scale_to_frequency: dt must be positive, got " + format_shortest(dt));
    return center_frequency(w) / (scale * dt);
}

inline double frequency_to_scale(const MotherWavelet& w, double frequency, double dt)
{
    if (!(frequency > 0.0) || !(dt > 0.0))
        throw DomainError("frequency_to_scale: frequency and dt must be positive");
    return center_frequency(w) / (frequency * dt);
}

struct AdmissibilityReport {
    double mean_modulus = 0.0; ///< |integral of psi over the real line|
    bool admissible = false;
};

/// Integrates psi numerically over the window where its envelope exceeds 1e-12.
///
/// Uses the trapezoid rule, which converges geometrically for a Gaussian
/// integrand; the step resolves the carrier with at least 64 points per cycle.
inline AdmissibilityReport admissibility_diagnostic(const MotherWavelet& w, double tolerance)
{
    if (!(tolerance > 0.0))
        throw DomainError("admissibility_diagnostic: tolerance must be positive");
    const double radius = w.support_radius(1e-12);
    const double h = std::min(0.01, 2.0 * std::numbers::pi / w.omega() / 64.0);
    const auto steps = static_cast<long>(std::ceil(radius / h));
    std::complex<double> sum = evaluate(w, 0.0);
    for (long i = 1; i <= steps; ++i) {
        const double t = static_cast<double>(i) * h;
        sum += evaluate(w, t) + evaluate(w, -t);
    }
    const double mean = std::abs(sum * h);
    return {mean, mean <= tolerance};
}

} // namespace wavescope
