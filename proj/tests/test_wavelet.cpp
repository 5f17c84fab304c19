#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include <wavescope/wavelet.hpp>

using namespace wavescope;
using Catch::Approx;

namespace {
constexpr double pi = std::numbers::pi;

// Closed forms of the integral of psi over the real line.
double morlet_mean(double omega) { return std::pow(pi, 0.25) * std::sqrt(2.0) * std::exp(-omega * omega / 2.0); }
double cmor_mean(double delta, double omega) { return std::pow(pi * delta, 0.25) * std::exp(-delta * omega * omega / 4.0); }
} // namespace

TEST_CASE("evaluate at the origin is the normalization constant")
{
    const auto m = evaluate(MotherWavelet::morlet(), 0.0);
    CHECK(m.real() == Approx(0.7511255444649425).epsilon(1e-15));
    CHECK(m.imag() == 0.0);

    const auto c = evaluate(MotherWavelet::complex_morlet(1.5, 1.0), 0.0);
    CHECK(c.real() == Approx(0.6787185469410576).epsilon(1e-15));
    CHECK(c.imag() == 0.0);
}

TEST_CASE("Morlet one carrier period out is real positive")
{
    const double t = 2.0 * pi / 6.0;
    const auto v = evaluate(MotherWavelet::morlet(), t);
    CHECK(std::abs(v) == Approx(std::pow(pi, -0.25) * std::exp(-t * t / 2.0)).epsilon(1e-14));
    CHECK(std::abs(v.imag()) < 1e-15);
    CHECK(v.real() > 0.0);
}

TEST_CASE("parse_wavelet_name")
{
    const auto c = parse_wavelet_name("cmor1.5-1.0");
    CHECK(c.family() == Family::ComplexMorlet);
    CHECK(c.delta() == 1.5);
    CHECK(c.omega() == 1.0);

    const auto m = parse_wavelet_name("morl");
    CHECK(m.family() == Family::Morlet);
    CHECK(m.omega() == 6.0);

    CHECK(parse_wavelet_name("morl5").omega() == 5.0);
    CHECK(parse_wavelet_name("cmor1e-05-2.0").delta() == 1e-05);

    SECTION("errors name the offending token")
    {
        try {
            parse_wavelet_name("cmor0-1.0");
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("'0'") != std::string::npos);
        }
        CHECK_THROWS_AS(parse_wavelet_name("cmor1.5-0"), ParseError);
        CHECK_THROWS_AS(parse_wavelet_name("cmor-1-1"), ParseError);
        CHECK_THROWS_AS(parse_wavelet_name("cmor1.5"), ParseError);
        CHECK_THROWS_AS(parse_wavelet_name("cmorx-1"), ParseError);
        CHECK_THROWS_AS(parse_wavelet_name("haar"), ParseError);
        CHECK_THROWS_AS(parse_wavelet_name(""), ParseError);
        try {
            parse_wavelet_name("cmor1.5-abc");
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("'abc'") != std::string::npos);
        }
    }
}

TEST_CASE("canonical names round-trip")
{
    CHECK(to_string(MotherWavelet::morlet()) == "morl");
    CHECK(to_string(MotherWavelet::complex_morlet(1.5, 1.0)) == "cmor1.5-1.0");

    for (const char* s : {"morl", "cmor1.5-1.0", "cmor1.50-1", "cmor0.25-6", "morl7.5", "cmor1e-05-2.0"}) {
        const auto canonical = to_string(parse_wavelet_name(s));
        INFO(s << " -> " << canonical);
        CHECK(to_string(parse_wavelet_name(canonical)) == canonical);
        CHECK(parse_wavelet_name(canonical) == parse_wavelet_name(s));
    }
    CHECK(to_string(parse_wavelet_name("cmor1.50-1")) == "cmor1.5-1.0");

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> pos(1e-3, 20.0);
    for (int i = 0; i < 200; ++i) {
        const auto w = MotherWavelet::complex_morlet(pos(rng), pos(rng));
        CHECK(parse_wavelet_name(to_string(w)) == w);
    }
}

TEST_CASE("frequency conversions")
{
    const auto m = MotherWavelet::morlet();
    const auto c = MotherWavelet::complex_morlet(1.5, 1.0);
    CHECK(center_frequency(m) == Approx(0.954929658551372).epsilon(1e-14));
    CHECK(center_frequency(c) == Approx(0.15915494309189535).epsilon(1e-14));
    CHECK(center_frequency(MotherWavelet::complex_morlet(3.0, 2.0 * pi)) == Approx(1.0).epsilon(1e-15));

    CHECK(scale_to_frequency(m, 1.0, 1.0) == Approx(0.954929658551372).epsilon(1e-14));
    CHECK(scale_to_frequency(m, 2.0, 1.0) == Approx(0.477464829275686).epsilon(1e-14));
    // 0.1591549 is 1/(2 pi) rounded to 7 digits.
    CHECK(scale_to_frequency(c, 0.1591549, 1.0) == Approx(1.0).epsilon(1e-6));
    CHECK(frequency_to_scale(m, scale_to_frequency(m, 13.7, 0.5), 0.5) == Approx(13.7).epsilon(1e-14));

    CHECK_THROWS_AS(scale_to_frequency(m, 0.0, 1.0), DomainError);
    CHECK_THROWS_AS(scale_to_frequency(m, 1.0, -1.0), DomainError);
}

TEST_CASE("admissibility diagnostic matches the closed-form mean")
{
    const auto m6 = admissibility_diagnostic(MotherWavelet::morlet(6.0), 1e-6);
    CHECK(m6.admissible);
    CHECK(m6.mean_modulus == Approx(morlet_mean(6.0)).margin(1e-12));

    const auto m1 = admissibility_diagnostic(MotherWavelet::morlet(1.0), 1e-6);
    CHECK_FALSE(m1.admissible);
    CHECK(m1.mean_modulus == Approx(morlet_mean(1.0)).epsilon(1e-9));

    const auto c = admissibility_diagnostic(MotherWavelet::complex_morlet(1.5, 6.0), 1e-4);
    CHECK(c.admissible);
    CHECK(c.mean_modulus == Approx(cmor_mean(1.5, 6.0)).margin(1e-12));

    CHECK_THROWS_AS(admissibility_diagnostic(MotherWavelet::morlet(), 0.0), DomainError);
}

TEST_CASE("construction rejects non-positive parameters")
{
    CHECK_THROWS_AS(MotherWavelet::morlet(0.0), DomainError);
    CHECK_THROWS_AS(MotherWavelet::complex_morlet(0.0, 1.0), DomainError);
    CHECK_THROWS_AS(MotherWavelet::complex_morlet(1.0, -2.0), DomainError);
}

TEST_CASE("modulus properties")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> tdist(-6.0, 6.0);
    for (const auto& w : {MotherWavelet::morlet(), MotherWavelet::complex_morlet(1.5, 1.0),
                          MotherWavelet::complex_morlet(0.5, 4.0)}) {
        for (int i = 0; i < 200; ++i) {
            const double t = tdist(rng);
            const auto v = evaluate(w, t);
            // even modulus
            CHECK(std::abs(v) == Approx(std::abs(evaluate(w, -t))).epsilon(1e-14));
            // strictly decreasing in |t|
            const double further = std::abs(t) + 0.05;
            CHECK(std::abs(evaluate(w, further)) < std::abs(v));
            // argument is omega t mod 2 pi
            const double expected = std::remainder(w.omega() * t, 2.0 * pi);
            const double diff = std::remainder(std::arg(v) - expected, 2.0 * pi);
            CHECK(std::abs(diff) < 1e-12);
        }
    }
}

TEST_CASE("larger delta decays more slowly")
{
    for (double t : {0.3, 1.0, 2.5}) {
        double previous = 0.0;
        for (double delta : {0.5, 1.0, 1.5, 3.0, 10.0}) {
            const auto w = MotherWavelet::complex_morlet(delta, 1.0);
            const double ratio = std::abs(evaluate(w, t)) / std::abs(evaluate(w, 0.0));
            CHECK(ratio > previous);
            previous = ratio;
        }
    }
}
