#include "cavitychip/optics.hpp"
#include "cavitychip/constants.hpp"
#include "cavitychip/quadrature.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <cstdio>
#include <fstream>

using namespace cavitychip;
using cavitychip::constants::pi;

TEST_CASE("mode waist")
{
    // frozen closed-form values, plano-concave waist at the flat mirror
    CHECK(optics::mode_waist(25e-6, 5e-2, 780e-9) ==
          doctest::Approx(16.659e-6).epsilon(1e-3));
    CHECK(optics::mode_waist(100e-6, 5e-2, 780e-9) ==
          doctest::Approx(23.550e-6).epsilon(1e-3));

    // monotone on (0, R/2], symmetric about R/2, small-L limit
    double prev = 0.0;
    for (double l = 1e-6; l <= 2.5e-2; l *= 1.8) {
        const double w = optics::mode_waist(l, 5e-2, 780e-9);
        CHECK(w > prev);
        prev = w;
    }
    CHECK(optics::mode_waist(1e-3, 5e-2, 780e-9) ==
          doctest::Approx(optics::mode_waist(5e-2 - 1e-3, 5e-2, 780e-9))
              .epsilon(1e-12));
    CHECK(optics::mode_waist(1e-12, 5e-2, 780e-9) < 1e-6);

    CHECK_THROWS_AS((void)optics::mode_waist(0.0, 5e-2, 780e-9), std::domain_error);
    CHECK_THROWS_AS((void)optics::mode_waist(5e-2, 5e-2, 780e-9), std::domain_error);
    CHECK_THROWS_AS((void)optics::mode_waist(6e-2, 5e-2, 780e-9), std::domain_error);
}

TEST_CASE("diffraction loss")
{
    CHECK(optics::diffraction_loss(1e-5, 1e-5) ==
          doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
    const double w25 = optics::mode_waist(25e-6, 5e-2, 780e-9);
    const double w100 = optics::mode_waist(100e-6, 5e-2, 780e-9);
    CHECK(optics::diffraction_loss(47e-6, w25) ==
          doctest::Approx(1.215e-7).epsilon(0.01));
    CHECK(optics::diffraction_loss(47e-6, w100) ==
          doctest::Approx(3.47e-4).epsilon(0.01));

    // strictly decreasing in a, increasing in w0
    CHECK(optics::diffraction_loss(50e-6, 20e-6) <
          optics::diffraction_loss(45e-6, 20e-6));
    CHECK(optics::diffraction_loss(50e-6, 22e-6) >
          optics::diffraction_loss(50e-6, 20e-6));
}

TEST_CASE("clipping integral quadrature agrees with the closed form")
{
    // the fraction of Gaussian power outside radius a, integrated
    // numerically, is the independent route to e^{-2a^2/w0^2}
    for (double ratio : {0.5, 1.0, 1.5, 2.2}) {
        const double w0 = 18e-6;
        const double a = ratio * w0;
        auto intensity = [&](double r) {
            return 2.0 / (pi * w0 * w0) * std::exp(-2.0 * r * r / (w0 * w0)) *
                   2.0 * pi * r;
        };
        quadrature::Options opt;
        opt.rel_tol = 1e-13;
        const double outside =
            quadrature::integrate<double>(intensity, a, a + 8.0 * w0, opt);
        CHECK(std::fabs(outside - optics::diffraction_loss(a, w0)) < 1e-12);
    }
}

TEST_CASE("finesse from losses")
{
    const double w25 = optics::mode_waist(25e-6, 5e-2, 780e-9);
    const double f = optics::finesse_from_losses(20e-6, 11.4e-6, 47e-6, w25);
    CHECK(f == doctest::Approx(2.0e5).epsilon(0.01));

    // F delta_c = 2 pi identity
    const double delta_c = optics::diffraction_loss(47e-6, w25) + 31.4e-6;
    CHECK(f * delta_c == doctest::Approx(2.0 * pi).epsilon(1e-14));

    const double w100 = optics::mode_waist(100e-6, 5e-2, 780e-9);
    CHECK(optics::finesse_from_losses(20e-6, 11.4e-6, 47e-6, w100) ==
          doctest::Approx(1.66e4).epsilon(0.02));

    // zero loss is a contract violation, not infinity
    CHECK_THROWS_AS(
        (void)optics::finesse_from_losses(0.0, 0.0, 1.0, 1e-6),
        std::domain_error);
    CHECK_THROWS_AS((void)optics::finesse_from_losses(0.6, 0.5, 1e-6, 1e-4),
                    std::domain_error);
}

TEST_CASE("linewidth and fsr")
{
    CHECK(optics::cavity_linewidth(215e-6, 2e4) ==
          doctest::Approx(34.86e6).epsilon(1e-3));
    CHECK(optics::cavity_linewidth(215e-6, 2e5) ==
          doctest::Approx(3.486e6).epsilon(1e-3));
    CHECK(optics::cavity_linewidth(215e-6, 4e4) ==
          doctest::Approx(0.5 * optics::cavity_linewidth(215e-6, 2e4))
              .epsilon(1e-14));
    CHECK(optics::free_spectral_range(215e-6) ==
          doctest::Approx(6.972e11).epsilon(1e-3));
}

TEST_CASE("cooperativity")
{
    const double c = optics::cooperativity(25e-6, 5e-2, 780e-9, 2e5);
    CHECK(c == doctest::Approx(42.42).epsilon(2e-3));
    // linear in finesse
    CHECK(optics::cooperativity(25e-6, 5e-2, 780e-9, 4e5) ==
          doctest::Approx(2.0 * c).epsilon(1e-14));
    // halving the chip loss roughly doubles F and therefore C
    const double w25 = optics::mode_waist(25e-6, 5e-2, 780e-9);
    const double f1 = optics::finesse_from_losses(20e-6, 11.4e-6, 47e-6, w25);
    const double f2 = optics::finesse_from_losses(10e-6, 5.7e-6, 47e-6, w25);
    CHECK(optics::cooperativity(25e-6, 5e-2, 780e-9, f2) >=
          2.0 * optics::cooperativity(25e-6, 5e-2, 780e-9, f1) * 0.99);

    // C at fixed finesse peaks at the smallest spacing on the tested grid
    double best_l = 0.0, best_c = 0.0;
    for (double l = 25e-6; l < 5e-2; l *= 2.0) {
        const double cc = optics::cooperativity(l, 5e-2, 780e-9, 2e5);
        if (cc > best_c) {
            best_c = cc;
            best_l = l;
        }
    }
    CHECK(best_l == 25e-6);
}

TEST_CASE("displacement per linewidth")
{
    CHECK(optics::displacement_per_linewidth(780e-9, 1e5) ==
          doctest::Approx(3.9e-12).epsilon(1e-12));
    CHECK(optics::displacement_per_linewidth(780e-9, 2e5) ==
          doctest::Approx(1.95e-12).epsilon(1e-12));
    CHECK(optics::displacement_per_linewidth(780e-9, 1e12) < 1e-18);
}

TEST_CASE("vacuum Rabi g closes the cooperativity definition")
{
    const double gamma = 2 * pi * 3.03e6;
    const double f = 2e5;
    const double g = optics::vacuum_rabi_g(25e-6, 5e-2, 780e-9, f, gamma);
    const double kappa = pi * optics::cavity_linewidth(25e-6, f);
    const double c_back = g * g / (2.0 * kappa * gamma);
    CHECK(c_back == doctest::Approx(optics::cooperativity(25e-6, 5e-2, 780e-9, f))
                        .epsilon(1e-12));
}

TEST_CASE("derive_mode invariants")
{
    optics::CavitySpec spec;
    const auto m = optics::derive_mode(spec);
    CHECK(m.finesse * m.round_trip_loss == doctest::Approx(2 * pi).epsilon(1e-14));
    CHECK(m.linewidth_fwhm == doctest::Approx(m.fsr / m.finesse).epsilon(1e-14));
    CHECK(m.waist > 0);
    CHECK(m.cooperativity > 0);

    optics::CavitySpec bad = spec;
    bad.length = 6e-2;
    CHECK_THROWS_AS((void)optics::derive_mode(bad), std::domain_error);
}

TEST_CASE("radius fit recovers noise-free data exactly")
{
    const auto lengths = test_helpers::log_lengths(25e-6, 250e-6, 8);
    const auto samples =
        test_helpers::synthetic_finesse(47e-6, 31.4e-6, 5e-2, 780e-9, lengths,
                                        0.0, 0);
    const auto fit = optics::fit_mirror_radius(samples, 5e-2, 780e-9);
    CHECK(fit.converged);
    CHECK(fit.aperture_radius == doctest::Approx(47e-6).epsilon(1e-6));
    CHECK(fit.fixed_loss == doctest::Approx(31.4e-6).epsilon(1e-6));
    CHECK(fit.chi2 < 1e-12);
}

TEST_CASE("radius fit recovers noisy data within tolerance")
{
    const auto lengths = test_helpers::log_lengths(25e-6, 250e-6, 8);
    const auto samples =
        test_helpers::synthetic_finesse(47e-6, 31.4e-6, 5e-2, 780e-9, lengths,
                                        0.03, 12345);
    const auto fit = optics::fit_mirror_radius(samples, 5e-2, 780e-9);
    CHECK(fit.converged);
    CHECK(std::fabs(fit.aperture_radius / 47e-6 - 1.0) < 0.02);
    CHECK(std::fabs(fit.fixed_loss / 31.4e-6 - 1.0) < 0.10);
}

TEST_CASE("radius fit invariances and preconditions")
{
    const auto lengths = test_helpers::log_lengths(30e-6, 220e-6, 7);
    auto samples = test_helpers::synthetic_finesse(55e-6, 25e-6, 5e-2, 780e-9,
                                                   lengths, 0.03, 77);
    const auto fit1 = optics::fit_mirror_radius(samples, 5e-2, 780e-9);

    // reorder
    std::swap(samples[0], samples[5]);
    std::swap(samples[2], samples[6]);
    const auto fit2 = optics::fit_mirror_radius(samples, 5e-2, 780e-9);
    CHECK(fit2.aperture_radius ==
          doctest::Approx(fit1.aperture_radius).epsilon(1e-9));

    // uniform sigma rescale
    for (auto& s : samples)
        s.finesse_uncertainty *= 7.5;
    const auto fit3 = optics::fit_mirror_radius(samples, 5e-2, 780e-9);
    CHECK(fit3.aperture_radius ==
          doctest::Approx(fit1.aperture_radius).epsilon(1e-9));
    CHECK(fit3.fixed_loss == doctest::Approx(fit1.fixed_loss).epsilon(1e-9));

    CHECK_THROWS_AS((void)optics::fit_mirror_radius(
                        {samples[0], samples[1]}, 5e-2, 780e-9),
                    std::invalid_argument);
    // degenerate span
    auto flat = test_helpers::synthetic_finesse(47e-6, 31.4e-6, 5e-2, 780e-9,
                                                {1e-4, 1.1e-4, 1.2e-4}, 0.0, 0);
    CHECK_THROWS_AS((void)optics::fit_mirror_radius(flat, 5e-2, 780e-9),
                    std::invalid_argument);
}

TEST_CASE("finesse CSV ingestion")
{
    const std::string path = "test_finesse_tmp.csv";
    {
        std::ofstream f(path);
        f << "length_um,finesse,sigma_finesse\n";
        f << "25,200000,10000\n";
        f << "50,150000\n";
        f << "# comment\n";
        f << "100,16000,800\n";
    }
    const auto samples = optics::load_finesse_csv(path);
    REQUIRE(samples.size() == 3);
    CHECK(samples[0].length == doctest::Approx(25e-6));
    CHECK(samples[1].finesse_uncertainty == 0.0);
    CHECK(samples[2].finesse == doctest::Approx(16000));

    {
        std::ofstream f(path);
        f << "length_um,finesse\n25,abc\n";
    }
    CHECK_THROWS_WITH_AS((void)optics::load_finesse_csv(path),
                         doctest::Contains(":2"), std::runtime_error);
    {
        std::ofstream f(path);
        f << "wrong,header\n";
    }
    CHECK_THROWS_AS((void)optics::load_finesse_csv(path), std::runtime_error);
    std::remove(path.c_str());
}
