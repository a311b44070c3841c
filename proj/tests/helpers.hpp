#pragma once

#include "cavitychip/constants.hpp"
#include "cavitychip/optics.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace test_helpers {

// forward model of the finesse-vs-length measurement with multiplicative
// noise on the finesse readings
inline std::vector<cavitychip::optics::FinesseSample>
synthetic_finesse(double a_true, double delta_fixed, double roc, double wavelength,
                  const std::vector<double>& lengths, double rel_noise,
                  std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<cavitychip::optics::FinesseSample> out;
    for (double L : lengths) {
        const double w0 = cavitychip::optics::mode_waist(L, roc, wavelength);
        const double dc =
            std::exp(-2.0 * a_true * a_true / (w0 * w0)) + delta_fixed;
        const double f_true = 2.0 * cavitychip::constants::pi / dc;
        const double f_meas = f_true * (1.0 + rel_noise * gauss(rng));
        out.push_back({L, f_meas, rel_noise > 0.0 ? rel_noise * f_meas : 0.0});
    }
    return out;
}

inline std::vector<double> log_lengths(double lmin, double lmax, int n)
{
    std::vector<double> v;
    for (int i = 0; i < n; ++i)
        v.push_back(lmin * std::pow(lmax / lmin, double(i) / double(n - 1)));
    return v;
}

}
