#pragma once

#include <complex>

namespace cavitychip::specfun {

// Complex-argument Bessel functions of order zero, evaluated by an
// ascending power series below |z| = 12 and by the Hankel asymptotic
// expansion above. Arguments are limited to |z| <= 1e4 and to results
// representable in double precision.

// J0(z). Entire function, even in z.
std::complex<double> bessel_j0(std::complex<double> z);

// Y0(z), principal branch. z = 0 and the negative real axis are out of
// domain (logarithmic singularity / branch cut).
std::complex<double> bessel_y0(std::complex<double> z);

// H0^(2)(z) = J0(z) - i Y0(z). In the series regime this is formed
// literally from bessel_j0 and bessel_y0; in the asymptotic regime it is
// summed from its own (decaying-wave) expansion, since the subtraction
// J0 - i Y0 cancels catastrophically for Im z < 0 at large |z|.
std::complex<double> hankel2_0(std::complex<double> z);

// |z| threshold between series and asymptotic evaluation.
inline constexpr double series_asymptotic_crossover = 12.0;

// H0^(2) crosses over earlier: forming J0 - i Y0 from the series cancels
// catastrophically below the real axis well before |z| = 12.
inline constexpr double hankel_series_crossover = 10.25;

}
