#include "cavitychip/specfun.hpp"
#include "cavitychip/constants.hpp"

#include <cmath>
#include <stdexcept>

namespace cavitychip::specfun {

namespace {

using cplx = std::complex<double>;
constexpr double euler_gamma = 0.57721566490153286060651209008240243;

// largest exponent for which e^x still fits in a double
constexpr double exp_overflow_limit = 709.0;

void check_supported(const cplx& z)
{
    if (std::abs(z) > 1e4)
        throw std::domain_error("specfun: |z| > 1e4 is outside the supported range");
}

// Ascending series, |z| < crossover.
// J0(z) = sum_k (-q)^k / (k!)^2, q = z^2/4
cplx j0_series(const cplx& z)
{
    const cplx q = 0.25 * z * z;
    cplx term(1.0, 0.0), sum(1.0, 0.0);
    for (int k = 1; k <= 200; ++k) {
        term *= -q / double(k * k);
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum) && double(k) > std::abs(z))
            break;
    }
    return sum;
}

// Y0(z) = (2/pi) [ (ln(z/2) + gamma) J0(z) + sum_{k>=1} (-1)^{k+1} H_k q^k/(k!)^2 ]
cplx y0_series(const cplx& z, const cplx& j0)
{
    const cplx q = 0.25 * z * z;
    cplx u(1.0, 0.0);   // q^k/(k!)^2
    double h = 0.0;     // harmonic number H_k
    cplx sum(0.0, 0.0);
    double sign = 1.0;
    for (int k = 1; k <= 200; ++k) {
        u *= q / double(k * k);
        h += 1.0 / double(k);
        const cplx term = sign * h * u;
        sum += term;
        sign = -sign;
        if (std::abs(term) < 1e-18 * std::abs(sum) && double(k) > std::abs(z))
            break;
    }
    return (2.0 / constants::pi) * ((std::log(0.5 * z) + euler_gamma) * j0 + sum);
}

// Hankel asymptotic sum S(z) = sum_k a_k (s*i/z)^k with
// a_k = ((2k-1)!!)^2 (-1)^k / (k! 8^k); s = +1 gives H0^(1), s = -1 gives H0^(2).
// Truncated at the smallest term (the series is divergent).
cplx hankel_sum(const cplx& z, double s)
{
    const cplx w = cplx(0.0, s) / z;
    cplx term(1.0, 0.0), sum(1.0, 0.0);
    double prev = 1.0;
    for (int k = 0; k < 40; ++k) {
        // a_{k+1}/a_k = -(2k+1)^2 / (8(k+1))
        const double ratio = double((2 * k + 1) * (2 * k + 1)) / (8.0 * double(k + 1));
        term *= -ratio * w;
        const double mag = std::abs(term);
        if (mag >= prev)
            break; // past the optimal truncation point
        sum += term;
        if (mag < 1e-18 * std::abs(sum))
            break;
        prev = mag;
    }
    return sum;
}

// e^{+i(z - pi/4)} sqrt(2/(pi z)) S1 for kind = 1,
// e^{-i(z - pi/4)} sqrt(2/(pi z)) S2 for kind = 2 (principal sqrt).
cplx hankel_asymptotic(const cplx& z, int kind)
{
    const double s = (kind == 1) ? 1.0 : -1.0;
    const double grow = -s * z.imag(); // log magnitude of the exponential factor
    if (grow > exp_overflow_limit)
        throw std::domain_error("specfun: result exceeds double range");
    const cplx phase = std::exp(cplx(0.0, s) * (z - cplx(constants::pi / 4.0, 0.0)));
    const cplx amp = std::sqrt(2.0 / (constants::pi * z));
    return amp * phase * hankel_sum(z, s);
}

} // namespace

cplx bessel_j0(cplx z)
{
    check_supported(z);
    if (std::abs(z) < series_asymptotic_crossover)
        return j0_series(z);
    if (z.real() < 0.0)
        z = -z; // J0 is even; keeps the principal sqrt away from its cut
    const cplx h1 = hankel_asymptotic(z, 1);
    const cplx h2 = hankel_asymptotic(z, 2);
    return 0.5 * (h1 + h2);
}

cplx bessel_y0(cplx z)
{
    check_supported(z);
    if (z == cplx(0.0, 0.0))
        throw std::domain_error("specfun: Y0 is singular at z = 0");
    if (z.imag() == 0.0 && z.real() < 0.0)
        throw std::domain_error("specfun: Y0 branch cut on the negative real axis");
    if (std::abs(z) < series_asymptotic_crossover)
        return y0_series(z, j0_series(z));
    const cplx h1 = hankel_asymptotic(z, 1);
    const cplx h2 = hankel_asymptotic(z, 2);
    return cplx(0.0, -0.5) * (h1 - h2);
}

cplx hankel2_0(cplx z)
{
    check_supported(z);
    if (z == cplx(0.0, 0.0))
        throw std::domain_error("specfun: H0^(2) is singular at z = 0");
    if (z.imag() == 0.0 && z.real() < 0.0)
        throw std::domain_error("specfun: H0^(2) branch cut on the negative real axis");
    // H0^(2) switches to its expansion earlier than J0/Y0: below the real
    // axis the series difference J0 - i Y0 loses ~e^{1.4|z|} to cancellation,
    // while the expansion's optimal truncation is already ~6e-10 at |z|=10.3
    if (std::abs(z) < hankel_series_crossover) {
        const cplx j0 = j0_series(z);
        const cplx y0 = y0_series(z, j0);
        return j0 - cplx(0.0, 1.0) * y0;
    }
    return hankel_asymptotic(z, 2);
}

}
