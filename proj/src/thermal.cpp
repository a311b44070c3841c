#include "cavitychip/thermal.hpp"
#include "cavitychip/constants.hpp"
#include "cavitychip/quadrature.hpp"
#include "cavitychip/specfun.hpp"

#include <cmath>
#include <stdexcept>

namespace cavitychip::thermal {

using constants::pi;
using cplx = std::complex<double>;

void MaterialProps::validate() const
{
    if (!(conductivity > 0.0) || !(diffusivity > 0.0) ||
        !(expansion_coeff > 0.0) || !(thickness > 0.0))
        throw std::domain_error("thermal: material properties must be positive");
}

cplx point_response(double p0, double r, double omega, const MaterialProps& mat)
{
    if (!(r > 0.0))
        throw std::domain_error("thermal: point source distance must be positive");
    if (omega < 0.0)
        throw std::domain_error("thermal: omega must be >= 0");
    const double dc = p0 / (2.0 * pi * mat.conductivity * r);
    if (omega == 0.0)
        return cplx(dc, 0.0);
    // sqrt(i u) = sqrt(u) e^{i pi/4}, decaying branch
    const double u = std::sqrt(omega * r * r / mat.diffusivity);
    const cplx exponent = -u * cplx(std::sqrt(0.5), std::sqrt(0.5));
    return dc * std::exp(exponent);
}

cplx line_response(double a0, double rho, double omega, const MaterialProps& mat)
{
    if (!(rho > 0.0))
        throw std::domain_error("thermal: line source distance must be positive");
    if (!(omega > 0.0))
        throw std::domain_error(
            "thermal: line source diverges at DC, use dc_line_estimate");
    if (a0 == 0.0)
        return cplx(0.0, 0.0);
    // argument sqrt(-i omega rho^2 / alpha) = sqrt(omega/alpha) rho e^{-i pi/4}
    const double u = std::sqrt(omega / mat.diffusivity) * rho;
    const cplx z = u * cplx(std::sqrt(0.5), -std::sqrt(0.5));
    return cplx(0.0, -a0 / (2.0 * mat.conductivity)) * specfun::hankel2_0(z);
}

double dc_line_estimate(double a0, double rho, double cutoff,
                        const MaterialProps& mat)
{
    if (!(rho > 0.0) || !(rho < cutoff))
        throw std::domain_error("thermal: need 0 < rho < cutoff");
    return a0 / (pi * mat.conductivity) * std::log(cutoff / rho);
}

cplx surface_lift(const HeatSource& source, double offset, double omega,
                  const MaterialProps& mat, double quad_rel_tol)
{
    if (!(offset > 0.0))
        throw std::domain_error("thermal: lateral offset must be positive");
    if (source.amplitude == 0.0 || mat.expansion_coeff == 0.0)
        return cplx(0.0, 0.0);
    mat.validate();

    quadrature::Options opt;
    opt.rel_tol = quad_rel_tol;

    const double depth = mat.thickness;
    auto kernel = [&](double z) -> cplx {
        const double dist = std::hypot(offset, z);
        if (source.kind == SourceKind::point)
            return point_response(source.amplitude, dist, omega, mat);
        if (omega > 0.0)
            return line_response(source.amplitude, dist, omega, mat);
        // DC line: cutoff-regularized kernel; clamp at zero where the
        // column reaches the isothermal boundary
        if (dist >= mat.thickness)
            return cplx(0.0, 0.0);
        return cplx(dc_line_estimate(source.amplitude, dist, mat.thickness, mat), 0.0);
    };

    const cplx integral = quadrature::integrate<cplx>(kernel, 0.0, depth, opt);
    return mat.expansion_coeff * integral;
}

CutoffScales thermal_cutoff(double r, const MaterialProps& mat)
{
    if (!(r > 0.0))
        throw std::domain_error("thermal: distance must be positive");
    CutoffScales s;
    s.omega_c = mat.diffusivity / (r * r);
    s.tau = 1.0 / s.omega_c;
    return s;
}

double slew_estimate(double lift_dc, double tau)
{
    if (lift_dc < 0.0 || !(tau > 0.0))
        throw std::domain_error("thermal: slew estimate needs lift >= 0 and tau > 0");
    return lift_dc / tau;
}

double line_power_per_length(double current, double cross_section,
                             double resistivity)
{
    if (!(cross_section > 0.0) || !(resistivity > 0.0))
        throw std::domain_error("thermal: cross section and resistivity must be positive");
    return current * current * resistivity / cross_section;
}

}
