#pragma once

#include <complex>

namespace cavitychip::thermal {

// Substrate thermal properties. Defaults are sapphire on a 4 mm wafer.
struct MaterialProps {
    double conductivity = 40.0;    // W / (m K)
    double diffusivity = 1.3e-5;   // m^2 / s
    double expansion_coeff = 5.5e-6; // 1 / K
    double thickness = 4e-3;       // m, also the DC cutoff radius

    void validate() const;
};

inline MaterialProps sapphire() { return MaterialProps{}; }

enum class SourceKind { point, line };

// AC heat source on the surface of a half-space. amplitude is W for a
// point source, W/m for a line source.
struct HeatSource {
    SourceKind kind = SourceKind::line;
    double amplitude = 0.0;
};

// Temperature response T(r, omega) of a point source generating power
// p0 e^{-i omega t} at distance r. omega = 0 gives the steady state.
std::complex<double> point_response(double p0, double r, double omega,
                                    const MaterialProps& mat);

// Temperature response of a line source generating power per length a0 at
// perpendicular distance rho. omega must be positive: the steady-state
// line source diverges logarithmically, use dc_line_estimate instead.
std::complex<double> line_response(double a0, double rho, double omega,
                                   const MaterialProps& mat);

// Steady line-source temperature with an isothermal boundary at the cutoff
// radius: T = a0 / (pi k) ln(cutoff / rho).
double dc_line_estimate(double a0, double rho, double cutoff,
                        const MaterialProps& mat);

// Thermal expansion lift of the surface above a buried column: integrates
// beta T along depth from the surface to the substrate thickness, at
// lateral distance `offset` from the source. Complex for omega > 0.
std::complex<double> surface_lift(const HeatSource& source, double offset,
                                  double omega, const MaterialProps& mat,
                                  double quad_rel_tol = 1e-8);

struct CutoffScales {
    double omega_c; // rad/s, alpha / r^2
    double tau;     // s, r^2 / alpha
};

CutoffScales thermal_cutoff(double r, const MaterialProps& mat);

// Characteristic open-loop slew requirement, lift / tau.
double slew_estimate(double lift_dc, double tau);

// Ohmic power per unit length of a wire: I^2 resistivity / cross_section.
double line_power_per_length(double current, double cross_section,
                             double resistivity);

}
