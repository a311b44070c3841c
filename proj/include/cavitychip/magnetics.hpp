#pragma once

#include <array>
#include <vector>

namespace cavitychip::magnetics {

// Straight wires along y on the chip surface, described in the transverse
// (x, z) plane. Fields are the infinite-wire Biot-Savart results.

struct Wire {
    double x = 0.0;      // m, lateral position
    double z = 0.0;      // m, height
    double current = 0.0; // A, along +y
};

struct WireSet {
    std::vector<Wire> wires;
    std::array<double, 2> bias_field = {0.0, 0.0}; // T, (Bx, Bz)
};

struct FieldAndGradient {
    std::array<double, 2> field;              // T, (Bx, Bz)
    std::array<std::array<double, 2>, 2> grad; // T/m, d(Bx,Bz)/d(x,z)
};

// |B| of a single infinite wire at distance r.
double wire_field(double current, double r);

// Vector field and analytic gradient of a wire set plus bias at a point.
FieldAndGradient waveguide_field_and_gradient(const WireSet& ws,
                                              std::array<double, 2> point);

// Magnetic-moment energy scale mu_B B / k_B in kelvin, for judging heater
// ripple against trap depths. The drive frequency is accepted for report
// context and does not enter the scale.
double heater_ripple_potential(double b_ripple, double frequency);

// Committed default geometry: a 3 A pair straddling a 100 um mirror pad.
WireSet default_waveguide();

// Evaluation point paired with default_waveguide() for quoted gradients.
std::array<double, 2> default_waveguide_eval_point();

}
