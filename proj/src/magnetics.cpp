#include "cavitychip/magnetics.hpp"
#include "cavitychip/constants.hpp"

#include <cmath>
#include <stdexcept>

namespace cavitychip::magnetics {

using constants::mu0;
using constants::pi;

double wire_field(double current, double r)
{
    if (!(r > 0.0))
        throw std::domain_error("magnetics: distance must be positive");
    return mu0 * current / (2.0 * pi * r);
}

FieldAndGradient waveguide_field_and_gradient(const WireSet& ws,
                                              std::array<double, 2> point)
{
    FieldAndGradient out;
    out.field = ws.bias_field;
    out.grad = {{{0.0, 0.0}, {0.0, 0.0}}};

    for (const auto& w : ws.wires) {
        const double dx = point[0] - w.x;
        const double dz = point[1] - w.z;
        const double r2 = dx * dx + dz * dz;
        if (r2 == 0.0)
            throw std::domain_error("magnetics: evaluation point lies on a wire");
        const double c = mu0 * w.current / (2.0 * pi);
        // field of a +y wire in the transverse plane: B = c (dz, -dx) / r^2
        out.field[0] += c * dz / r2;
        out.field[1] += -c * dx / r2;
        const double r4 = r2 * r2;
        out.grad[0][0] += c * (-2.0 * dx * dz) / r4;        // dBx/dx
        out.grad[0][1] += c * (r2 - 2.0 * dz * dz) / r4;    // dBx/dz
        out.grad[1][0] += -c * (r2 - 2.0 * dx * dx) / r4;   // dBz/dx
        out.grad[1][1] += c * (2.0 * dx * dz) / r4;         // dBz/dz
    }
    return out;
}

double heater_ripple_potential(double b_ripple, double frequency)
{
    if (b_ripple < 0.0 || frequency < 0.0)
        throw std::domain_error("magnetics: ripple field and frequency must be >= 0");
    return constants::mu_bohr * b_ripple / constants::k_boltzmann;
}

WireSet default_waveguide()
{
    WireSet ws;
    ws.wires = {{-75e-6, 0.0, 3.0}, {75e-6, 0.0, 3.0}};
    return ws;
}

std::array<double, 2> default_waveguide_eval_point()
{
    // guide height for the co-propagating pair; at z equal to the wire
    // half-separation the transverse gradient vanishes by symmetry
    return {0.0, 50e-6};
}

}
