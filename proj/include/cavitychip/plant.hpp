#pragma once

#include "cavitychip/ratfit.hpp"
#include "cavitychip/thermal.hpp"

#include <complex>
#include <vector>

namespace cavitychip::plant {

// Cavity-resonance plant: PZT path to the curved mirror, heater path and
// magnet-wire disturbance path to the on-chip mirror through substrate
// expansion, plus the RTD temperature readout. The diffusive paths are
// evaluated from the half-space kernels and fitted once with stable
// rational surrogates so the scenario loop can advance each mode by its
// exact exponential update.

struct PlantConfig {
    // cavity readout
    double cavity_length = 215e-6; // m
    double wavelength = 850e-9;    // m, probe
    double finesse = 2e4;

    thermal::MaterialProps material;

    // thermal path geometry
    double heater_distance = 10e-6;
    double disturbance_distance = 100e-6;
    double rtd_heater_distance = 20e-6;
    double rtd_disturbance_distance = 100e-6;

    // PZT path; positive volts shorten the cavity
    double pzt_gain = 10e-9;       // m/V
    double pzt_resonance_hz = 10e3;
    double pzt_q = 10.0;

    // flat fast fraction of the heater displacement path
    double fast_path_fraction = 1e-3;

    double heater_resistance = 2e3;                // ohm
    double waveguide_resistance_per_length = 56.7; // ohm/m, 300 um^2 copper
    double sio2_lag = 0.0;  // s, optional first-order lag on disturbance heat
    bool heater_uses_line_kernel = false; // heater shares the disturbance kernel

    // rational surrogate fitting
    int n_poles = 12;
    double fit_fmin_hz = 0.1;
    double fit_fmax_hz = 1e6;
    int fit_samples = 96;

    double fsr() const;
    double linewidth_fwhm() const;
    double optical_frequency() const;
    double hz_per_meter() const; // resonance shift per unit cavity shortening
    void validate() const;
};

// Direct Green's-function frequency responses (no surrogate).
std::complex<double> thermal_actuator_response(const PlantConfig& cfg,
                                               double omega); // m per W
std::complex<double> disturbance_lift_response(const PlantConfig& cfg,
                                               double omega); // m per (W/m)
std::complex<double> heater_rtd_response(const PlantConfig& cfg,
                                         double omega);       // K per W
std::complex<double> disturbance_rtd_response(const PlantConfig& cfg,
                                              double omega);  // K per (W/m)

// Lorentzian transmission of a probe at the given offset from resonance.
double transmission(double offset_hz, double linewidth_fwhm_hz);

struct PlantState {
    std::vector<double> heat_lift;  // one mode per surrogate pole
    std::vector<double> dist_lift;
    std::vector<double> heat_rtd;
    std::vector<double> dist_rtd;
    double sio2 = 0.0;              // filtered disturbance heat, W/m
    double pzt_pos = 0.0;           // m
    double pzt_vel = 0.0;           // m/s
};

struct StepInputs {
    double pzt_volts = 0.0;
    double heater_power = 0.0;   // W, deviation from the bias point
    double magnet_current = 0.0; // A
};

struct StepOutputs {
    double resonance_offset_hz = 0.0;
    double rtd_temperature = 0.0; // K, deviation from ambient
    double transmission = 1.0;
};

class Plant;

// Per-timestep discretization: exact exponential updates of the thermal
// modes and the exact propagator of the PZT resonance.
class Stepper {
public:
    StepOutputs step(PlantState& state, const StepInputs& in) const;
    double dt() const { return dt_; }

private:
    friend class Plant;
    Stepper() = default;

    struct ModeCoef {
        double decay;  // e^{p dt}
        double inject; // (e^{p dt} - 1) / p
    };
    struct PathCoef {
        std::vector<ModeCoef> modes;
        std::vector<double> residues;
        double direct;
    };

    static PathCoef discretize(const ratfit::TransferModel& tm, double dt);
    static double output(const PathCoef& pc, const std::vector<double>& x,
                         double u);
    static void advance(const PathCoef& pc, std::vector<double>& x, double u);

    PathCoef heat_lift_, dist_lift_, heat_rtd_, dist_rtd_;
    double pzt_m11_, pzt_m12_, pzt_m21_, pzt_m22_;
    double sio2_decay_ = 0.0; // 0 disables the extra lag
    double pzt_gain_, hz_per_m_, linewidth_, r_per_len_;
    double dt_ = 0.0;
};

class Plant {
public:
    explicit Plant(const PlantConfig& cfg);

    const PlantConfig& config() const { return cfg_; }
    const ratfit::TransferModel& heater_lift() const { return heat_lift_; }
    const ratfit::TransferModel& disturbance_lift() const { return dist_lift_; }
    const ratfit::TransferModel& heater_rtd() const { return heat_rtd_; }
    const ratfit::TransferModel& disturbance_rtd() const { return dist_rtd_; }

    PlantState initial_state() const;
    Stepper make_stepper(double dt) const;

    // surrogate frequency responses of the full input-to-observable chains
    std::complex<double> heater_to_offset(double omega) const; // Hz/W
    std::complex<double> pzt_to_offset(double omega) const;    // Hz/V
    std::complex<double> heater_to_rtd(double omega) const;    // K/W

private:
    PlantConfig cfg_;
    ratfit::TransferModel heat_lift_, dist_lift_, heat_rtd_, dist_rtd_;
};

}
