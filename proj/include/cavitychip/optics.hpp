#pragma once

#include <string>
#include <vector>

namespace cavitychip::optics {

// Plano-concave cavity: planar mirror on the chip (finite aperture),
// curved mirror above. All lengths in meters, losses dimensionless
// (fraction of power per reflection).
struct CavitySpec {
    double length = 25e-6;          // mirror spacing L
    double curved_mirror_roc = 5e-2;
    double wavelength = 780e-9;
    double aperture_radius = 47e-6; // effective radius of the mirror pad
    double fixed_loss_chip = 20e-6;
    double fixed_loss_curved = 11.4e-6;

    void validate() const; // throws std::domain_error
};

struct ModeDerived {
    double waist;                     // m, at the planar mirror
    double diffraction_loss;          // per reflection
    double round_trip_loss;           // delta_c
    double finesse;                   // 2 pi / delta_c
    double fsr;                       // Hz
    double linewidth_fwhm;            // Hz
    double cooperativity;             // single-atom C
    double displacement_per_linewidth; // m, lambda / 2F
};

// Atomic coherence decay rate Gamma (rad/s, half the population decay).
struct AtomSpec {
    double coherence_decay = 2 * 3.14159265358979323846 * 3.03e6; // 87Rb D2
};

struct FinesseSample {
    double length;              // m
    double finesse;
    double finesse_uncertainty; // absolute; <= 0 means "use 5% relative"
};

double mode_waist(double length, double roc, double wavelength);
double diffraction_loss(double aperture_radius, double waist);
double finesse_from_losses(double loss_chip, double loss_curved,
                           double aperture_radius, double waist);
double free_spectral_range(double length);
double cavity_linewidth(double length, double finesse);
double cooperativity(double length, double roc, double wavelength, double finesse);
double displacement_per_linewidth(double wavelength, double finesse);

// Vacuum Rabi frequency g (rad/s) consistent with C = g^2 / (2 kappa Gamma),
// kappa being the half linewidth in rad/s.
double vacuum_rabi_g(double length, double roc, double wavelength,
                     double finesse, double coherence_decay);

ModeDerived derive_mode(const CavitySpec& spec);

// Weighted least-squares fit of the loss model
//   delta_c(L) = exp(-2 a^2 / w0(L)^2) + delta_fixed
// to measured finesse-vs-length data, in the variables (ln a, ln delta_fixed).
struct RadiusFit {
    double aperture_radius;   // a
    double fixed_loss;        // delta_1 + delta_2
    std::vector<double> residuals; // per sample, in units of sigma
    double chi2;
    int iterations;
    bool converged;
};

RadiusFit fit_mirror_radius(const std::vector<FinesseSample>& samples,
                            double roc, double wavelength);

// CSV ingestion, header `length_um,finesse[,sigma_finesse]`.
// Throws std::runtime_error with a line number on malformed input.
std::vector<FinesseSample> load_finesse_csv(const std::string& path);

}
