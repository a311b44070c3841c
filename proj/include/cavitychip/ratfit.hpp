#pragma once

#include <complex>
#include <vector>

namespace cavitychip::ratfit {

// Stable rational surrogate H(s) = d + sum_j r_j / (s - p_j) with real
// negative poles, used to time-step diffusive frequency responses.
struct TransferModel {
    std::vector<double> poles;    // rad/s, all < 0
    std::vector<double> residues;
    double direct = 0.0;

    std::complex<double> eval(double omega) const; // H(i omega)
    double dc_gain() const;                        // H(0)
};

struct FreqSample {
    double omega;                 // rad/s
    std::complex<double> value;
};

struct FitQuality {
    double max_rel_mag_error;
    double max_phase_error_deg;
};

// Least-squares fit with n_poles fixed log-spaced poles across the sample
// band. Relative (per-sample) weighting. Throws std::runtime_error when
// the magnitude/phase targets are not met; the caller raises n_poles.
TransferModel fit_rational(const std::vector<FreqSample>& target, int n_poles,
                           double mag_tol = 0.05, double phase_tol_deg = 5.0,
                           FitQuality* quality = nullptr);

// Quality of an existing model against samples.
FitQuality evaluate_fit(const TransferModel& model,
                        const std::vector<FreqSample>& target);

}
