#pragma once

#include "cavitychip/plant.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cavitychip::servo {

// PID with filtered derivative, clamped (conditional) integrator, output
// limits, an optional input low-pass and an optional low-frequency boost
// stage (s + w_b)/s for extra DC stiffness.
struct ControllerConfig {
    double kp = 0.0;
    double ki = 0.0; // per second
    double kd = 0.0; // seconds
    double deriv_filter_hz = 0.0;  // corner of the derivative filter, 0 = no D term
    double lowpass_corner_hz = 0.0; // input low-pass, 0 = off
    double boost_corner_hz = 0.0;   // (s + w)/s stage, 0 = off
    double out_min = -1e30;
    double out_max = 1e30;

    bool active() const { return kp != 0.0 || ki != 0.0 || kd != 0.0; }
};

enum class SchemeKind { temperature_servo, feed_forward, direct_dual };

const char* scheme_name(SchemeKind k);
SchemeKind scheme_from_name(const std::string& name);

// Feed-forward from the magnet-current signal into the temperature loop:
// filtered, inverted (negative gain), offset. The filter is a single-pole
// lag compensator: feedthrough + (1 - feedthrough) through the pole. The
// feedthrough fraction is part of the committed scheme configuration; the
// tuner optimizes (gain, corner, offset).
struct FeedForwardConfig {
    double gain = 0.0;        // K per A, commanded to the RTD loop
    double corner_hz = 0.0;   // filter pole; <= 0 = unfiltered
    double offset = 0.0;      // K
    double feedthrough = 0.0; // direct fraction bypassing the pole, [0, 1]
};

struct SchemeConfig {
    SchemeKind kind = SchemeKind::temperature_servo;
    ControllerConfig pzt_loop;    // frequency error -> PZT (all schemes)
    ControllerConfig rtd_loop;    // RTD temperature error -> heater (i, ii)
    ControllerConfig heater_loop; // frequency error -> heater (iii)
    FeedForwardConfig ff;         // (ii)
    // (iii): corner of the low-pass that routes slow error to the PZT;
    // 0 = PZT loop sees the full error
    double crossover_split_hz = 0.0;
    // (iii): when true the heater sees the complementary high-passed error
    bool split_complementary = false;
    double rtd_setpoint = 0.0;          // K deviation from ambient
    double nominal_bandwidth_hz = 1e3;  // fastest loop; bounds dt
};

struct Pulse {
    double t_start = 0.0;
    double t_end = 0.0;
    double amps = 0.0;
};

struct Scenario {
    plant::PlantConfig plant;
    SchemeConfig scheme;
    std::vector<Pulse> disturbance;
    double dt = 1e-5;
    double duration = 0.5;
    double sensor_noise_rms = 0.0; // Hz on the frequency error
    std::uint64_t rng_seed = 1;
    int record_stride = 1;

    void validate() const;
    double current_at(double t) const;
};

struct TraceSummary {
    double peak_offset_hz = 0.0;
    double settle_time_s = 0.0;  // last time |offset| exceeded one linewidth
    double rms_offset_after_settle_hz = 0.0;
    double time_above_linewidth_s = 0.0;
    // peak |offset| ignoring a 1 ms window after each current switch
    double peak_offset_settled_hz = 0.0;
};

struct Trace {
    std::vector<double> t, offset_hz, pzt_v, heater_w, rtd_k, transmission;
    TraceSummary summary;
    double linewidth_hz = 0.0;
    bool diverged = false;
    double diverged_at_s = 0.0;
};

TraceSummary summarize(const Trace& trace, const std::vector<Pulse>& pulses,
                       double linewidth_hz, double switch_window_s = 1e-3);

Trace run_scenario(const Scenario& sc);
// reuses an already-constructed plant (surrogate fits are expensive)
Trace run_scenario(const plant::Plant& pl, const Scenario& sc);

enum class LoopPath { heater, pzt, rtd };

struct MarginReport {
    std::vector<double> freq_hz, gain_db, phase_deg; // unwrapped phase
    bool has_crossover = false;
    double crossover_hz = 0.0;
    double phase_margin_deg = 0.0;
    double gain_margin_db = 0.0; // +inf encoded as 1e30 when no -180 crossing
    bool unconditionally_stable = false;
};

MarginReport open_loop_bode(const Scenario& sc, LoopPath path,
                            int n_points = 400, double fmin_hz = 1.0,
                            double fmax_hz = 1e6);
MarginReport open_loop_bode(const plant::Plant& pl, const Scenario& sc,
                            LoopPath path, int n_points = 400,
                            double fmin_hz = 1.0, double fmax_hz = 1e6);

struct FeedForwardTuning {
    FeedForwardConfig params;
    double peak_without = 0.0;
    double peak_with = 0.0;
    double suppression_ratio = 1.0;
    int evaluations = 0;
    bool converged = false;
};

// Simplex minimization of the peak |offset| over (gain, corner, offset).
FeedForwardTuning tune_feedforward(const Scenario& sc, int max_eval = 400);

// Committed default configurations for the three schemes, paired with the
// pulse experiments they are meant to reproduce.
SchemeConfig default_scheme(SchemeKind kind);
Scenario default_scenario(SchemeKind kind);

}
