#include "cavitychip/plant.hpp"
#include "cavitychip/constants.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace cavitychip::plant {

using constants::pi;
using constants::speed_of_light;
using cplx = std::complex<double>;

double PlantConfig::fsr() const { return speed_of_light / (2.0 * cavity_length); }

double PlantConfig::linewidth_fwhm() const { return fsr() / finesse; }

double PlantConfig::optical_frequency() const
{
    return speed_of_light / wavelength;
}

double PlantConfig::hz_per_meter() const
{
    // d(nu)/d(shortening) = +nu / L
    return optical_frequency() / cavity_length;
}

void PlantConfig::validate() const
{
    material.validate();
    if (!(cavity_length > 0.0) || !(wavelength > 0.0) || !(finesse > 0.0))
        throw std::domain_error("plant: cavity parameters must be positive");
    if (!(heater_distance > 0.0) || !(disturbance_distance > 0.0) ||
        !(rtd_heater_distance > 0.0) || !(rtd_disturbance_distance > 0.0))
        throw std::domain_error("plant: path distances must be positive");
    if (!(pzt_gain > 0.0) || !(pzt_resonance_hz > 0.0) || !(pzt_q > 0.0))
        throw std::domain_error("plant: PZT parameters must be positive");
    if (fast_path_fraction < 0.0 || fast_path_fraction >= 1.0)
        throw std::domain_error("plant: fast path fraction must lie in [0, 1)");
    if (!(waveguide_resistance_per_length > 0.0) || !(heater_resistance > 0.0))
        throw std::domain_error("plant: resistances must be positive");
    if (sio2_lag < 0.0)
        throw std::domain_error("plant: sio2 lag must be >= 0");
    if (n_poles < 1 || n_poles > 64)
        throw std::domain_error("plant: pole count out of range");
    if (!(fit_fmin_hz > 0.0) || !(fit_fmax_hz > fit_fmin_hz))
        throw std::domain_error("plant: bad fit band");
    if (fit_samples < 4 * n_poles)
        throw std::domain_error("plant: need at least 4 fit samples per pole");
}

namespace {

thermal::HeatSource heater_source(const PlantConfig& cfg)
{
    thermal::HeatSource s;
    s.kind = cfg.heater_uses_line_kernel ? thermal::SourceKind::line
                                         : thermal::SourceKind::point;
    s.amplitude = 1.0;
    return s;
}

cplx lift_at(const PlantConfig& cfg, const thermal::HeatSource& src,
             double offset, double omega)
{
    return thermal::surface_lift(src, offset, omega, cfg.material);
}

} // namespace

cplx thermal_actuator_response(const PlantConfig& cfg, double omega)
{
    const auto src = heater_source(cfg);
    const double eps = cfg.fast_path_fraction;
    const cplx dc = lift_at(cfg, src, cfg.heater_distance, 0.0);
    if (omega == 0.0)
        return dc;
    return (1.0 - eps) * lift_at(cfg, src, cfg.heater_distance, omega) + eps * dc;
}

cplx disturbance_lift_response(const PlantConfig& cfg, double omega)
{
    thermal::HeatSource src{thermal::SourceKind::line, 1.0};
    return lift_at(cfg, src, cfg.disturbance_distance, omega);
}

cplx heater_rtd_response(const PlantConfig& cfg, double omega)
{
    if (cfg.heater_uses_line_kernel) {
        if (omega == 0.0)
            return cplx(thermal::dc_line_estimate(1.0, cfg.rtd_heater_distance,
                                                  cfg.material.thickness,
                                                  cfg.material),
                        0.0);
        return thermal::line_response(1.0, cfg.rtd_heater_distance, omega,
                                      cfg.material);
    }
    return thermal::point_response(1.0, cfg.rtd_heater_distance, omega,
                                   cfg.material);
}

cplx disturbance_rtd_response(const PlantConfig& cfg, double omega)
{
    if (omega == 0.0)
        return cplx(thermal::dc_line_estimate(1.0, cfg.rtd_disturbance_distance,
                                              cfg.material.thickness, cfg.material),
                    0.0);
    return thermal::line_response(1.0, cfg.rtd_disturbance_distance, omega,
                                  cfg.material);
}

double transmission(double offset_hz, double linewidth_fwhm_hz)
{
    if (!(linewidth_fwhm_hz > 0.0))
        throw std::domain_error("plant: linewidth must be positive");
    const double x = 2.0 * offset_hz / linewidth_fwhm_hz;
    return 1.0 / (1.0 + x * x);
}

namespace {

// log-spaced fit samples, trimmed where the response falls below a
// relative floor (phase there is numerically meaningless)
std::vector<ratfit::FreqSample> sample_response(
    const PlantConfig& cfg, const std::function<cplx(double)>& resp,
    double fmax_hz, double rel_floor)
{
    std::vector<ratfit::FreqSample> out;
    const int n = cfg.fit_samples;
    const double lmin = std::log(2.0 * pi * cfg.fit_fmin_hz);
    const double lmax = std::log(2.0 * pi * fmax_hz);
    double peak = 0.0;
    for (int i = 0; i < n; ++i) {
        const double w = std::exp(lmin + (lmax - lmin) * double(i) / double(n - 1));
        const cplx v = resp(w);
        peak = std::max(peak, std::abs(v));
        out.push_back({w, v});
    }
    const double floor = rel_floor * peak;
    size_t keep = out.size();
    while (keep > 1 && std::abs(out[keep - 1].value) < floor)
        --keep;
    out.resize(keep);
    return out;
}

ratfit::TransferModel fit_path(const PlantConfig& cfg,
                               const std::function<cplx(double)>& resp,
                               double fmax_hz, double rel_floor, double mag_tol,
                               double phase_tol_deg)
{
    const auto samples = sample_response(cfg, resp, fmax_hz, rel_floor);
    // the trimmed sample set must still satisfy the per-pole requirement
    int n_poles = cfg.n_poles;
    while (samples.size() < size_t(4 * n_poles) && n_poles > 2)
        --n_poles;
    return ratfit::fit_rational(samples, n_poles, mag_tol, phase_tol_deg);
}

} // namespace

Plant::Plant(const PlantConfig& cfg) : cfg_(cfg)
{
    cfg_.validate();
    heat_lift_ = fit_path(
        cfg_, [&](double w) { return thermal_actuator_response(cfg_, w); },
        cfg_.fit_fmax_hz, 1e-5, 0.05, 5.0);
    dist_lift_ = fit_path(
        cfg_, [&](double w) { return disturbance_lift_response(cfg_, w); },
        cfg_.fit_fmax_hz, 1e-5, 0.05, 5.0);
    // temperature readout paths are servo plumbing: the RTD loop lives well
    // below 10 kHz, so the deep high-frequency tail is trimmed harder and
    // the tolerance is looser
    heat_rtd_ = fit_path(
        cfg_, [&](double w) { return heater_rtd_response(cfg_, w); }, 1e5, 1e-4,
        0.08, 8.0);
    dist_rtd_ = fit_path(
        cfg_, [&](double w) { return disturbance_rtd_response(cfg_, w); }, 1e5,
        1e-4, 0.08, 8.0);
}

PlantState Plant::initial_state() const
{
    PlantState st;
    st.heat_lift.assign(heat_lift_.poles.size(), 0.0);
    st.dist_lift.assign(dist_lift_.poles.size(), 0.0);
    st.heat_rtd.assign(heat_rtd_.poles.size(), 0.0);
    st.dist_rtd.assign(dist_rtd_.poles.size(), 0.0);
    return st;
}

Stepper::PathCoef Stepper::discretize(const ratfit::TransferModel& tm, double dt)
{
    PathCoef pc;
    pc.residues = tm.residues;
    pc.direct = tm.direct;
    pc.modes.resize(tm.poles.size());
    for (size_t j = 0; j < tm.poles.size(); ++j) {
        const double p = tm.poles[j];
        const double e = std::exp(p * dt);
        pc.modes[j].decay = e;
        pc.modes[j].inject = (e - 1.0) / p;
    }
    return pc;
}

double Stepper::output(const PathCoef& pc, const std::vector<double>& x, double u)
{
    double y = pc.direct * u;
    for (size_t j = 0; j < x.size(); ++j)
        y += pc.residues[j] * x[j];
    return y;
}

void Stepper::advance(const PathCoef& pc, std::vector<double>& x, double u)
{
    for (size_t j = 0; j < x.size(); ++j)
        x[j] = pc.modes[j].decay * x[j] + pc.modes[j].inject * u;
}

Stepper Plant::make_stepper(double dt) const
{
    if (!(dt > 0.0))
        throw std::domain_error("plant: dt must be positive");
    Stepper s;
    s.dt_ = dt;
    s.heat_lift_ = Stepper::discretize(heat_lift_, dt);
    s.dist_lift_ = Stepper::discretize(dist_lift_, dt);
    s.heat_rtd_ = Stepper::discretize(heat_rtd_, dt);
    s.dist_rtd_ = Stepper::discretize(dist_rtd_, dt);

    // exact propagator of the damped PZT resonance about its drive point
    const double w0 = 2.0 * pi * cfg_.pzt_resonance_hz;
    double zeta = 1.0 / (2.0 * cfg_.pzt_q);
    if (std::fabs(zeta - 1.0) < 1e-9)
        zeta += 1e-9; // avoid the critically damped special case
    const double a = zeta * w0;
    const double e = std::exp(-a * dt);
    if (zeta < 1.0) {
        const double wd = w0 * std::sqrt(1.0 - zeta * zeta);
        const double c = std::cos(wd * dt), sn = std::sin(wd * dt);
        s.pzt_m11_ = e * (c + a / wd * sn);
        s.pzt_m12_ = e * sn / wd;
        s.pzt_m21_ = -e * w0 * w0 / wd * sn;
        s.pzt_m22_ = e * (c - a / wd * sn);
    } else {
        const double wd = w0 * std::sqrt(zeta * zeta - 1.0);
        const double c = std::cosh(wd * dt), sn = std::sinh(wd * dt);
        s.pzt_m11_ = e * (c + a / wd * sn);
        s.pzt_m12_ = e * sn / wd;
        s.pzt_m21_ = -e * w0 * w0 / wd * sn;
        s.pzt_m22_ = e * (c - a / wd * sn);
    }

    s.sio2_decay_ = cfg_.sio2_lag > 0.0 ? std::exp(-dt / cfg_.sio2_lag) : 0.0;
    s.pzt_gain_ = cfg_.pzt_gain;
    s.hz_per_m_ = cfg_.hz_per_meter();
    s.linewidth_ = cfg_.linewidth_fwhm();
    s.r_per_len_ = cfg_.waveguide_resistance_per_length;
    return s;
}

StepOutputs Stepper::step(PlantState& st, const StepInputs& in) const
{
    // ohmic heat in the waveguide wires, W/m
    double a0 = in.magnet_current * in.magnet_current * r_per_len_;
    if (sio2_decay_ > 0.0) {
        st.sio2 = sio2_decay_ * st.sio2 + (1.0 - sio2_decay_) * a0;
        a0 = st.sio2;
    }

    advance(dist_lift_, st.dist_lift, a0);
    advance(heat_lift_, st.heat_lift, in.heater_power);
    advance(dist_rtd_, st.dist_rtd, a0);
    advance(heat_rtd_, st.heat_rtd, in.heater_power);

    // PZT: exact step toward the commanded position
    const double target = pzt_gain_ * in.pzt_volts;
    const double xi = st.pzt_pos - target;
    const double xi_new = pzt_m11_ * xi + pzt_m12_ * st.pzt_vel;
    const double vi_new = pzt_m21_ * xi + pzt_m22_ * st.pzt_vel;
    st.pzt_pos = xi_new + target;
    st.pzt_vel = vi_new;

    const double shorten = output(dist_lift_, st.dist_lift, a0) +
                           output(heat_lift_, st.heat_lift, in.heater_power) +
                           st.pzt_pos;

    StepOutputs out;
    out.resonance_offset_hz = hz_per_m_ * shorten;
    out.rtd_temperature = output(dist_rtd_, st.dist_rtd, a0) +
                          output(heat_rtd_, st.heat_rtd, in.heater_power);
    out.transmission = transmission(out.resonance_offset_hz, linewidth_);
    return out;
}

cplx Plant::heater_to_offset(double omega) const
{
    return cfg_.hz_per_meter() * heat_lift_.eval(omega);
}

cplx Plant::pzt_to_offset(double omega) const
{
    const double w0 = 2.0 * pi * cfg_.pzt_resonance_hz;
    const double gamma = w0 / cfg_.pzt_q;
    const cplx s(0.0, omega);
    const cplx resp = w0 * w0 / (s * s + gamma * s + w0 * w0);
    return cfg_.hz_per_meter() * cfg_.pzt_gain * resp;
}

cplx Plant::heater_to_rtd(double omega) const { return heat_rtd_.eval(omega); }

}
