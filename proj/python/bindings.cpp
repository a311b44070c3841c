#include "cavitychip/config.hpp"
#include "cavitychip/magnetics.hpp"
#include "cavitychip/optics.hpp"
#include "cavitychip/plant.hpp"
#include "cavitychip/ratfit.hpp"
#include "cavitychip/servo.hpp"
#include "cavitychip/specfun.hpp"
#include "cavitychip/thermal.hpp"

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace cavitychip;

PYBIND11_MODULE(_core, m)
{
    m.doc() = "microcavity atom-chip toolkit: cavity optics, chip thermal "
              "response, magnetics and stabilization simulation";

    // ---- special functions ----
    auto sf = m.def_submodule("specfun");
    sf.def("bessel_j0", &specfun::bessel_j0, py::arg("z"));
    sf.def("bessel_y0", &specfun::bessel_y0, py::arg("z"));
    sf.def("hankel2_0", &specfun::hankel2_0, py::arg("z"));

    // ---- optics ----
    auto opt = m.def_submodule("optics");
    py::class_<optics::CavitySpec>(opt, "CavitySpec")
        .def(py::init<>())
        .def_readwrite("length", &optics::CavitySpec::length)
        .def_readwrite("curved_mirror_roc", &optics::CavitySpec::curved_mirror_roc)
        .def_readwrite("wavelength", &optics::CavitySpec::wavelength)
        .def_readwrite("aperture_radius", &optics::CavitySpec::aperture_radius)
        .def_readwrite("fixed_loss_chip", &optics::CavitySpec::fixed_loss_chip)
        .def_readwrite("fixed_loss_curved", &optics::CavitySpec::fixed_loss_curved);
    py::class_<optics::ModeDerived>(opt, "ModeDerived")
        .def_readonly("waist", &optics::ModeDerived::waist)
        .def_readonly("diffraction_loss", &optics::ModeDerived::diffraction_loss)
        .def_readonly("round_trip_loss", &optics::ModeDerived::round_trip_loss)
        .def_readonly("finesse", &optics::ModeDerived::finesse)
        .def_readonly("fsr", &optics::ModeDerived::fsr)
        .def_readonly("linewidth_fwhm", &optics::ModeDerived::linewidth_fwhm)
        .def_readonly("cooperativity", &optics::ModeDerived::cooperativity)
        .def_readonly("displacement_per_linewidth",
                      &optics::ModeDerived::displacement_per_linewidth);
    py::class_<optics::FinesseSample>(opt, "FinesseSample")
        .def(py::init([](double length, double finesse, double sigma) {
                 return optics::FinesseSample{length, finesse, sigma};
             }),
             py::arg("length"), py::arg("finesse"), py::arg("sigma") = 0.0)
        .def_readwrite("length", &optics::FinesseSample::length)
        .def_readwrite("finesse", &optics::FinesseSample::finesse)
        .def_readwrite("finesse_uncertainty",
                       &optics::FinesseSample::finesse_uncertainty);
    py::class_<optics::RadiusFit>(opt, "RadiusFit")
        .def_readonly("aperture_radius", &optics::RadiusFit::aperture_radius)
        .def_readonly("fixed_loss", &optics::RadiusFit::fixed_loss)
        .def_readonly("residuals", &optics::RadiusFit::residuals)
        .def_readonly("chi2", &optics::RadiusFit::chi2)
        .def_readonly("iterations", &optics::RadiusFit::iterations)
        .def_readonly("converged", &optics::RadiusFit::converged);
    opt.def("mode_waist", &optics::mode_waist, py::arg("length"), py::arg("roc"),
            py::arg("wavelength"));
    opt.def("diffraction_loss", &optics::diffraction_loss,
            py::arg("aperture_radius"), py::arg("waist"));
    opt.def("finesse_from_losses", &optics::finesse_from_losses,
            py::arg("loss_chip"), py::arg("loss_curved"),
            py::arg("aperture_radius"), py::arg("waist"));
    opt.def("free_spectral_range", &optics::free_spectral_range, py::arg("length"));
    opt.def("cavity_linewidth", &optics::cavity_linewidth, py::arg("length"),
            py::arg("finesse"));
    opt.def("cooperativity", &optics::cooperativity, py::arg("length"),
            py::arg("roc"), py::arg("wavelength"), py::arg("finesse"));
    opt.def("displacement_per_linewidth", &optics::displacement_per_linewidth,
            py::arg("wavelength"), py::arg("finesse"));
    opt.def("vacuum_rabi_g", &optics::vacuum_rabi_g, py::arg("length"),
            py::arg("roc"), py::arg("wavelength"), py::arg("finesse"),
            py::arg("coherence_decay"));
    opt.def("derive_mode", &optics::derive_mode, py::arg("spec"));
    opt.def("fit_mirror_radius", &optics::fit_mirror_radius, py::arg("samples"),
            py::arg("roc"), py::arg("wavelength"));
    opt.def("load_finesse_csv", &optics::load_finesse_csv, py::arg("path"));

    // ---- thermal ----
    auto th = m.def_submodule("thermal");
    py::class_<thermal::MaterialProps>(th, "MaterialProps")
        .def(py::init<>())
        .def_readwrite("conductivity", &thermal::MaterialProps::conductivity)
        .def_readwrite("diffusivity", &thermal::MaterialProps::diffusivity)
        .def_readwrite("expansion_coeff", &thermal::MaterialProps::expansion_coeff)
        .def_readwrite("thickness", &thermal::MaterialProps::thickness);
    py::enum_<thermal::SourceKind>(th, "SourceKind")
        .value("point", thermal::SourceKind::point)
        .value("line", thermal::SourceKind::line);
    py::class_<thermal::HeatSource>(th, "HeatSource")
        .def(py::init([](thermal::SourceKind kind, double amplitude) {
                 return thermal::HeatSource{kind, amplitude};
             }),
             py::arg("kind"), py::arg("amplitude"))
        .def_readwrite("kind", &thermal::HeatSource::kind)
        .def_readwrite("amplitude", &thermal::HeatSource::amplitude);
    th.def("sapphire", &thermal::sapphire);
    th.def("point_response", &thermal::point_response, py::arg("p0"), py::arg("r"),
           py::arg("omega"), py::arg("mat"));
    th.def("line_response", &thermal::line_response, py::arg("a0"), py::arg("rho"),
           py::arg("omega"), py::arg("mat"));
    th.def("dc_line_estimate", &thermal::dc_line_estimate, py::arg("a0"),
           py::arg("rho"), py::arg("cutoff"), py::arg("mat"));
    th.def("surface_lift", &thermal::surface_lift, py::arg("source"),
           py::arg("offset"), py::arg("omega"), py::arg("mat"),
           py::arg("quad_rel_tol") = 1e-8);
    th.def(
        "thermal_cutoff",
        [](double r, const thermal::MaterialProps& mat) {
            const auto c = thermal::thermal_cutoff(r, mat);
            return py::make_tuple(c.omega_c, c.tau);
        },
        py::arg("r"), py::arg("mat"));
    th.def("slew_estimate", &thermal::slew_estimate, py::arg("lift_dc"),
           py::arg("tau"));
    th.def("line_power_per_length", &thermal::line_power_per_length,
           py::arg("current"), py::arg("cross_section"), py::arg("resistivity"));

    // ---- magnetics ----
    auto mag = m.def_submodule("magnetics");
    py::class_<magnetics::Wire>(mag, "Wire")
        .def(py::init([](double x, double z, double current) {
                 return magnetics::Wire{x, z, current};
             }),
             py::arg("x"), py::arg("z"), py::arg("current"))
        .def_readwrite("x", &magnetics::Wire::x)
        .def_readwrite("z", &magnetics::Wire::z)
        .def_readwrite("current", &magnetics::Wire::current);
    py::class_<magnetics::WireSet>(mag, "WireSet")
        .def(py::init<>())
        .def_readwrite("wires", &magnetics::WireSet::wires)
        .def_readwrite("bias_field", &magnetics::WireSet::bias_field);
    py::class_<magnetics::FieldAndGradient>(mag, "FieldAndGradient")
        .def_readonly("field", &magnetics::FieldAndGradient::field)
        .def_readonly("grad", &magnetics::FieldAndGradient::grad);
    mag.def("wire_field", &magnetics::wire_field, py::arg("current"), py::arg("r"));
    mag.def("waveguide_field_and_gradient", &magnetics::waveguide_field_and_gradient,
            py::arg("wires"), py::arg("point"));
    mag.def("heater_ripple_potential", &magnetics::heater_ripple_potential,
            py::arg("b_ripple"), py::arg("frequency"));
    mag.def("default_waveguide", &magnetics::default_waveguide);
    mag.def("default_waveguide_eval_point", &magnetics::default_waveguide_eval_point);

    // ---- plant & servo ----
    auto pl = m.def_submodule("plant");
    py::class_<plant::PlantConfig>(pl, "PlantConfig")
        .def(py::init<>())
        .def_readwrite("cavity_length", &plant::PlantConfig::cavity_length)
        .def_readwrite("wavelength", &plant::PlantConfig::wavelength)
        .def_readwrite("finesse", &plant::PlantConfig::finesse)
        .def_readwrite("material", &plant::PlantConfig::material)
        .def_readwrite("heater_distance", &plant::PlantConfig::heater_distance)
        .def_readwrite("disturbance_distance",
                       &plant::PlantConfig::disturbance_distance)
        .def_readwrite("fast_path_fraction", &plant::PlantConfig::fast_path_fraction)
        .def_readwrite("n_poles", &plant::PlantConfig::n_poles)
        .def("linewidth_fwhm", &plant::PlantConfig::linewidth_fwhm);
    py::class_<ratfit::TransferModel>(pl, "TransferModel")
        .def_readonly("poles", &ratfit::TransferModel::poles)
        .def_readonly("residues", &ratfit::TransferModel::residues)
        .def_readonly("direct", &ratfit::TransferModel::direct)
        .def("eval", &ratfit::TransferModel::eval, py::arg("omega"))
        .def("dc_gain", &ratfit::TransferModel::dc_gain);
    pl.def("thermal_actuator_response", &plant::thermal_actuator_response,
           py::arg("cfg"), py::arg("omega"));
    pl.def("disturbance_lift_response", &plant::disturbance_lift_response,
           py::arg("cfg"), py::arg("omega"));
    pl.def("transmission", &plant::transmission, py::arg("offset_hz"),
           py::arg("linewidth_fwhm_hz"));
    pl.def(
        "fit_rational",
        [](const std::vector<std::pair<double, std::complex<double>>>& target,
           int n_poles, double mag_tol, double phase_tol_deg) {
            std::vector<ratfit::FreqSample> t;
            for (const auto& [w, v] : target)
                t.push_back({w, v});
            return ratfit::fit_rational(t, n_poles, mag_tol, phase_tol_deg);
        },
        py::arg("target"), py::arg("n_poles"), py::arg("mag_tol") = 0.05,
        py::arg("phase_tol_deg") = 5.0);

    auto sv = m.def_submodule("servo");
    py::enum_<servo::SchemeKind>(sv, "SchemeKind")
        .value("temperature_servo", servo::SchemeKind::temperature_servo)
        .value("feed_forward", servo::SchemeKind::feed_forward)
        .value("direct_dual", servo::SchemeKind::direct_dual);
    py::class_<servo::Trace>(sv, "Trace")
        .def_readonly("t", &servo::Trace::t)
        .def_readonly("offset_hz", &servo::Trace::offset_hz)
        .def_readonly("pzt_v", &servo::Trace::pzt_v)
        .def_readonly("heater_w", &servo::Trace::heater_w)
        .def_readonly("rtd_k", &servo::Trace::rtd_k)
        .def_readonly("transmission", &servo::Trace::transmission)
        .def_readonly("linewidth_hz", &servo::Trace::linewidth_hz)
        .def_readonly("diverged", &servo::Trace::diverged)
        .def_property_readonly(
            "peak_offset_hz",
            [](const servo::Trace& t) { return t.summary.peak_offset_hz; })
        .def_property_readonly("peak_offset_settled_hz",
                               [](const servo::Trace& t) {
                                   return t.summary.peak_offset_settled_hz;
                               })
        .def_property_readonly("time_above_linewidth_s",
                               [](const servo::Trace& t) {
                                   return t.summary.time_above_linewidth_s;
                               });
    sv.def("default_scenario", &servo::default_scenario, py::arg("kind"));
    sv.def(
        "run_scenario",
        [](const servo::Scenario& sc) { return servo::run_scenario(sc); },
        py::arg("scenario"));
    sv.def(
        "run_config",
        [](const std::string& path) {
            return servo::run_scenario(config::scenario_from_file(path));
        },
        py::arg("config_path"));
    sv.def(
        "run_config_text",
        [](const std::string& text) {
            return servo::run_scenario(config::scenario_from_string(text));
        },
        py::arg("config_text"));
    py::class_<servo::Pulse>(sv, "Pulse")
        .def(py::init([](double t_start, double t_end, double amps) {
                 return servo::Pulse{t_start, t_end, amps};
             }),
             py::arg("t_start"), py::arg("t_end"), py::arg("amps"))
        .def_readwrite("t_start", &servo::Pulse::t_start)
        .def_readwrite("t_end", &servo::Pulse::t_end)
        .def_readwrite("amps", &servo::Pulse::amps);
    py::class_<servo::Scenario>(sv, "Scenario")
        .def_readwrite("plant", &servo::Scenario::plant)
        .def_readwrite("disturbance", &servo::Scenario::disturbance)
        .def_readwrite("dt", &servo::Scenario::dt)
        .def_readwrite("duration", &servo::Scenario::duration)
        .def_readwrite("sensor_noise_rms", &servo::Scenario::sensor_noise_rms)
        .def_readwrite("rng_seed", &servo::Scenario::rng_seed)
        .def_readwrite("record_stride", &servo::Scenario::record_stride);
    py::enum_<servo::LoopPath>(sv, "LoopPath")
        .value("heater", servo::LoopPath::heater)
        .value("pzt", servo::LoopPath::pzt)
        .value("rtd", servo::LoopPath::rtd);
    py::class_<servo::MarginReport>(sv, "MarginReport")
        .def_readonly("freq_hz", &servo::MarginReport::freq_hz)
        .def_readonly("gain_db", &servo::MarginReport::gain_db)
        .def_readonly("phase_deg", &servo::MarginReport::phase_deg)
        .def_readonly("has_crossover", &servo::MarginReport::has_crossover)
        .def_readonly("crossover_hz", &servo::MarginReport::crossover_hz)
        .def_readonly("phase_margin_deg", &servo::MarginReport::phase_margin_deg)
        .def_readonly("gain_margin_db", &servo::MarginReport::gain_margin_db)
        .def_readonly("unconditionally_stable",
                      &servo::MarginReport::unconditionally_stable);
    sv.def(
        "open_loop_bode",
        [](const servo::Scenario& sc, servo::LoopPath path, int n_points,
           double fmin_hz, double fmax_hz) {
            return servo::open_loop_bode(sc, path, n_points, fmin_hz, fmax_hz);
        },
        py::arg("scenario"), py::arg("path"), py::arg("n_points") = 400,
        py::arg("fmin_hz") = 1.0, py::arg("fmax_hz") = 1e6);
    py::class_<servo::FeedForwardTuning>(sv, "FeedForwardTuning")
        .def_readonly("peak_without", &servo::FeedForwardTuning::peak_without)
        .def_readonly("peak_with", &servo::FeedForwardTuning::peak_with)
        .def_readonly("suppression_ratio",
                      &servo::FeedForwardTuning::suppression_ratio)
        .def_readonly("evaluations", &servo::FeedForwardTuning::evaluations)
        .def_readonly("converged", &servo::FeedForwardTuning::converged)
        .def_property_readonly(
            "gain", [](const servo::FeedForwardTuning& t) { return t.params.gain; })
        .def_property_readonly("corner_hz",
                               [](const servo::FeedForwardTuning& t) {
                                   return t.params.corner_hz;
                               })
        .def_property_readonly("offset", [](const servo::FeedForwardTuning& t) {
            return t.params.offset;
        });
    sv.def("tune_feedforward", &servo::tune_feedforward, py::arg("scenario"),
           py::arg("max_eval") = 400);
    sv.def(
        "dump_config",
        [](const servo::Scenario& sc) { return config::dump_config(sc); },
        py::arg("scenario"));
}
