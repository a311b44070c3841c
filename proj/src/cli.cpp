#include "cavitychip/cli.hpp"
#include "cavitychip/config.hpp"
#include "cavitychip/constants.hpp"
#include "cavitychip/magnetics.hpp"
#include "cavitychip/optics.hpp"
#include "cavitychip/plant.hpp"
#include "cavitychip/report.hpp"
#include "cavitychip/servo.hpp"
#include "cavitychip/thermal.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cmath>
#include <memory>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

namespace cavitychip::cli {

namespace fs = std::filesystem;
using report::format_num;
using report::KeyValues;

namespace {

std::string default_out_dir()
{
    if (const char* env = std::getenv("CAVITYCHIP_OUT"))
        return env;
    return ".";
}

void emit_report(const KeyValues& kv, bool as_json, const fs::path& out_dir,
                 const std::string& stem)
{
    fs::create_directories(out_dir);
    const fs::path path = out_dir / (stem + (as_json ? ".json" : ".txt"));
    std::ofstream f(path);
    if (as_json) {
        report::write_json(f, kv);
        report::write_json(std::cout, kv);
    } else {
        report::write_kv(f, kv);
        report::write_kv(std::cout, kv);
    }
}

void write_file(const fs::path& path, const std::string& content)
{
    std::ofstream f(path, std::ios::binary);
    f << content;
}

struct CavityArgs {
    double length_um = 25.0;
    double roc_cm = 5.0;
    double wavelength_nm = 780.0;
    double aperture_um = 47.0;
    double loss_chip_ppm = 20.0;
    double loss_curved_ppm = 11.4;
};

int cmd_cavity(const CavityArgs& a, bool as_json, const std::string& out)
{
    optics::CavitySpec spec;
    spec.length = a.length_um * 1e-6;
    spec.curved_mirror_roc = a.roc_cm * 1e-2;
    spec.wavelength = a.wavelength_nm * 1e-9;
    spec.aperture_radius = a.aperture_um * 1e-6;
    spec.fixed_loss_chip = a.loss_chip_ppm * 1e-6;
    spec.fixed_loss_curved = a.loss_curved_ppm * 1e-6;

    optics::ModeDerived m;
    try {
        m = optics::derive_mode(spec);
    } catch (const std::domain_error& e) {
        std::cerr << "cavity: " << e.what() << "\n";
        return exit_bad_input;
    }

    KeyValues kv = {
        {"length_um", format_num(spec.length * 1e6)},
        {"roc_cm", format_num(spec.curved_mirror_roc * 1e2)},
        {"wavelength_nm", format_num(spec.wavelength * 1e9)},
        {"aperture_radius_um", format_num(spec.aperture_radius * 1e6)},
        {"waist_um", format_num(m.waist * 1e6)},
        {"diffraction_loss", format_num(m.diffraction_loss)},
        {"round_trip_loss", format_num(m.round_trip_loss)},
        {"finesse", format_num(m.finesse)},
        {"fsr_hz", format_num(m.fsr)},
        {"linewidth_fwhm_hz", format_num(m.linewidth_fwhm)},
        {"cooperativity", format_num(m.cooperativity)},
        {"displacement_per_linewidth_m", format_num(m.displacement_per_linewidth)},
    };
    emit_report(kv, as_json, out, "cavity_report");
    return exit_ok;
}

int cmd_fit_radius(const std::string& csv, double roc_cm, double wavelength_nm,
                   bool as_json, const std::string& out)
{
    std::vector<optics::FinesseSample> samples;
    try {
        samples = optics::load_finesse_csv(csv);
    } catch (const std::exception& e) {
        std::cerr << "fit-radius: " << e.what() << "\n";
        return exit_bad_input;
    }
    if (samples.size() < 3) {
        std::cerr << "fit-radius: insufficient data (" << samples.size()
                  << " samples, need >= 3)\n";
        return exit_insufficient_data;
    }

    const double roc = roc_cm * 1e-2;
    const double wl = wavelength_nm * 1e-9;
    optics::RadiusFit fit;
    try {
        fit = optics::fit_mirror_radius(samples, roc, wl);
    } catch (const std::invalid_argument& e) {
        std::cerr << "fit-radius: " << e.what() << "\n";
        return exit_insufficient_data;
    } catch (const std::exception& e) {
        std::cerr << "fit-radius: " << e.what() << "\n";
        return exit_numerical;
    }

    KeyValues kv = {
        {"aperture_radius_um", format_num(fit.aperture_radius * 1e6)},
        {"fixed_loss", format_num(fit.fixed_loss)},
        {"fixed_loss_ppm", format_num(fit.fixed_loss * 1e6)},
        {"chi2", format_num(fit.chi2)},
        {"iterations", std::to_string(fit.iterations)},
        {"converged", fit.converged ? "1" : "0"},
        {"n_samples", std::to_string(samples.size())},
        {"sigma_default", "5% relative finesse where not provided"},
    };
    for (size_t i = 0; i < fit.residuals.size(); ++i)
        kv.push_back({"residual_" + std::to_string(i), format_num(fit.residuals[i])});
    emit_report(kv, as_json, out, "fit_report");

    // data + model curve
    report::PlotSpec plot;
    plot.title = "finesse vs cavity length";
    plot.xlabel = "length (um)";
    plot.ylabel = "log10 finesse";
    plot.logy = false;
    report::PlotSeries data;
    data.points = true;
    data.color = "#d62728";
    for (const auto& s : samples) {
        data.x.push_back(s.length * 1e6);
        data.y.push_back(std::log10(s.finesse));
    }
    report::PlotSeries model;
    double lmin = samples[0].length, lmax = samples[0].length;
    for (const auto& s : samples) {
        lmin = std::min(lmin, s.length);
        lmax = std::max(lmax, s.length);
    }
    for (int i = 0; i <= 200; ++i) {
        const double L = lmin + (lmax - lmin) * i / 200.0;
        const double w0 = optics::mode_waist(L, roc, wl);
        const double f = 2.0 * constants::pi /
                         (std::exp(-2.0 * fit.aperture_radius * fit.aperture_radius /
                                   (w0 * w0)) +
                          fit.fixed_loss);
        model.x.push_back(L * 1e6);
        model.y.push_back(std::log10(f));
    }
    plot.series = {model, data};
    fs::create_directories(out);
    write_file(fs::path(out) / "fit_radius.svg", report::render_svg(plot));
    return exit_ok;
}

int simulate_one(const std::string& config_path, bool as_json,
                 const fs::path& out_dir, bool dump_cfg, bool with_bode)
{
    std::vector<std::string> notes;
    servo::Scenario sc;
    try {
        sc = config::scenario_from_file(config_path, &notes);
        sc.validate();
    } catch (const std::exception& e) {
        std::cerr << "simulate: " << e.what() << "\n";
        return exit_bad_input;
    }

    servo::Trace tr;
    std::unique_ptr<plant::Plant> pl;
    try {
        pl = std::make_unique<plant::Plant>(sc.plant);
        tr = servo::run_scenario(*pl, sc);
    } catch (const std::exception& e) {
        std::cerr << "simulate: " << e.what() << "\n";
        return exit_numerical;
    }

    fs::create_directories(out_dir);
    {
        std::ofstream f(out_dir / "trace.csv", std::ios::binary);
        report::write_trace_csv(f, tr);
    }
    if (dump_cfg)
        write_file(out_dir / "effective_config.cfg", config::dump_config(sc));

    KeyValues margin_kv;
    if (with_bode) {
        // loop margins plus the raw plant path responses
        const struct {
            servo::LoopPath path;
            const char* name;
        } loops[] = {{servo::LoopPath::heater, "heater"},
                     {servo::LoopPath::pzt, "pzt"},
                     {servo::LoopPath::rtd, "rtd"}};
        for (const auto& l : loops) {
            const auto rep = servo::open_loop_bode(*pl, sc, l.path);
            std::ofstream f(out_dir / ("margin_" + std::string(l.name) + ".csv"),
                            std::ios::binary);
            report::write_margin_csv(f, rep);
            const std::string p = std::string("margin_") + l.name;
            if (rep.unconditionally_stable) {
                margin_kv.push_back({p + "_stable", "unconditional"});
            } else {
                margin_kv.push_back({p + "_crossover_hz", format_num(rep.crossover_hz)});
                margin_kv.push_back(
                    {p + "_phase_margin_deg", format_num(rep.phase_margin_deg)});
                margin_kv.push_back(
                    {p + "_gain_margin_db", format_num(rep.gain_margin_db)});
            }
        }
        std::vector<report::BodeRow> heater_rows, dist_rows;
        for (int i = 0; i < 120; ++i) {
            const double f =
                0.1 * std::pow(1e7, double(i) / 119.0);
            const double w = 2.0 * constants::pi * f;
            const auto h = pl->heater_lift().eval(w);
            const auto d = pl->disturbance_lift().eval(w);
            heater_rows.push_back({f, std::abs(h), std::arg(h)});
            dist_rows.push_back({f, std::abs(d), std::arg(d)});
        }
        std::ofstream fh(out_dir / "plant_heater_bode.csv", std::ios::binary);
        report::write_bode_csv(fh, heater_rows, "mag");
        std::ofstream fd(out_dir / "plant_disturbance_bode.csv", std::ios::binary);
        report::write_bode_csv(fd, dist_rows, "mag");
    }

    KeyValues kv = {
        {"scheme", servo::scheme_name(sc.scheme.kind)},
        {"linewidth_hz", format_num(tr.linewidth_hz)},
        {"peak_offset_hz", format_num(tr.summary.peak_offset_hz)},
        {"peak_offset_settled_hz", format_num(tr.summary.peak_offset_settled_hz)},
        {"settle_window_s", "0.001"},
        {"time_above_linewidth_s", format_num(tr.summary.time_above_linewidth_s)},
        {"settle_time_s", format_num(tr.summary.settle_time_s)},
        {"rms_offset_after_settle_hz",
         format_num(tr.summary.rms_offset_after_settle_hz)},
        {"diverged", tr.diverged ? "1" : "0"},
    };
    if (tr.diverged)
        kv.push_back({"diverged_at_s", format_num(tr.diverged_at_s)});
    for (const auto& kvp : margin_kv)
        kv.push_back(kvp);
    for (const auto& n : notes)
        kv.push_back({"note", n});
    emit_report(kv, as_json, out_dir, "summary");

    report::PlotSpec plot;
    plot.title = "cavity resonance deviation";
    plot.xlabel = "time (s)";
    plot.ylabel = "offset (MHz)";
    report::PlotSeries line;
    line.x = tr.t;
    for (double v : tr.offset_hz)
        line.y.push_back(v * 1e-6);
    plot.series = {line};
    write_file(out_dir / "trace.svg", report::render_svg(plot));

    return tr.diverged ? exit_numerical : exit_ok;
}

int cmd_simulate(const std::vector<std::string>& configs, bool as_json,
                 const std::string& out, bool dump_cfg, bool with_bode, int jobs)
{
    if (configs.size() == 1)
        return simulate_one(configs[0], as_json, out, dump_cfg, with_bode);

    // sweep mode: one worker per scenario, each writing to its own directory
    std::vector<int> rcs(configs.size(), exit_ok);
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    const int nworkers = std::max(1, std::min<int>(jobs, int(configs.size())));
    for (int w = 0; w < nworkers; ++w)
        pool.emplace_back([&]() {
            for (size_t i = next.fetch_add(1); i < configs.size();
                 i = next.fetch_add(1)) {
                const fs::path dir =
                    fs::path(out) / fs::path(configs[i]).stem();
                rcs[i] = simulate_one(configs[i], as_json, dir, dump_cfg, with_bode);
            }
        });
    for (auto& t : pool)
        t.join();
    int rc = exit_ok;
    for (int r : rcs)
        rc = std::max(rc, r);
    return rc;
}

int cmd_thermal_bode(const std::string& kind, double amplitude, double distance_um,
                     double fmin, double fmax, int n, bool as_json,
                     const std::string& out)
{
    if (!(fmax >= fmin) || fmin <= 0.0) {
        std::cerr << "thermal-bode: bad frequency range\n";
        return exit_bad_input;
    }
    const auto mat = thermal::sapphire();
    const double r = distance_um * 1e-6;

    std::vector<report::BodeRow> rows;
    for (int i = 0; i < n; ++i) {
        const double f =
            n == 1 ? fmin
                   : std::exp(std::log(fmin) +
                              (std::log(fmax) - std::log(fmin)) * i / double(n - 1));
        const double w = 2.0 * constants::pi * f;
        std::complex<double> t;
        try {
            t = kind == "point" ? thermal::point_response(amplitude, r, w, mat)
                                : thermal::line_response(amplitude, r, w, mat);
        } catch (const std::exception& e) {
            std::cerr << "thermal-bode: " << e.what() << "\n";
            return exit_bad_input;
        }
        rows.push_back({f, std::abs(t), std::arg(t)});
    }

    fs::create_directories(out);
    std::ofstream f(fs::path(out) / "thermal_bode.csv", std::ios::binary);
    report::write_bode_csv(f, rows);
    report::write_bode_csv(std::cout, rows);

    if (as_json) {
        KeyValues kv = {{"kind", kind},
                        {"amplitude", format_num(amplitude)},
                        {"distance_um", format_num(distance_um)},
                        {"rows", std::to_string(rows.size())}};
        emit_report(kv, true, out, "thermal_bode_meta");
    }
    return exit_ok;
}

int cmd_magnetics(const std::vector<double>& wire_spec, double eval_x_um,
                  double eval_z_um, double ripple_mg, double ripple_hz,
                  bool as_json, const std::string& out)
{
    magnetics::WireSet ws;
    if (wire_spec.empty()) {
        ws = magnetics::default_waveguide();
    } else {
        if (wire_spec.size() % 3 != 0) {
            std::cerr << "magnetics: --wire expects x_um z_um current_a triples\n";
            return exit_bad_input;
        }
        for (size_t i = 0; i < wire_spec.size(); i += 3)
            ws.wires.push_back(
                {wire_spec[i] * 1e-6, wire_spec[i + 1] * 1e-6, wire_spec[i + 2]});
    }
    std::array<double, 2> pt = {eval_x_um * 1e-6, eval_z_um * 1e-6};

    magnetics::FieldAndGradient fg;
    try {
        fg = magnetics::waveguide_field_and_gradient(ws, pt);
    } catch (const std::exception& e) {
        std::cerr << "magnetics: " << e.what() << "\n";
        return exit_bad_input;
    }

    fs::create_directories(out);
    std::ofstream f(fs::path(out) / "magnetics.csv", std::ios::binary);
    const std::string header =
        "x_um,z_um,bx_g,bz_g,dbx_dx_g_cm,dbx_dz_g_cm,dbz_dx_g_cm,dbz_dz_g_cm\n";
    auto row = [&](std::ostream& os) {
        os << header << format_num(eval_x_um) << "," << format_num(eval_z_um) << ","
           << format_num(fg.field[0] * 1e4) << "," << format_num(fg.field[1] * 1e4)
           << "," << format_num(fg.grad[0][0] * 1e4 * 1e-2) << ","
           << format_num(fg.grad[0][1] * 1e4 * 1e-2) << ","
           << format_num(fg.grad[1][0] * 1e4 * 1e-2) << ","
           << format_num(fg.grad[1][1] * 1e4 * 1e-2) << "\n";
    };
    row(f);
    row(std::cout);

    KeyValues kv = {
        {"field_magnitude_g",
         format_num(std::hypot(fg.field[0], fg.field[1]) * 1e4)},
        {"ripple_energy_scale_k",
         format_num(magnetics::heater_ripple_potential(ripple_mg * 1e-7, ripple_hz))},
        {"ripple_mg", format_num(ripple_mg)},
        {"ripple_freq_hz", format_num(ripple_hz)},
    };
    emit_report(kv, as_json, out, "magnetics_report");
    return exit_ok;
}

} // namespace

int run(int argc, const char* const* argv)
{
    CLI::App app{"microcavity atom-chip toolkit: cavity optics, chip thermal "
                 "response, magnetics, and resonance-stabilization simulation"};
    app.require_subcommand(1);

    bool as_json = false;
    std::string out = default_out_dir();
    app.add_flag("--json", as_json, "machine-readable output");
    app.add_option("--out", out, "output directory (default $CAVITYCHIP_OUT or .)");

    auto* cavity = app.add_subcommand("cavity", "cavity figures of merit");
    CavityArgs ca;
    cavity->add_option("--length-um", ca.length_um, "mirror spacing");
    cavity->add_option("--roc-cm", ca.roc_cm, "curved mirror radius of curvature");
    cavity->add_option("--wavelength-nm", ca.wavelength_nm, "wavelength");
    cavity->add_option("--aperture-um", ca.aperture_um, "chip mirror radius");
    cavity->add_option("--loss-chip-ppm", ca.loss_chip_ppm, "chip mirror loss");
    cavity->add_option("--loss-curved-ppm", ca.loss_curved_ppm, "curved mirror loss");

    auto* fit = app.add_subcommand("fit-radius", "fit mirror radius and fixed loss "
                                                 "to finesse-vs-length data");
    std::string fit_csv;
    double fit_roc_cm = 5.0, fit_wl_nm = 780.0;
    fit->add_option("csv", fit_csv, "CSV: length_um,finesse[,sigma_finesse]")
        ->required();
    fit->add_option("--roc-cm", fit_roc_cm, "curved mirror ROC");
    fit->add_option("--wavelength-nm", fit_wl_nm, "wavelength");

    auto* sim = app.add_subcommand("simulate", "run a stabilization scenario");
    std::vector<std::string> sim_configs;
    bool dump_cfg = false;
    bool with_bode = false;
    int jobs = int(std::thread::hardware_concurrency());
    sim->add_option("config", sim_configs, "scenario config file(s)")->required();
    sim->add_flag("--dump-config", dump_cfg, "write the full effective config");
    sim->add_flag("--bode", with_bode, "also export loop margins and plant "
                                       "path responses");
    sim->add_option("--jobs", jobs, "sweep worker count");

    auto* tb = app.add_subcommand("thermal-bode", "temperature frequency response "
                                                  "of a chip heat source");
    std::string tb_kind = "point";
    double tb_amp = 1.0, tb_dist = 100.0, tb_fmin = 1.0, tb_fmax = 1e6;
    int tb_n = 100;
    tb->add_option("--kind", tb_kind, "point | line")
        ->check(CLI::IsMember({"point", "line"}));
    tb->add_option("--amplitude", tb_amp, "W (point) or W/m (line)");
    tb->add_option("--distance-um", tb_dist, "source distance");
    tb->add_option("--fmin-hz", tb_fmin, "sweep start");
    tb->add_option("--fmax-hz", tb_fmax, "sweep end");
    tb->add_option("--points", tb_n, "sweep points (0 = header only)");

    auto* mag = app.add_subcommand("magnetics", "wire fields and gradients");
    std::vector<double> wire_spec;
    double eval_x = 0.0, eval_z = 50.0, ripple_mg = 40.0, ripple_hz = 1e5;
    mag->add_option("--wire", wire_spec,
                    "wire triples: x_um z_um current_a (repeatable)");
    mag->add_option("--x-um", eval_x, "evaluation x");
    mag->add_option("--z-um", eval_z, "evaluation height");
    mag->add_option("--ripple-mg", ripple_mg, "heater ripple field for the "
                                              "energy-scale report");
    mag->add_option("--ripple-hz", ripple_hz, "heater drive frequency");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? exit_ok : exit_bad_input;
    }

    try {
        if (cavity->parsed())
            return cmd_cavity(ca, as_json, out);
        if (fit->parsed())
            return cmd_fit_radius(fit_csv, fit_roc_cm, fit_wl_nm, as_json, out);
        if (sim->parsed())
            return cmd_simulate(sim_configs, as_json, out, dump_cfg, with_bode,
                                jobs);
        if (tb->parsed()) {
            if (tb_n <= 0) {
                // explicit request for an empty sweep: header-only CSV
                fs::create_directories(out);
                std::ofstream f(fs::path(out) / "thermal_bode.csv", std::ios::binary);
                f << "freq_hz,mag_K,phase_rad\n";
                std::cout << "freq_hz,mag_K,phase_rad\n";
                return exit_ok;
            }
            return cmd_thermal_bode(tb_kind, tb_amp, tb_dist, tb_fmin, tb_fmax,
                                    tb_n, as_json, out);
        }
        if (mag->parsed())
            return cmd_magnetics(wire_spec, eval_x, eval_z, ripple_mg, ripple_hz,
                                 as_json, out);
    } catch (const config::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return exit_bad_input;
    } catch (const std::domain_error& e) {
        std::cerr << e.what() << "\n";
        return exit_bad_input;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return exit_numerical;
    }
    return exit_bad_input;
}

}
