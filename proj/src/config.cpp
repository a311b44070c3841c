#include "cavitychip/config.hpp"
#include "cavitychip/thermal.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace cavitychip::config {

namespace {

struct Line {
    int no;
    std::string section;
    std::string key;
    std::string value;
};

std::string trim(const std::string& s)
{
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<Line> tokenize(const std::string& text)
{
    std::vector<Line> out;
    std::istringstream in(text);
    std::string raw;
    int no = 0;
    std::string section;
    while (std::getline(in, raw)) {
        ++no;
        const size_t hash = raw.find('#');
        if (hash != std::string::npos)
            raw.erase(hash);
        const std::string line = trim(raw);
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(no) + ": bad section header");
            section = trim(line.substr(1, line.size() - 2));
            out.push_back({no, section, "", ""});
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(no) + ": expected key = value");
        if (section.empty())
            throw ConfigError("line " + std::to_string(no) + ": key outside any section");
        out.push_back({no, section, trim(line.substr(0, eq)), trim(line.substr(eq + 1))});
    }
    return out;
}

double parse_num(const Line& l)
{
    try {
        size_t used = 0;
        const double v = std::stod(l.value, &used);
        if (used != l.value.size())
            throw std::invalid_argument(l.value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("line " + std::to_string(l.no) + ": bad number '" +
                          l.value + "' for key " + l.key);
    }
}

// shift the decimal exponent of a numeric string by pow10; with parsing
// and printing each rounding once, unit-scaled keys round-trip exactly
std::string scale_decimal(const std::string& s, int pow10)
{
    if (pow10 == 0 || s == "0" || s == "-0" || s == "0.0")
        return s;
    const size_t e = s.find_first_of("eE");
    if (e == std::string::npos)
        return s + "e" + std::to_string(pow10);
    const int old_exp = std::stoi(s.substr(e + 1));
    return s.substr(0, e) + "e" + std::to_string(old_exp + pow10);
}

// SI value carried by a config key whose name bakes in a power-of-ten unit
double parse_num_scaled(const Line& l, int pow10)
{
    parse_num(l); // validates the raw text
    return std::stod(scale_decimal(l.value, pow10));
}

std::vector<double> parse_nums(const Line& l, size_t expect)
{
    std::istringstream ss(l.value);
    std::vector<double> vals;
    std::string tok;
    while (ss >> tok) {
        try {
            size_t used = 0;
            vals.push_back(std::stod(tok, &used));
            if (used != tok.size())
                throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ConfigError("line " + std::to_string(l.no) + ": bad number '" +
                              tok + "' in key " + l.key);
        }
    }
    if (vals.size() != expect)
        throw ConfigError("line " + std::to_string(l.no) + ": key " + l.key +
                          " expects " + std::to_string(expect) + " values");
    return vals;
}

const std::set<std::string> known_sections = {
    "cavity", "material", "plant", "scheme", "disturbance", "run"};

const std::map<std::string, std::set<std::string>> known_keys = {
    {"cavity", {"length_um", "wavelength_nm", "finesse"}},
    {"material",
     {"conductivity_w_mk", "diffusivity_m2_s", "expansion_per_k", "thickness_mm"}},
    {"plant",
     {"heater_distance_um", "disturbance_distance_um", "rtd_heater_distance_um",
      "rtd_disturbance_distance_um", "pzt_gain_nm_v", "pzt_resonance_khz",
      "pzt_q", "fast_path_fraction", "heater_resistance_ohm",
      "waveguide_resistance_ohm_m", "sio2_lag_us", "heater_kernel", "n_poles",
      "fit_fmin_hz", "fit_fmax_hz", "fit_samples"}},
    {"scheme",
     {"type", "rtd_setpoint_k", "crossover_split_hz", "split_complementary",
      "nominal_bandwidth_hz",
      "pzt_kp_v_hz", "pzt_ki_v_hz_s", "pzt_kd_v_s_hz", "pzt_deriv_filter_hz",
      "pzt_lowpass_hz", "pzt_boost_hz", "pzt_min_v", "pzt_max_v",
      "heater_kp_w_hz", "heater_ki_w_hz_s", "heater_kd_w_s_hz",
      "heater_deriv_filter_hz", "heater_lowpass_hz", "heater_boost_hz",
      "heater_min_w", "heater_max_w",
      "rtd_kp_w_k", "rtd_ki_w_k_s", "rtd_kd_w_s_k", "rtd_deriv_filter_hz",
      "rtd_lowpass_hz", "rtd_boost_hz", "rtd_min_w", "rtd_max_w",
      "ff_gain_k_a", "ff_corner_hz", "ff_offset_k", "ff_feedthrough"}},
    {"disturbance", {"pulse", "ramp"}},
    {"run",
     {"dt_s", "duration_s", "sensor_noise_rms_hz", "rng_seed", "record_stride"}},
};

void apply_controller_key(servo::ControllerConfig& c, const std::string& suffix,
                          const Line& l)
{
    const double v = parse_num(l);
    if (suffix == "kp")
        c.kp = v;
    else if (suffix == "ki")
        c.ki = v;
    else if (suffix == "kd")
        c.kd = v;
    else if (suffix == "deriv_filter")
        c.deriv_filter_hz = v;
    else if (suffix == "lowpass")
        c.lowpass_corner_hz = v;
    else if (suffix == "boost")
        c.boost_corner_hz = v;
    else if (suffix == "min")
        c.out_min = v;
    else if (suffix == "max")
        c.out_max = v;
}

// strips the unit tail of a controller key: pzt_kp_v_hz -> kp
std::string controller_suffix(const std::string& key, const std::string& prefix)
{
    std::string rest = key.substr(prefix.size() + 1);
    for (const char* stem : {"kp", "ki", "kd", "deriv_filter", "lowpass", "boost",
                             "min", "max"})
        if (rest.rfind(stem, 0) == 0)
            return stem;
    return rest;
}

} // namespace

servo::Scenario scenario_from_string(const std::string& text,
                                     std::vector<std::string>* notes)
{
    const auto lines = tokenize(text);

    std::set<std::string> present;
    for (const auto& l : lines) {
        if (!known_sections.count(l.section))
            throw ConfigError("line " + std::to_string(l.no) + ": unknown section [" +
                              l.section + "]");
        present.insert(l.section);
        if (!l.key.empty() && !known_keys.at(l.section).count(l.key))
            throw ConfigError("line " + std::to_string(l.no) + ": unknown key '" +
                              l.key + "' in section [" + l.section + "]");
    }

    // the scheme type selects the committed defaults everything else edits
    servo::SchemeKind kind = servo::SchemeKind::temperature_servo;
    for (const auto& l : lines)
        if (l.section == "scheme" && l.key == "type") {
            try {
                kind = servo::scheme_from_name(l.value);
            } catch (const std::exception& e) {
                throw ConfigError("line " + std::to_string(l.no) + ": " + e.what());
            }
        }

    servo::Scenario sc = servo::default_scenario(kind);
    if (present.count("disturbance"))
        sc.disturbance.clear();

    for (const auto& l : lines) {
        if (l.key.empty())
            continue;
        if (l.section == "cavity") {
            if (l.key == "length_um")
                sc.plant.cavity_length = parse_num_scaled(l, -6);
            else if (l.key == "wavelength_nm")
                sc.plant.wavelength = parse_num_scaled(l, -9);
            else if (l.key == "finesse")
                sc.plant.finesse = parse_num(l);
        } else if (l.section == "material") {
            if (l.key == "conductivity_w_mk")
                sc.plant.material.conductivity = parse_num(l);
            else if (l.key == "diffusivity_m2_s")
                sc.plant.material.diffusivity = parse_num(l);
            else if (l.key == "expansion_per_k")
                sc.plant.material.expansion_coeff = parse_num(l);
            else if (l.key == "thickness_mm")
                sc.plant.material.thickness = parse_num_scaled(l, -3);
        } else if (l.section == "plant") {
            if (l.key == "heater_distance_um")
                sc.plant.heater_distance = parse_num_scaled(l, -6);
            else if (l.key == "disturbance_distance_um")
                sc.plant.disturbance_distance = parse_num_scaled(l, -6);
            else if (l.key == "rtd_heater_distance_um")
                sc.plant.rtd_heater_distance = parse_num_scaled(l, -6);
            else if (l.key == "rtd_disturbance_distance_um")
                sc.plant.rtd_disturbance_distance = parse_num_scaled(l, -6);
            else if (l.key == "pzt_gain_nm_v")
                sc.plant.pzt_gain = parse_num_scaled(l, -9);
            else if (l.key == "pzt_resonance_khz")
                sc.plant.pzt_resonance_hz = parse_num_scaled(l, 3);
            else if (l.key == "pzt_q")
                sc.plant.pzt_q = parse_num(l);
            else if (l.key == "fast_path_fraction")
                sc.plant.fast_path_fraction = parse_num(l);
            else if (l.key == "heater_resistance_ohm")
                sc.plant.heater_resistance = parse_num(l);
            else if (l.key == "waveguide_resistance_ohm_m")
                sc.plant.waveguide_resistance_per_length = parse_num(l);
            else if (l.key == "sio2_lag_us")
                sc.plant.sio2_lag = parse_num_scaled(l, -6);
            else if (l.key == "heater_kernel") {
                if (l.value == "point")
                    sc.plant.heater_uses_line_kernel = false;
                else if (l.value == "line")
                    sc.plant.heater_uses_line_kernel = true;
                else
                    throw ConfigError("line " + std::to_string(l.no) +
                                      ": heater_kernel must be point or line");
            } else if (l.key == "n_poles")
                sc.plant.n_poles = int(parse_num(l));
            else if (l.key == "fit_fmin_hz")
                sc.plant.fit_fmin_hz = parse_num(l);
            else if (l.key == "fit_fmax_hz")
                sc.plant.fit_fmax_hz = parse_num(l);
            else if (l.key == "fit_samples")
                sc.plant.fit_samples = int(parse_num(l));
        } else if (l.section == "scheme") {
            if (l.key == "type")
                continue; // consumed above
            else if (l.key == "rtd_setpoint_k")
                sc.scheme.rtd_setpoint = parse_num(l);
            else if (l.key == "crossover_split_hz")
                sc.scheme.crossover_split_hz = parse_num(l);
            else if (l.key == "split_complementary")
                sc.scheme.split_complementary = parse_num(l) != 0.0;
            else if (l.key == "nominal_bandwidth_hz")
                sc.scheme.nominal_bandwidth_hz = parse_num(l);
            else if (l.key.rfind("pzt_", 0) == 0)
                apply_controller_key(sc.scheme.pzt_loop,
                                     controller_suffix(l.key, "pzt"), l);
            else if (l.key.rfind("heater_", 0) == 0)
                apply_controller_key(sc.scheme.heater_loop,
                                     controller_suffix(l.key, "heater"), l);
            else if (l.key.rfind("rtd_", 0) == 0)
                apply_controller_key(sc.scheme.rtd_loop,
                                     controller_suffix(l.key, "rtd"), l);
            else if (l.key == "ff_gain_k_a")
                sc.scheme.ff.gain = parse_num(l);
            else if (l.key == "ff_corner_hz")
                sc.scheme.ff.corner_hz = parse_num(l);
            else if (l.key == "ff_offset_k")
                sc.scheme.ff.offset = parse_num(l);
            else if (l.key == "ff_feedthrough")
                sc.scheme.ff.feedthrough = parse_num(l);
        } else if (l.section == "disturbance") {
            if (l.key == "pulse") {
                const auto v = parse_nums(l, 3);
                sc.disturbance.push_back({v[0], v[1], v[2]});
            } else if (l.key == "ramp") {
                // staircase approximation of a linear current ramp
                const auto v = parse_nums(l, 5);
                const int steps = int(v[4]);
                if (steps < 1)
                    throw ConfigError("line " + std::to_string(l.no) +
                                      ": ramp needs >= 1 steps");
                for (int i = 0; i < steps; ++i) {
                    const double ta = v[0] + (v[1] - v[0]) * double(i) / steps;
                    // pin the last edge to the requested end time: rounding
                    // can otherwise overshoot by an ulp into a later pulse
                    const double tb =
                        i + 1 == steps
                            ? v[1]
                            : v[0] + (v[1] - v[0]) * double(i + 1) / steps;
                    const double amp =
                        v[2] + (v[3] - v[2]) * (double(i) + 0.5) / steps;
                    sc.disturbance.push_back({ta, tb, amp});
                }
            }
        } else if (l.section == "run") {
            if (l.key == "dt_s")
                sc.dt = parse_num(l);
            else if (l.key == "duration_s")
                sc.duration = parse_num(l);
            else if (l.key == "sensor_noise_rms_hz")
                sc.sensor_noise_rms = parse_num(l);
            else if (l.key == "rng_seed")
                sc.rng_seed = std::uint64_t(parse_num(l));
            else if (l.key == "record_stride")
                sc.record_stride = int(parse_num(l));
        }
    }

    if (notes)
        for (const auto& section : known_sections)
            if (!present.count(section))
                notes->push_back("section [" + section +
                                 "] not given; committed defaults used (" +
                                 servo::scheme_name(kind) + ")");
    return sc;
}

servo::Scenario scenario_from_file(const std::string& path,
                                   std::vector<std::string>* notes)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return scenario_from_string(ss.str(), notes);
}

namespace {

std::string num(double v)
{
    // shortest representation that parses back to the same double
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::stod(buf) == v)
            return buf;
    }
    return buf;
}

std::string num_scaled(double si_value, int display_pow10)
{
    return scale_decimal(num(si_value), display_pow10);
}

void dump_controller(std::ostringstream& os, const std::string& p,
                     const char* units_err, const char* units_out,
                     const servo::ControllerConfig& c)
{
    os << p << "_kp_" << units_out << "_" << units_err << " = " << num(c.kp) << "\n";
    os << p << "_ki_" << units_out << "_" << units_err << "_s = " << num(c.ki) << "\n";
    os << p << "_kd_" << units_out << "_s_" << units_err << " = " << num(c.kd) << "\n";
    os << p << "_deriv_filter_hz = " << num(c.deriv_filter_hz) << "\n";
    os << p << "_lowpass_hz = " << num(c.lowpass_corner_hz) << "\n";
    os << p << "_boost_hz = " << num(c.boost_corner_hz) << "\n";
    os << p << "_min_" << units_out << " = " << num(c.out_min) << "\n";
    os << p << "_max_" << units_out << " = " << num(c.out_max) << "\n";
}

} // namespace

std::string dump_config(const servo::Scenario& sc)
{
    std::ostringstream os;
    os << "[cavity]\n";
    os << "length_um = " << num_scaled(sc.plant.cavity_length, 6) << "\n";
    os << "wavelength_nm = " << num_scaled(sc.plant.wavelength, 9) << "\n";
    os << "finesse = " << num(sc.plant.finesse) << "\n";
    os << "\n[material]\n";
    os << "conductivity_w_mk = " << num(sc.plant.material.conductivity) << "\n";
    os << "diffusivity_m2_s = " << num(sc.plant.material.diffusivity) << "\n";
    os << "expansion_per_k = " << num(sc.plant.material.expansion_coeff) << "\n";
    os << "thickness_mm = " << num_scaled(sc.plant.material.thickness, 3) << "\n";
    os << "\n[plant]\n";
    os << "heater_distance_um = " << num_scaled(sc.plant.heater_distance, 6) << "\n";
    os << "disturbance_distance_um = " << num_scaled(sc.plant.disturbance_distance, 6) << "\n";
    os << "rtd_heater_distance_um = " << num_scaled(sc.plant.rtd_heater_distance, 6) << "\n";
    os << "rtd_disturbance_distance_um = " << num_scaled(sc.plant.rtd_disturbance_distance, 6) << "\n";
    os << "pzt_gain_nm_v = " << num_scaled(sc.plant.pzt_gain, 9) << "\n";
    os << "pzt_resonance_khz = " << num_scaled(sc.plant.pzt_resonance_hz, -3) << "\n";
    os << "pzt_q = " << num(sc.plant.pzt_q) << "\n";
    os << "fast_path_fraction = " << num(sc.plant.fast_path_fraction) << "\n";
    os << "heater_resistance_ohm = " << num(sc.plant.heater_resistance) << "\n";
    os << "waveguide_resistance_ohm_m = "
       << num(sc.plant.waveguide_resistance_per_length) << "\n";
    os << "sio2_lag_us = " << num_scaled(sc.plant.sio2_lag, 6) << "\n";
    os << "heater_kernel = " << (sc.plant.heater_uses_line_kernel ? "line" : "point")
       << "\n";
    os << "n_poles = " << sc.plant.n_poles << "\n";
    os << "fit_fmin_hz = " << num(sc.plant.fit_fmin_hz) << "\n";
    os << "fit_fmax_hz = " << num(sc.plant.fit_fmax_hz) << "\n";
    os << "fit_samples = " << sc.plant.fit_samples << "\n";
    os << "\n[scheme]\n";
    os << "type = " << servo::scheme_name(sc.scheme.kind) << "\n";
    os << "rtd_setpoint_k = " << num(sc.scheme.rtd_setpoint) << "\n";
    os << "crossover_split_hz = " << num(sc.scheme.crossover_split_hz) << "\n";
    os << "split_complementary = " << (sc.scheme.split_complementary ? 1 : 0)
       << "\n";
    os << "nominal_bandwidth_hz = " << num(sc.scheme.nominal_bandwidth_hz) << "\n";
    dump_controller(os, "pzt", "hz", "v", sc.scheme.pzt_loop);
    dump_controller(os, "heater", "hz", "w", sc.scheme.heater_loop);
    dump_controller(os, "rtd", "k", "w", sc.scheme.rtd_loop);
    os << "ff_gain_k_a = " << num(sc.scheme.ff.gain) << "\n";
    os << "ff_corner_hz = " << num(sc.scheme.ff.corner_hz) << "\n";
    os << "ff_offset_k = " << num(sc.scheme.ff.offset) << "\n";
    os << "ff_feedthrough = " << num(sc.scheme.ff.feedthrough) << "\n";
    os << "\n[disturbance]\n";
    for (const auto& p : sc.disturbance)
        os << "pulse = " << num(p.t_start) << " " << num(p.t_end) << " "
           << num(p.amps) << "\n";
    os << "\n[run]\n";
    os << "dt_s = " << num(sc.dt) << "\n";
    os << "duration_s = " << num(sc.duration) << "\n";
    os << "sensor_noise_rms_hz = " << num(sc.sensor_noise_rms) << "\n";
    os << "rng_seed = " << sc.rng_seed << "\n";
    os << "record_stride = " << sc.record_stride << "\n";
    return os.str();
}

}
