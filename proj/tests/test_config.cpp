#include "cavitychip/config.hpp"

#include <doctest.h>

#include <cmath>

using namespace cavitychip;

TEST_CASE("minimal config fills committed defaults with notes")
{
    std::vector<std::string> notes;
    const auto sc = config::scenario_from_string("[scheme]\ntype = direct_dual\n",
                                                 &notes);
    CHECK(sc.scheme.kind == servo::SchemeKind::direct_dual);
    // everything else came from the committed defaults
    const auto ref = servo::default_scenario(servo::SchemeKind::direct_dual);
    CHECK(sc.plant.cavity_length == ref.plant.cavity_length);
    CHECK(sc.scheme.heater_loop.kp == ref.scheme.heater_loop.kp);
    CHECK(sc.dt == ref.dt);
    CHECK(notes.size() == 5); // all sections except [scheme]
}

TEST_CASE("unknown keys and sections are rejected with line numbers")
{
    CHECK_THROWS_WITH_AS(
        (void)config::scenario_from_string("[cavity]\nlenght_um = 100\n"),
        doctest::Contains("line 2"), config::ConfigError);
    CHECK_THROWS_AS(
        (void)config::scenario_from_string("[cavities]\nlength_um = 100\n"),
        config::ConfigError);
    CHECK_THROWS_AS((void)config::scenario_from_string("length_um = 100\n"),
                    config::ConfigError);
    CHECK_THROWS_WITH_AS(
        (void)config::scenario_from_string("[cavity]\nlength_um = abc\n"),
        doctest::Contains("bad number"), config::ConfigError);
}

TEST_CASE("values, units and pulses parse")
{
    const std::string text = R"(
# scenario
[cavity]
length_um = 215
wavelength_nm = 850
finesse = 2e4

[plant]
heater_distance_um = 12
heater_kernel = line

[scheme]
type = temperature_servo
rtd_kp_w_k = 0.01

[disturbance]
pulse = 0.01 0.02 0.5
pulse = 0.05 0.06 1.5

[run]
dt_s = 1e-5
duration_s = 0.1
rng_seed = 7
)";
    const auto sc = config::scenario_from_string(text);
    CHECK(sc.plant.cavity_length == doctest::Approx(215e-6));
    CHECK(sc.plant.wavelength == doctest::Approx(850e-9));
    CHECK(sc.plant.heater_distance == doctest::Approx(12e-6));
    CHECK(sc.plant.heater_uses_line_kernel);
    CHECK(sc.scheme.rtd_loop.kp == doctest::Approx(0.01));
    REQUIRE(sc.disturbance.size() == 2);
    CHECK(sc.disturbance[1].amps == doctest::Approx(1.5));
    CHECK(sc.rng_seed == 7);
    CHECK_NOTHROW(sc.validate());
}

TEST_CASE("ramp sugar expands to a staircase")
{
    const std::string text = R"(
[scheme]
type = temperature_servo
[disturbance]
ramp = 0.01 0.11 0 3.0 10
[run]
duration_s = 0.3
)";
    const auto sc = config::scenario_from_string(text);
    REQUIRE(sc.disturbance.size() == 10);
    CHECK(sc.disturbance.front().t_start == doctest::Approx(0.01));
    CHECK(sc.disturbance.back().t_end == doctest::Approx(0.11));
    CHECK(sc.disturbance.front().amps < sc.disturbance.back().amps);
    CHECK(sc.disturbance.back().amps == doctest::Approx(3.0 * 9.5 / 10.0));
    CHECK_NOTHROW(sc.validate());
}

TEST_CASE("dump and reparse round-trips exactly")
{
    auto sc = servo::default_scenario(servo::SchemeKind::feed_forward);
    sc.rng_seed = 99;
    sc.sensor_noise_rms = 1.5e5;
    const std::string dumped = config::dump_config(sc);
    const auto back = config::scenario_from_string(dumped);
    const std::string dumped_again = config::dump_config(back);
    CHECK(dumped == dumped_again);
    CHECK(back.plant.cavity_length == sc.plant.cavity_length);
    CHECK(back.scheme.ff.gain == sc.scheme.ff.gain);
    CHECK(back.scheme.ff.offset == sc.scheme.ff.offset);
    CHECK(back.rng_seed == sc.rng_seed);
    CHECK(back.dt == sc.dt);
}
