#pragma once

#include "cavitychip/servo.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace cavitychip::config {

// Scenario configs are plain sectioned text with unit-suffixed keys:
//
//   [cavity]
//   length_um = 215
//   finesse = 2e4
//   [scheme]
//   type = direct_dual
//   [disturbance]
//   pulse = 0.01 0.05 3.0
//
// Unknown keys and sections are rejected. Sections that are absent are
// filled from the committed defaults of the selected scheme; a note per
// defaulted section is appended to `notes`.

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

servo::Scenario scenario_from_string(const std::string& text,
                                     std::vector<std::string>* notes = nullptr);
servo::Scenario scenario_from_file(const std::string& path,
                                   std::vector<std::string>* notes = nullptr);

// Full effective configuration; parsing it again reproduces the run.
std::string dump_config(const servo::Scenario& sc);

}
