#pragma once

#include "cavitychip/optics.hpp"
#include "cavitychip/servo.hpp"

#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace cavitychip::report {

// All emitters are deterministic byte streams: fixed number formatting,
// no timestamps.

std::string format_num(double v);

using KeyValues = std::vector<std::pair<std::string, std::string>>;

void write_kv(std::ostream& os, const KeyValues& kv);
void write_json(std::ostream& os, const KeyValues& kv);

void write_trace_csv(std::ostream& os, const servo::Trace& trace);
void write_margin_csv(std::ostream& os, const servo::MarginReport& rep);

struct BodeRow {
    double freq_hz;
    double mag;
    double phase_rad;
};
void write_bode_csv(std::ostream& os, const std::vector<BodeRow>& rows,
                    const std::string& mag_label = "mag_K");

// Minimal static SVG: one or two polylines plus optional scatter points.
struct PlotSeries {
    std::vector<double> x, y;
    bool points = false; // scatter instead of polyline
    std::string color = "#1f77b4";
};

struct PlotSpec {
    std::string title, xlabel, ylabel;
    bool logx = false, logy = false;
    std::vector<PlotSeries> series;
};

std::string render_svg(const PlotSpec& spec);

}
