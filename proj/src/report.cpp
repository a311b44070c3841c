#include "cavitychip/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace cavitychip::report {

std::string format_num(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void write_kv(std::ostream& os, const KeyValues& kv)
{
    for (const auto& [k, v] : kv)
        os << k << " = " << v << "\n";
}

namespace {

std::string json_escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\')
            out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

bool looks_numeric(const std::string& v)
{
    if (v.empty())
        return false;
    char* end = nullptr;
    std::strtod(v.c_str(), &end);
    return end && *end == '\0';
}

} // namespace

void write_json(std::ostream& os, const KeyValues& kv)
{
    os << "{\n";
    for (size_t i = 0; i < kv.size(); ++i) {
        os << "  \"" << json_escape(kv[i].first) << "\": ";
        if (looks_numeric(kv[i].second))
            os << kv[i].second;
        else
            os << "\"" << json_escape(kv[i].second) << "\"";
        os << (i + 1 < kv.size() ? ",\n" : "\n");
    }
    os << "}\n";
}

void write_trace_csv(std::ostream& os, const servo::Trace& trace)
{
    os << "t_s,offset_hz,pzt_v,heater_w,rtd_k,transmission\n";
    for (size_t i = 0; i < trace.t.size(); ++i)
        os << format_num(trace.t[i]) << "," << format_num(trace.offset_hz[i])
           << "," << format_num(trace.pzt_v[i]) << ","
           << format_num(trace.heater_w[i]) << "," << format_num(trace.rtd_k[i])
           << "," << format_num(trace.transmission[i]) << "\n";
}

void write_margin_csv(std::ostream& os, const servo::MarginReport& rep)
{
    os << "freq_hz,gain_db,phase_deg\n";
    for (size_t i = 0; i < rep.freq_hz.size(); ++i)
        os << format_num(rep.freq_hz[i]) << "," << format_num(rep.gain_db[i])
           << "," << format_num(rep.phase_deg[i]) << "\n";
}

void write_bode_csv(std::ostream& os, const std::vector<BodeRow>& rows,
                    const std::string& mag_label)
{
    os << "freq_hz," << mag_label << ",phase_rad\n";
    for (const auto& r : rows)
        os << format_num(r.freq_hz) << "," << format_num(r.mag) << ","
           << format_num(r.phase_rad) << "\n";
}

namespace {

constexpr double width = 800, height = 500;
constexpr double ml = 80, mr = 20, mt = 40, mb = 60;

double map_coord(double v, double lo, double hi, double plo, double phi)
{
    if (hi == lo)
        return 0.5 * (plo + phi);
    return plo + (v - lo) / (hi - lo) * (phi - plo);
}

} // namespace

std::string render_svg(const PlotSpec& spec)
{
    auto tx = [&](double v) { return spec.logx ? std::log10(v) : v; };
    auto ty = [&](double v) { return spec.logy ? std::log10(v) : v; };

    double xlo = 0, xhi = 1, ylo = 0, yhi = 1;
    bool first = true;
    for (const auto& s : spec.series)
        for (size_t i = 0; i < s.x.size(); ++i) {
            const double x = tx(s.x[i]), y = ty(s.y[i]);
            if (!std::isfinite(x) || !std::isfinite(y))
                continue;
            if (first) {
                xlo = xhi = x;
                ylo = yhi = y;
                first = false;
            } else {
                xlo = std::min(xlo, x);
                xhi = std::max(xhi, x);
                ylo = std::min(ylo, y);
                yhi = std::max(yhi, y);
            }
        }
    if (ylo == yhi) {
        ylo -= 1.0;
        yhi += 1.0;
    }
    if (xlo == xhi) {
        xlo -= 1.0;
        xhi += 1.0;
    }

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
       << "\" height=\"" << height << "\">\n";
    os << "<rect width=\"" << width << "\" height=\"" << height
       << "\" fill=\"white\"/>\n";
    os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << width - ml - mr
       << "\" height=\"" << height - mt - mb
       << "\" fill=\"none\" stroke=\"black\"/>\n";

    // axis ticks: 5 per axis with labels in data units
    for (int i = 0; i <= 4; ++i) {
        const double fx = xlo + (xhi - xlo) * i / 4.0;
        const double fy = ylo + (yhi - ylo) * i / 4.0;
        const double px = map_coord(fx, xlo, xhi, ml, width - mr);
        const double py = map_coord(fy, ylo, yhi, height - mb, mt);
        const double xval = spec.logx ? std::pow(10.0, fx) : fx;
        const double yval = spec.logy ? std::pow(10.0, fy) : fy;
        os << "<line x1=\"" << px << "\" y1=\"" << height - mb << "\" x2=\"" << px
           << "\" y2=\"" << height - mb + 6 << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << px << "\" y=\"" << height - mb + 20
           << "\" font-size=\"11\" text-anchor=\"middle\">" << format_num(xval)
           << "</text>\n";
        os << "<line x1=\"" << ml - 6 << "\" y1=\"" << py << "\" x2=\"" << ml
           << "\" y2=\"" << py << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << ml - 10 << "\" y=\"" << py + 4
           << "\" font-size=\"11\" text-anchor=\"end\">" << format_num(yval)
           << "</text>\n";
    }

    os << "<text x=\"" << width / 2 << "\" y=\"" << mt - 14
       << "\" font-size=\"14\" text-anchor=\"middle\">" << spec.title
       << "</text>\n";
    os << "<text x=\"" << width / 2 << "\" y=\"" << height - 16
       << "\" font-size=\"12\" text-anchor=\"middle\">" << spec.xlabel
       << "</text>\n";
    os << "<text x=\"18\" y=\"" << height / 2
       << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
       << height / 2 << ")\">" << spec.ylabel << "</text>\n";

    for (const auto& s : spec.series) {
        if (s.points) {
            for (size_t i = 0; i < s.x.size(); ++i) {
                const double px = map_coord(tx(s.x[i]), xlo, xhi, ml, width - mr);
                const double py = map_coord(ty(s.y[i]), ylo, yhi, height - mb, mt);
                if (std::isfinite(px) && std::isfinite(py))
                    os << "<circle cx=\"" << px << "\" cy=\"" << py
                       << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
            }
        } else {
            os << "<polyline fill=\"none\" stroke=\"" << s.color
               << "\" stroke-width=\"1.5\" points=\"";
            for (size_t i = 0; i < s.x.size(); ++i) {
                const double px = map_coord(tx(s.x[i]), xlo, xhi, ml, width - mr);
                const double py = map_coord(ty(s.y[i]), ylo, yhi, height - mb, mt);
                if (std::isfinite(px) && std::isfinite(py))
                    os << format_num(px) << "," << format_num(py) << " ";
            }
            os << "\"/>\n";
        }
    }
    os << "</svg>\n";
    return os.str();
}

}
