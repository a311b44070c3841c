#include "cavitychip/optics.hpp"
#include "cavitychip/constants.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cavitychip::optics {

using constants::pi;
using constants::speed_of_light;

void CavitySpec::validate() const
{
    if (!(length > 0.0) || !(length < curved_mirror_roc))
        throw std::domain_error("optics: unstable resonator, need 0 < L < R");
    if (!(wavelength > 0.0))
        throw std::domain_error("optics: wavelength must be positive");
    if (!(aperture_radius > 0.0))
        throw std::domain_error("optics: aperture radius must be positive");
    if (fixed_loss_chip < 0.0 || fixed_loss_chip >= 1.0 ||
        fixed_loss_curved < 0.0 || fixed_loss_curved >= 1.0)
        throw std::domain_error("optics: per-mirror losses must lie in [0, 1)");
}

double mode_waist(double length, double roc, double wavelength)
{
    if (!(length > 0.0) || !(length < roc))
        throw std::domain_error("optics: unstable resonator, need 0 < L < R");
    // waist at the planar mirror of a plano-concave resonator
    return std::sqrt(wavelength / pi * std::sqrt(length * (roc - length)));
}

double diffraction_loss(double aperture_radius, double waist)
{
    if (!(aperture_radius > 0.0) || !(waist > 0.0))
        throw std::domain_error("optics: aperture and waist must be positive");
    // Gaussian power outside radius a
    return std::exp(-2.0 * aperture_radius * aperture_radius / (waist * waist));
}

double finesse_from_losses(double loss_chip, double loss_curved,
                           double aperture_radius, double waist)
{
    const double delta_c =
        diffraction_loss(aperture_radius, waist) + loss_chip + loss_curved;
    if (!(delta_c > 0.0))
        throw std::domain_error("optics: zero round-trip loss");
    if (delta_c >= 1.0)
        throw std::domain_error("optics: round-trip loss >= 1");
    return 2.0 * pi / delta_c;
}

double free_spectral_range(double length)
{
    if (!(length > 0.0))
        throw std::domain_error("optics: length must be positive");
    return speed_of_light / (2.0 * length);
}

double cavity_linewidth(double length, double finesse)
{
    if (!(finesse > 0.0))
        throw std::domain_error("optics: finesse must be positive");
    return free_spectral_range(length) / finesse;
}

double cooperativity(double length, double roc, double wavelength, double finesse)
{
    const double w0 = mode_waist(length, roc, wavelength);
    // standing-wave Gaussian mode, mode volume pi w0^2 L / 4
    return 3.0 * wavelength * wavelength * finesse / (pi * pi * pi * w0 * w0);
}

double displacement_per_linewidth(double wavelength, double finesse)
{
    if (!(wavelength > 0.0) || !(finesse > 0.0))
        throw std::domain_error("optics: wavelength and finesse must be positive");
    return wavelength / (2.0 * finesse);
}

double vacuum_rabi_g(double length, double roc, double wavelength,
                     double finesse, double coherence_decay)
{
    if (!(coherence_decay > 0.0))
        throw std::domain_error("optics: coherence decay rate must be positive");
    const double c_coop = cooperativity(length, roc, wavelength, finesse);
    const double kappa = pi * cavity_linewidth(length, finesse); // half width, rad/s
    return std::sqrt(c_coop * 2.0 * kappa * coherence_decay);
}

ModeDerived derive_mode(const CavitySpec& spec)
{
    spec.validate();
    ModeDerived m;
    m.waist = mode_waist(spec.length, spec.curved_mirror_roc, spec.wavelength);
    m.diffraction_loss = diffraction_loss(spec.aperture_radius, m.waist);
    m.round_trip_loss =
        m.diffraction_loss + spec.fixed_loss_chip + spec.fixed_loss_curved;
    m.finesse = finesse_from_losses(spec.fixed_loss_chip, spec.fixed_loss_curved,
                                    spec.aperture_radius, m.waist);
    m.fsr = free_spectral_range(spec.length);
    m.linewidth_fwhm = m.fsr / m.finesse;
    m.cooperativity =
        cooperativity(spec.length, spec.curved_mirror_roc, spec.wavelength, m.finesse);
    m.displacement_per_linewidth =
        displacement_per_linewidth(spec.wavelength, m.finesse);
    return m;
}

namespace {

struct FitPoint {
    double waist2;  // w0^2 at this length
    double y;       // measured delta_c = 2 pi / F
    double sigma;   // uncertainty of y
};

// model and Jacobian in the log parameters p = (ln a, ln delta_fixed)
void model_eval(const std::vector<FitPoint>& pts, double ln_a, double ln_df,
                std::vector<double>& resid,
                std::vector<std::array<double, 2>>* jac)
{
    const double a = std::exp(ln_a);
    const double df = std::exp(ln_df);
    for (size_t i = 0; i < pts.size(); ++i) {
        const double dl = std::exp(-2.0 * a * a / pts[i].waist2);
        const double m = dl + df;
        resid[i] = (m - pts[i].y) / pts[i].sigma;
        if (jac) {
            (*jac)[i][0] = dl * (-4.0 * a * a / pts[i].waist2) / pts[i].sigma;
            (*jac)[i][1] = df / pts[i].sigma;
        }
    }
}

} // namespace

RadiusFit fit_mirror_radius(const std::vector<FinesseSample>& samples,
                            double roc, double wavelength)
{
    if (samples.size() < 3)
        throw std::invalid_argument("fit_mirror_radius: need at least 3 samples");
    double lmin = samples[0].length, lmax = samples[0].length;
    for (const auto& s : samples) {
        if (!(s.length > 0.0) || !(s.finesse > 0.0))
            throw std::domain_error("fit_mirror_radius: lengths and finesses must be positive");
        if (!(s.length < roc))
            throw std::domain_error("fit_mirror_radius: sample length >= mirror ROC");
        lmin = std::min(lmin, s.length);
        lmax = std::max(lmax, s.length);
    }
    if (lmax < 2.0 * lmin)
        throw std::invalid_argument(
            "fit_mirror_radius: samples must span at least a factor 2 in length");

    std::vector<FitPoint> pts(samples.size());
    for (size_t i = 0; i < samples.size(); ++i) {
        const double w0 = mode_waist(samples[i].length, roc, wavelength);
        pts[i].waist2 = w0 * w0;
        pts[i].y = 2.0 * pi / samples[i].finesse;
        const double sf = samples[i].finesse_uncertainty > 0.0
                              ? samples[i].finesse_uncertainty
                              : 0.05 * samples[i].finesse;
        // propagate finesse uncertainty to delta_c
        pts[i].sigma = 2.0 * pi * sf / (samples[i].finesse * samples[i].finesse);
    }

    // starting point: delta_fixed from the best sample, aperture from the
    // most lossy one assuming the excess is all diffraction
    double ymin = pts[0].y, ymax = pts[0].y;
    double w2_at_ymax = pts[0].waist2;
    for (const auto& p : pts) {
        ymin = std::min(ymin, p.y);
        if (p.y > ymax) {
            ymax = p.y;
            w2_at_ymax = p.waist2;
        }
    }
    const double excess = std::max(ymax - 0.5 * ymin, 1e-12);
    double ln_a = 0.5 * std::log(std::max(w2_at_ymax * 0.5 *
                                          std::log(1.0 / std::min(excess, 0.999)), 1e-18));
    double ln_df = std::log(std::max(ymin, 1e-12));

    std::vector<double> resid(pts.size());
    std::vector<std::array<double, 2>> jac(pts.size());

    model_eval(pts, ln_a, ln_df, resid, &jac);
    double chi2 = 0.0;
    for (double r : resid)
        chi2 += r * r;

    double lambda = 1e-3;
    const int max_iter = 200;
    int iter = 0;
    bool converged = false;

    for (; iter < max_iter; ++iter) {
        // normal equations of the damped step
        double jtj[2][2] = {{0, 0}, {0, 0}};
        double jtr[2] = {0, 0};
        for (size_t i = 0; i < pts.size(); ++i) {
            jtj[0][0] += jac[i][0] * jac[i][0];
            jtj[0][1] += jac[i][0] * jac[i][1];
            jtj[1][1] += jac[i][1] * jac[i][1];
            jtr[0] += jac[i][0] * resid[i];
            jtr[1] += jac[i][1] * resid[i];
        }
        jtj[1][0] = jtj[0][1];

        const double d0 = jtj[0][0] * (1.0 + lambda);
        const double d1 = jtj[1][1] * (1.0 + lambda);
        const double det = d0 * d1 - jtj[0][1] * jtj[1][0];
        if (det == 0.0 || !std::isfinite(det))
            throw std::runtime_error("fit_mirror_radius: degenerate normal equations");
        const double step0 = -(d1 * jtr[0] - jtj[0][1] * jtr[1]) / det;
        const double step1 = -(-jtj[1][0] * jtr[0] + d0 * jtr[1]) / det;

        std::vector<double> resid_try(pts.size());
        model_eval(pts, ln_a + step0, ln_df + step1, resid_try, nullptr);
        double chi2_try = 0.0;
        for (double r : resid_try)
            chi2_try += r * r;

        if (chi2_try < chi2) {
            ln_a += step0;
            ln_df += step1;
            const double dchi = chi2 - chi2_try;
            chi2 = chi2_try;
            model_eval(pts, ln_a, ln_df, resid, &jac);
            lambda = std::max(lambda * 0.3, 1e-12);
            if (dchi < 1e-12 * (1.0 + chi2) &&
                std::fabs(step0) < 1e-10 && std::fabs(step1) < 1e-10) {
                converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if (lambda > 1e12) {
                // damping exhausted: the step no longer improves chi2,
                // which at a minimum means we are done
                converged = std::fabs(step0) < 1e-8 && std::fabs(step1) < 1e-8;
                break;
            }
        }
    }

    RadiusFit out;
    out.aperture_radius = std::exp(ln_a);
    out.fixed_loss = std::exp(ln_df);
    out.residuals = resid;
    out.chi2 = chi2;
    out.iterations = iter;
    out.converged = converged;
    if (!out.converged)
        throw std::runtime_error("fit_mirror_radius: no convergence after max iterations");
    return out;
}

std::vector<FinesseSample> load_finesse_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    std::string line;
    int lineno = 0;
    std::vector<FinesseSample> out;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        // strip trailing CR and surrounding blanks
        while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
            line.pop_back();
        if (line.empty() || line[0] == '#')
            continue;
        if (!header_seen) {
            if (line.rfind("length_um,finesse", 0) != 0)
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": expected header length_um,finesse[,sigma_finesse]");
            header_seen = true;
            continue;
        }
        std::stringstream ss(line);
        std::string field;
        double vals[3] = {0, 0, 0};
        int n = 0;
        while (std::getline(ss, field, ',')) {
            if (n >= 3)
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": too many fields");
            try {
                size_t used = 0;
                vals[n] = std::stod(field, &used);
                if (used != field.size())
                    throw std::invalid_argument(field);
            } catch (const std::exception&) {
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": bad number '" + field + "'");
            }
            ++n;
        }
        if (n < 2)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected at least length_um,finesse");
        FinesseSample s;
        s.length = vals[0] * 1e-6;
        s.finesse = vals[1];
        s.finesse_uncertainty = n == 3 ? vals[2] : 0.0;
        out.push_back(s);
    }
    if (!header_seen)
        throw std::runtime_error(path + ":1: missing header");
    return out;
}

}
