#include "cavitychip/ratfit.hpp"
#include "cavitychip/constants.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cavitychip::ratfit {

using cplx = std::complex<double>;

cplx TransferModel::eval(double omega) const
{
    cplx h(direct, 0.0);
    const cplx s(0.0, omega);
    for (size_t j = 0; j < poles.size(); ++j)
        h += residues[j] / (s - poles[j]);
    return h;
}

double TransferModel::dc_gain() const
{
    double g = direct;
    for (size_t j = 0; j < poles.size(); ++j)
        g += -residues[j] / poles[j];
    return g;
}

namespace {

// Householder QR solve of the tall system A x = b, in place.
std::vector<double> qr_solve(std::vector<std::vector<double>>& a,
                             std::vector<double>& b)
{
    const size_t m = a.size();
    const size_t n = a[0].size();
    if (m < n)
        throw std::runtime_error("ratfit: underdetermined system");

    std::vector<double> v(m);
    for (size_t k = 0; k < n; ++k) {
        double norm = 0.0;
        for (size_t i = k; i < m; ++i)
            norm += a[i][k] * a[i][k];
        norm = std::sqrt(norm);
        if (norm == 0.0)
            throw std::runtime_error("ratfit: singular design matrix");
        const double alpha = a[k][k] > 0.0 ? -norm : norm;
        double vnorm2 = 0.0;
        for (size_t i = k; i < m; ++i)
            v[i] = a[i][k];
        v[k] -= alpha;
        for (size_t i = k; i < m; ++i)
            vnorm2 += v[i] * v[i];
        if (vnorm2 == 0.0) {
            a[k][k] = alpha;
            continue;
        }
        const double beta = 2.0 / vnorm2;
        for (size_t j = k; j < n; ++j) {
            double dot = 0.0;
            for (size_t i = k; i < m; ++i)
                dot += v[i] * a[i][j];
            dot *= beta;
            for (size_t i = k; i < m; ++i)
                a[i][j] -= dot * v[i];
        }
        double dotb = 0.0;
        for (size_t i = k; i < m; ++i)
            dotb += v[i] * b[i];
        dotb *= beta;
        for (size_t i = k; i < m; ++i)
            b[i] -= dotb * v[i];
    }

    std::vector<double> x(n);
    for (size_t kk = n; kk-- > 0;) {
        double s = b[kk];
        for (size_t j = kk + 1; j < n; ++j)
            s -= a[kk][j] * x[j];
        if (a[kk][kk] == 0.0)
            throw std::runtime_error("ratfit: singular design matrix");
        x[kk] = s / a[kk][kk];
    }
    return x;
}

} // namespace

FitQuality evaluate_fit(const TransferModel& model,
                        const std::vector<FreqSample>& target)
{
    FitQuality q{0.0, 0.0};
    for (const auto& s : target) {
        const cplx h = model.eval(s.omega);
        const double mag_t = std::abs(s.value);
        if (mag_t == 0.0)
            continue;
        q.max_rel_mag_error =
            std::max(q.max_rel_mag_error, std::fabs(std::abs(h) / mag_t - 1.0));
        double dphi = std::arg(h) - std::arg(s.value);
        while (dphi > constants::pi)
            dphi -= 2.0 * constants::pi;
        while (dphi < -constants::pi)
            dphi += 2.0 * constants::pi;
        q.max_phase_error_deg =
            std::max(q.max_phase_error_deg, std::fabs(dphi) * 180.0 / constants::pi);
    }
    return q;
}

namespace {

struct WeightedLs {
    // weighted LS for residues and direct term at fixed poles; also
    // returns the weighted residual 2-norm squared
    static double solve(const std::vector<FreqSample>& target,
                        const std::vector<double>& weights,
                        const std::vector<double>& poles,
                        std::vector<double>& residues, double& direct)
    {
        const size_t m = target.size();
        const size_t n = poles.size();
        std::vector<std::vector<double>> a(2 * m, std::vector<double>(n + 1));
        std::vector<double> b(2 * m);
        for (size_t i = 0; i < m; ++i) {
            const cplx s(0.0, target[i].omega);
            const double w = weights[i];
            for (size_t j = 0; j < n; ++j) {
                const cplx basis = 1.0 / (s - poles[j]);
                a[2 * i][j] = w * basis.real();
                a[2 * i + 1][j] = w * basis.imag();
            }
            a[2 * i][n] = w;
            a[2 * i + 1][n] = 0.0;
            b[2 * i] = w * target[i].value.real();
            b[2 * i + 1] = w * target[i].value.imag();
        }
        auto acopy = a;
        auto bcopy = b;
        const std::vector<double> x = qr_solve(acopy, bcopy);
        residues.assign(x.begin(), x.begin() + n);
        direct = x[n];

        double rss = 0.0;
        for (size_t i = 0; i < 2 * m; ++i) {
            double pred = 0.0;
            for (size_t j = 0; j <= n; ++j)
                pred += a[i][j] * x[j];
            const double r = pred - b[i];
            rss += r * r;
        }
        return rss;
    }
};

} // namespace

TransferModel fit_rational(const std::vector<FreqSample>& target, int n_poles,
                           double mag_tol, double phase_tol_deg,
                           FitQuality* quality)
{
    if (n_poles < 1)
        throw std::invalid_argument("ratfit: need at least one pole");
    if (target.size() < size_t(4 * n_poles))
        throw std::invalid_argument("ratfit: need at least 4 samples per pole");

    double wmin = target[0].omega, wmax = target[0].omega;
    double vmax = 0.0;
    for (const auto& s : target) {
        if (!(s.omega > 0.0))
            throw std::invalid_argument("ratfit: sample frequencies must be positive");
        wmin = std::min(wmin, s.omega);
        wmax = std::max(wmax, s.omega);
        vmax = std::max(vmax, std::abs(s.value));
    }

    TransferModel model;
    if (vmax == 0.0) {
        model.poles.assign(n_poles, -wmin);
        model.residues.assign(n_poles, 0.0);
        model.direct = 0.0;
        if (quality)
            *quality = {0.0, 0.0};
        return model;
    }

    const size_t m = target.size();
    std::vector<double> weights(m);
    for (size_t i = 0; i < m; ++i)
        weights[i] = 1.0 / std::max(std::abs(target[i].value), 1e-6 * vmax);

    // starting poles log-spaced over a slightly extended band
    std::vector<double> theta(n_poles); // p_j = -exp(theta_j)
    const double lo = std::log(wmin * 0.5);
    const double hi = std::log(wmax * 2.0);
    for (int j = 0; j < n_poles; ++j) {
        const double t = n_poles == 1 ? 0.5 : double(j) / double(n_poles - 1);
        theta[j] = lo + t * (hi - lo);
    }
    const double th_lo = std::log(wmin) - 5.0;
    const double th_hi = std::log(wmax) + 5.0;

    auto poles_of = [&](const std::vector<double>& th) {
        std::vector<double> p(th.size());
        for (size_t j = 0; j < th.size(); ++j)
            p[j] = -std::exp(th[j]);
        return p;
    };

    model.poles = poles_of(theta);
    double rss = WeightedLs::solve(target, weights, model.poles, model.residues,
                                   model.direct);

    // pole relocation: damped Gauss-Newton in log-pole space, residues
    // re-solved at every trial (variable projection). The residue-held
    // Jacobian d r_j/(s-p_j) / d theta_j = r_j p_j / (s-p_j)^2 is accurate
    // enough under Levenberg damping.
    double lambda = 1e-3;
    for (int iter = 0; iter < 80; ++iter) {
        const size_t n = size_t(n_poles);
        std::vector<std::vector<double>> jac(2 * m, std::vector<double>(n));
        std::vector<double> resid(2 * m);
        for (size_t i = 0; i < m; ++i) {
            const cplx s(0.0, target[i].omega);
            cplx pred(model.direct, 0.0);
            for (size_t j = 0; j < n; ++j)
                pred += model.residues[j] / (s - model.poles[j]);
            const cplx r = weights[i] * (pred - target[i].value);
            resid[2 * i] = r.real();
            resid[2 * i + 1] = r.imag();
            for (size_t j = 0; j < n; ++j) {
                const cplx dm = model.residues[j] * model.poles[j] /
                                ((s - model.poles[j]) * (s - model.poles[j]));
                jac[2 * i][j] = weights[i] * dm.real();
                jac[2 * i + 1][j] = weights[i] * dm.imag();
            }
        }
        // normal equations with Levenberg damping
        std::vector<std::vector<double>> jtj(n, std::vector<double>(n, 0.0));
        std::vector<double> jtr(n, 0.0);
        for (size_t i = 0; i < 2 * m; ++i)
            for (size_t j = 0; j < n; ++j) {
                jtr[j] += jac[i][j] * resid[i];
                for (size_t k2 = j; k2 < n; ++k2)
                    jtj[j][k2] += jac[i][j] * jac[i][k2];
            }
        for (size_t j = 0; j < n; ++j)
            for (size_t k2 = 0; k2 < j; ++k2)
                jtj[j][k2] = jtj[k2][j];

        std::vector<std::vector<double>> lhs(n, std::vector<double>(n));
        std::vector<double> rhs = jtr;
        for (auto& v : rhs)
            v = -v;
        for (size_t j = 0; j < n; ++j) {
            lhs[j] = jtj[j];
            lhs[j][j] *= (1.0 + lambda);
            lhs[j][j] += 1e-300;
        }
        std::vector<double> step;
        try {
            auto lcopy = lhs;
            auto rcopy = rhs;
            step = qr_solve(lcopy, rcopy);
        } catch (const std::exception&) {
            break; // singular; keep the best model so far
        }

        std::vector<double> theta_try = theta;
        for (size_t j = 0; j < n; ++j)
            theta_try[j] =
                std::clamp(theta[j] + std::clamp(step[j], -2.0, 2.0), th_lo, th_hi);
        // keep poles separated to protect the basis conditioning
        std::sort(theta_try.begin(), theta_try.end());
        for (size_t j = 1; j < n; ++j)
            if (theta_try[j] - theta_try[j - 1] < 1e-4)
                theta_try[j] = theta_try[j - 1] + 1e-4;

        std::vector<double> res_try, poles_try = poles_of(theta_try);
        double direct_try = 0.0;
        double rss_try;
        try {
            rss_try = WeightedLs::solve(target, weights, poles_try, res_try,
                                        direct_try);
        } catch (const std::exception&) {
            lambda *= 10.0;
            continue;
        }
        if (rss_try < rss) {
            const double gain = (rss - rss_try) / (rss + 1e-300);
            theta = theta_try;
            model.poles = poles_try;
            model.residues = res_try;
            model.direct = direct_try;
            rss = rss_try;
            lambda = std::max(lambda * 0.3, 1e-10);
            if (gain < 1e-12)
                break;
        } else {
            lambda *= 10.0;
            if (lambda > 1e8)
                break;
        }
    }

    const FitQuality q = evaluate_fit(model, target);
    if (quality)
        *quality = q;
    if (q.max_rel_mag_error > mag_tol || q.max_phase_error_deg > phase_tol_deg)
        throw std::runtime_error("ratfit: accuracy target unmet, increase n_poles");
    return model;
}

}
