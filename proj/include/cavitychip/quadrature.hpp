#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace cavitychip::quadrature {

// Adaptive Gauss-Kronrod (G7,K15) integration on a finite interval.
// The 7-point Gauss result embedded in the 15-point Kronrod rule gives
// the local error estimate; the worst segment is bisected until the
// global estimate meets the tolerance.

struct Options {
    double rel_tol = 1e-8;
    double abs_tol = 0.0;
    int max_depth = 48;
};

namespace detail {

// K15 nodes/weights on [-1,1]; odd-indexed nodes are the embedded G7 points.
inline constexpr double xk[15] = {
    -0.991455371120812639206854697526329,
    -0.949107912342758524526189684047851,
    -0.864864423359769072789712788640926,
    -0.741531185599394439863864773280788,
    -0.586087235467691130294144838258730,
    -0.405845151377397166906606412076961,
    -0.207784955007898467600689403773245,
    0.0,
    0.207784955007898467600689403773245,
    0.405845151377397166906606412076961,
    0.586087235467691130294144838258730,
    0.741531185599394439863864773280788,
    0.864864423359769072789712788640926,
    0.949107912342758524526189684047851,
    0.991455371120812639206854697526329};

inline constexpr double wk[15] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
    0.204432940075298892414161999234649,
    0.190350578064785409913256402421014,
    0.169004726639267902826583426598550,
    0.140653259715525918745189590510238,
    0.104790010322250183839876322541518,
    0.063092092629978553290700663189204,
    0.022935322010529224963732008058970};

inline constexpr double wg[7] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
    0.381830050505118944950369775488975,
    0.279705391489276667901467771423780,
    0.129484966168869693270611432679082};

inline double err_norm(double v) { return std::fabs(v); }
inline double err_norm(const std::complex<double>& v) { return std::abs(v); }

template <typename T, typename F>
void gk15(const F& f, double a, double b, T& kron, double& err)
{
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    T sk{}, sg{};
    for (int i = 0; i < 15; ++i) {
        const T fx = f(c + h * xk[i]);
        sk += wk[i] * fx;
        if (i % 2 == 1)
            sg += wg[i / 2] * fx;
    }
    kron = h * sk;
    err = err_norm(T(h * (sk - sg)));
}

} // namespace detail

// Integrate f over [a, b]. Throws std::runtime_error if the requested
// tolerance cannot be met within the refinement budget.
template <typename T, typename F>
T integrate(const F& f, double a, double b, const Options& opt = {})
{
    struct Seg {
        double a, b, err;
        T val;
        int depth;
    };

    T whole;
    double werr;
    detail::gk15<T>(f, a, b, whole, werr);

    std::vector<Seg> segs;
    segs.push_back({a, b, werr, whole, 0});
    T total = whole;
    double total_err = werr;

    for (int iter = 0; iter < 20000; ++iter) {
        const double goal =
            std::max(opt.abs_tol, opt.rel_tol * detail::err_norm(total));
        if (total_err <= goal)
            return total;

        size_t worst = 0;
        for (size_t i = 1; i < segs.size(); ++i)
            if (segs[i].err > segs[worst].err)
                worst = i;
        Seg s = segs[worst];
        if (s.depth >= opt.max_depth)
            throw std::runtime_error("quadrature: refinement depth exhausted");

        const double m = 0.5 * (s.a + s.b);
        Seg l{s.a, m, 0.0, T{}, s.depth + 1};
        Seg r{m, s.b, 0.0, T{}, s.depth + 1};
        detail::gk15<T>(f, l.a, l.b, l.val, l.err);
        detail::gk15<T>(f, r.a, r.b, r.val, r.err);

        total = total - s.val + l.val + r.val;
        total_err = total_err - s.err + l.err + r.err;
        segs[worst] = l;
        segs.push_back(r);
    }
    throw std::runtime_error("quadrature: failed to converge");
}

}
