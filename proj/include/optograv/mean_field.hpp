#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "linearization.hpp"
#include "types.hpp"

namespace optograv {

struct MeanFieldOptions {
    double critical_margin = 1e-6;       // refuse |x|/x_c > 1 - margin
    bool allow_beyond_critical = false;  // return the formal (unstable) fixed point instead of throwing
    std::optional<double> n_hint;        // pick the root nearest this |alpha|^2 instead of the homotopy root
    int homotopy_steps = 400;
};

struct MeanFieldState {
    cplx alpha{};
    cplx beta{};
    Regime regime = Regime::NonreciprocalSingle;
    bool converged = false;
    double residual = std::numeric_limits<double>::quiet_NaN();
    // chi_c^2 - chi^2 (two-photon) or upsilon_c^2 - upsilon^2 (MPA), NaN otherwise
    double distance_to_critical = std::numeric_limits<double>::quiet_NaN();
    double phase_factor = 0.0;  // G1 / G2 / G3 / G4 depending on regime
    double theta_shift = 0.0;   // -2 kappa (beta + beta*)
    bool stable = true;
    std::vector<double> roots;  // all real nonnegative |alpha|^2 candidates
    std::vector<bool> root_stable;
    bool bistable = false;
    SystemParams params;  // parameters with the regime applied

    double n() const { return std::norm(alpha); }
    double homodyne_mean() const { return 2.0 * alpha.real(); }
};

// Mean-field right-hand side (d alpha/dt, d beta/dt) for general lambda.
inline std::array<cplx, 2> mean_field_rhs(const SystemParams& p, cplx alpha, cplx beta) {
    const double k = p.kappa, l = p.lambda;
    const double xb = 2.0 * beta.real();
    const double Gp = p.gravity_drive();
    cplx da = (-p.gamma_a - l) * alpha + I * (k + l) * alpha * xb - I * p.chi * std::conj(alpha) - I * p.eta;
    cplx db = cplx(-p.gamma_b - l, -p.omega_b) * beta - I * p.upsilon * std::conj(beta) +
              I * (k - l) * std::norm(alpha) - I * Gp;
    return {da, db};
}

inline double relative_residual(const SystemParams& p, cplx alpha, cplx beta) {
    auto r = mean_field_rhs(p, alpha, beta);
    double scale = std::max({1.0, std::abs(p.eta), std::abs(p.gravity_drive())});
    return std::max(std::abs(r[0]), std::abs(r[1])) / scale;
}

inline double upsilon_critical(const SystemParams& p) {
    double gb = p.gamma_b + p.lambda;
    return std::sqrt(gb * gb + p.omega_b * p.omega_b);
}

// beta = X * mech_unit(p) with X = G' - (kappa - lambda)|alpha|^2
inline cplx mech_unit(const SystemParams& p) {
    double gb = p.gamma_b + p.lambda;
    double den = gb * gb + p.omega_b * p.omega_b - p.upsilon * p.upsilon;
    return cplx(p.upsilon - p.omega_b, -gb) / den;
}

// phi = s * X, the cavity sees c = (gamma_a + lambda) + i phi
inline double phase_slope(const SystemParams& p) { return -(p.kappa + p.lambda) * 2.0 * mech_unit(p).real(); }

// G1 = 4 G kappa omega_b / [(gamma_b + kappa)^2 + omega_b^2]
inline double G1(const SystemParams& p) {
    double gb = p.gamma_b + p.kappa;
    return 4.0 * p.gravity_drive() * p.kappa * p.omega_b / (gb * gb + p.omega_b * p.omega_b);
}

// nonreciprocal critical two-photon amplitude sqrt((gamma_a+kappa)^2 + phi^2)
inline double chi_critical(const SystemParams& p) {
    SystemParams q = with_coupling(p, Coupling::Nonreciprocal);
    double G = q.gamma_a + q.kappa;
    double phi = phase_slope(q) * q.gravity_drive();
    return std::sqrt(G * G + phi * phi);
}

// large-eta reciprocal root, 2G/(3 kappa) + [eta (gamma_b^2 + omega_b^2) / (2 kappa^2 omega_b)]^(2/3)
inline double reciprocal_asymptotic_n(const SystemParams& p) {
    double w2 = p.gamma_b * p.gamma_b + p.omega_b * p.omega_b;
    return 2.0 * p.gravity_drive() / (3.0 * p.kappa) +
           std::pow(p.eta * w2 / (2.0 * p.kappa * p.kappa * p.omega_b), 2.0 / 3.0);
}

// same expansion with (gamma_b^2 + omega_b^2) outside the 2/3 power, in the other common grouping
inline double reciprocal_asymptotic_n_reference(const SystemParams& p) {
    double w2 = p.gamma_b * p.gamma_b + p.omega_b * p.omega_b;
    return 2.0 * p.gravity_drive() / (3.0 * p.kappa) +
           std::pow(p.eta, 2.0 / 3.0) * w2 / std::pow(2.0 * p.kappa * p.kappa * p.omega_b, 2.0 / 3.0);
}

namespace detail {

using Poly = std::vector<double>;  // ascending coefficients

inline Poly pmul(const Poly& x, const Poly& y) {
    Poly r(x.size() + y.size() - 1, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < y.size(); ++j) r[i + j] += x[i] * y[j];
    return r;
}
inline Poly padd(Poly x, const Poly& y, double s = 1.0) {
    if (y.size() > x.size()) x.resize(y.size(), 0.0);
    for (std::size_t i = 0; i < y.size(); ++i) x[i] += s * y[i];
    return x;
}
inline std::pair<double, double> peval(const Poly& c, double x) {
    double v = 0, d = 0;
    for (std::size_t i = c.size(); i-- > 0;) {
        d = d * x + v;
        v = v * x + c[i];
    }
    return {v, d};
}

// real nonnegative roots, companion matrix eigenvalues in a rescaled variable then Newton polish
inline std::vector<double> nonneg_real_roots(Poly c) {
    while (c.size() > 1 && c.back() == 0.0) c.pop_back();
    const int deg = int(c.size()) - 1;
    std::vector<double> out;
    if (deg < 1) return out;
    double sigma = std::abs(c[0]) > 0 ? std::pow(std::abs(c[0] / c[deg]), 1.0 / deg) : 1.0;
    if (!(sigma > 0) || !std::isfinite(sigma)) sigma = 1.0;
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(deg, deg);
    for (int i = 1; i < deg; ++i) C(i, i - 1) = 1.0;
    for (int i = 0; i < deg; ++i) C(i, deg - 1) = -c[i] * std::pow(sigma, i) / (c[deg] * std::pow(sigma, deg));
    Eigen::EigenSolver<Eigen::MatrixXd> es(C, false);
    for (int i = 0; i < deg; ++i) {
        cplx z = es.eigenvalues()(i);
        if (std::abs(z.imag()) > 1e-6 * std::max(1.0, std::abs(z))) continue;
        double x = z.real() * sigma;
        for (int it = 0; it < 50; ++it) {
            auto [v, d] = peval(c, x);
            if (d == 0) break;
            double dx = v / d;
            x -= dx;
            if (std::abs(dx) <= 1e-15 * std::max(1.0, std::abs(x))) break;
        }
        if (x < 0 && x > -1e-12 * sigma) x = 0;
        if (x >= 0) out.push_back(x);
    }
    std::sort(out.begin(), out.end());
    std::vector<double> uniq;
    for (double x : out)
        if (uniq.empty() || std::abs(x - uniq.back()) > 1e-9 * std::max(1.0, x)) uniq.push_back(x);
    return uniq;
}

struct Closure {
    double Gam, p0, p1, chi, eta;
    Poly h0, R;  // h(n) = h0(n) - eta^2 R(n)
    Poly h(double e) const { return padd(h0, R, -e * e); }
};

inline Closure closure(const SystemParams& p) {
    Closure cl;
    cl.Gam = p.gamma_a + p.lambda;
    const double s = phase_slope(p);
    cl.p0 = s * p.gravity_drive();
    cl.p1 = -s * (p.kappa - p.lambda);
    cl.chi = p.chi;
    cl.eta = p.eta;
    const Poly phi{cl.p0, cl.p1};
    const Poly phi2 = pmul(phi, phi);
    if (p.chi == 0.0) {
        // n (Gam^2 + phi^2) = eta^2, the common factor Q = R is dropped
        cl.h0 = pmul(Poly{0.0, 1.0}, padd(phi2, Poly{cl.Gam * cl.Gam}));
        cl.R = Poly{1.0};
    } else {
        Poly Q = padd(phi2, Poly{cl.Gam * cl.Gam - p.chi * p.chi});
        Poly cmp{p.chi - cl.p0, -cl.p1};
        cl.h0 = pmul(Poly{0.0, 1.0}, pmul(Q, Q));
        cl.R = padd(pmul(cmp, cmp), Poly{cl.Gam * cl.Gam});
    }
    return cl;
}

inline std::pair<cplx, cplx> amplitudes_at(const SystemParams& p, const Closure& cl, double n) {
    const double phi = cl.p0 + cl.p1 * n;
    const double Q = cl.Gam * cl.Gam + phi * phi - cl.chi * cl.chi;
    const cplx alpha = -I * cl.eta * cplx(cl.Gam, cl.chi - phi) / Q;
    const cplx beta = (p.gravity_drive() - (p.kappa - p.lambda) * n) * mech_unit(p);
    return {alpha, beta};
}

// follow the root from eta = 0 by continuation in eta
inline double homotopy_root(const Closure& cl, int steps) {
    double n = 0.0;
    for (int k = 1; k <= steps; ++k) {
        const Poly h = cl.h(cl.eta * double(k) / steps);
        for (int it = 0; it < 60; ++it) {
            auto [v, d] = peval(h, n);
            if (d == 0) break;
            double nn = n - v / d;
            if (nn < 0) nn = 0.5 * n;
            bool done = std::abs(nn - n) <= 1e-14 * std::max(1.0, n);
            n = nn;
            if (done) break;
        }
    }
    return n;
}

inline double phase_factor_for(Regime r, double phi) { return is_mpa(r) ? -phi : phi; }

}  // namespace detail

// General solver, lambda arbitrary. Regime wrappers below fix lambda and the drives.
inline MeanFieldState solve_mean_field(const SystemParams& p, Regime regime, const MeanFieldOptions& opt = {}) {
    p.validate();
    MeanFieldState st;
    st.regime = regime;
    st.params = p;

    const double uc = upsilon_critical(p);
    if (p.upsilon != 0.0) {
        st.distance_to_critical = uc * uc - p.upsilon * p.upsilon;
        if (std::abs(p.upsilon) >= uc * (1.0 - opt.critical_margin) && !opt.allow_beyond_critical)
            throw BeyondCritical("beyond critical point, no steady state (|upsilon| >= upsilon_c)");
        if (st.distance_to_critical == 0.0) throw BeyondCritical("upsilon exactly critical");
    }

    const detail::Closure cl = detail::closure(p);
    if (p.chi != 0.0 && cl.p1 == 0.0) {
        const double cc = std::sqrt(cl.Gam * cl.Gam + cl.p0 * cl.p0);
        st.distance_to_critical = cc * cc - p.chi * p.chi;
        if (std::abs(p.chi) >= cc * (1.0 - opt.critical_margin) && !opt.allow_beyond_critical)
            throw BeyondCritical("beyond critical point, no steady state (|chi| >= chi_c)");
    }

    std::vector<double> roots;
    double chosen;
    if (p.eta == 0.0) {
        roots = {0.0};
        chosen = 0.0;
    } else if (cl.p1 == 0.0) {
        // phase does not depend on |alpha|^2: single closed-form root
        const double phi = cl.p0;
        const double Q = cl.Gam * cl.Gam + phi * phi - p.chi * p.chi;
        const double R = cl.Gam * cl.Gam + (p.chi - phi) * (p.chi - phi);
        chosen = p.eta * p.eta * R / (Q * Q);
        roots = {chosen};
    } else {
        roots = detail::nonneg_real_roots(cl.h(p.eta));
        if (roots.empty()) throw NoSteadyState("mean field: no real nonnegative root of the self-consistency");
        const double target = opt.n_hint ? *opt.n_hint : detail::homotopy_root(cl, opt.homotopy_steps);
        chosen = *std::min_element(roots.begin(), roots.end(), [&](double x, double y) {
            return std::abs(x - target) < std::abs(y - target);
        });
    }

    // stability of every candidate
    int n_stable = 0;
    for (double n : roots) {
        auto [a, b] = detail::amplitudes_at(p, cl, n);
        bool s = max_real(drift_eigenvalues(drift_matrix(p, a, b))) < 0.0;
        st.root_stable.push_back(s);
        n_stable += s;
    }
    st.roots = roots;
    st.bistable = n_stable > 1;

    auto idx = std::size_t(std::find(roots.begin(), roots.end(), chosen) - roots.begin());
    st.stable = st.root_stable[idx];
    if (!st.stable && !opt.n_hint) {
        // continuation landed on an unstable branch, fall back to the nearest stable root
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < roots.size(); ++i)
            if (st.root_stable[i] && std::abs(roots[i] - chosen) < best) {
                best = std::abs(roots[i] - chosen);
                idx = i;
            }
        if (std::isfinite(best)) {
            chosen = roots[idx];
            st.stable = true;
        }
    }
    if (!st.stable && !opt.allow_beyond_critical)
        throw NoSteadyState("no stable steady state (drift matrix has eigenvalues with positive real part)");

    auto [a, b] = detail::amplitudes_at(p, cl, chosen);
    st.alpha = a;
    st.beta = b;
    const double phi = cl.p0 + cl.p1 * chosen;
    if (p.chi != 0.0) st.distance_to_critical = cl.Gam * cl.Gam + phi * phi - p.chi * p.chi;
    st.phase_factor = detail::phase_factor_for(regime, phi);
    st.theta_shift = -2.0 * p.kappa * 2.0 * b.real();
    st.residual = relative_residual(p, a, b);
    st.converged = st.residual < 1e-10;
    return st;
}

namespace detail {
inline void require(bool ok, const char* msg) {
    if (!ok) throw ParamError(msg);
}
}  // namespace detail

inline MeanFieldState steady_nonreciprocal_single(const SystemParams& p, const MeanFieldOptions& opt = {}) {
    detail::require(p.lambda == p.kappa, "nonreciprocal regime needs lambda == kappa");
    detail::require(p.chi == 0.0 && p.upsilon == 0.0, "single-photon regime needs chi == upsilon == 0");
    detail::require(p.eta >= 0.0, "eta must be >= 0");
    return solve_mean_field(p, Regime::NonreciprocalSingle, opt);
}

inline MeanFieldState steady_reciprocal_single(const SystemParams& p, const MeanFieldOptions& opt = {}) {
    detail::require(p.lambda == 0.0, "reciprocal regime needs lambda == 0");
    detail::require(p.chi == 0.0 && p.upsilon == 0.0, "single-photon regime needs chi == upsilon == 0");
    return solve_mean_field(p, Regime::ReciprocalSingle, opt);
}

inline MeanFieldState steady_two_photon(const SystemParams& p, Coupling c, const MeanFieldOptions& opt = {}) {
    detail::require(p.upsilon == 0.0, "two-photon regime needs upsilon == 0");
    SystemParams q = with_coupling(p, c);
    return solve_mean_field(q, c == Coupling::Nonreciprocal ? Regime::NonreciprocalTwoPhoton
                                                            : Regime::ReciprocalTwoPhoton,
                            opt);
}

inline MeanFieldState steady_mpa(const SystemParams& p, Coupling c, const MeanFieldOptions& opt = {}) {
    detail::require(p.chi == 0.0, "parametric-amplification regime needs chi == 0");
    SystemParams q = with_coupling(p, c);
    MeanFieldState st =
        solve_mean_field(q, c == Coupling::Nonreciprocal ? Regime::NonreciprocalMPA : Regime::ReciprocalMPA, opt);
    return st;
}

// dispatcher used by the higher layers
inline MeanFieldState steady(const SystemParams& p, Regime r, const MeanFieldOptions& opt = {}) {
    return solve_mean_field(for_regime(p, r), r, opt);
}

// Nonreciprocal MPA phase factor 4 G' kappa (upsilon - omega_b) / [(gamma_b + kappa)^2 + omega_b^2 - upsilon^2]
inline double G2(const SystemParams& p) {
    double gb = p.gamma_b + p.kappa;
    return 4.0 * p.gravity_drive() * p.kappa * (p.upsilon - p.omega_b) /
           (gb * gb + p.omega_b * p.omega_b - p.upsilon * p.upsilon);
}

// same with gamma_a in the denominator, reference variant; equal when gamma_a == gamma_b
inline double G2_reference(const SystemParams& p) {
    double ga = p.gamma_a + p.kappa;
    return 4.0 * p.gravity_drive() * p.kappa * (p.upsilon - p.omega_b) /
           (ga * ga + p.omega_b * p.omega_b - p.upsilon * p.upsilon);
}

}  // namespace optograv
