#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <vector>

#include "fit.hpp"
#include "linearization.hpp"
#include "mean_field.hpp"

namespace optograv {

struct LinearSystem {
    Mat4 drift;
    Mat4 noise_corr;
    bool stable = false;
    Vec4 eigenvalues;
    SystemParams params;
};

inline LinearSystem build_drift(const MeanFieldState& mf) {
    LinearSystem ls;
    ls.params = mf.params;
    ls.drift = drift_matrix(mf.params, mf.alpha, mf.beta);
    ls.noise_corr = noise_matrix(mf.params, mf.alpha);
    ls.eigenvalues = drift_eigenvalues(ls.drift);
    ls.stable = max_real(ls.eigenvalues) < 0.0;
    return ls;
}

inline LinearSystem build_drift(const SystemParams& p, const MeanFieldState& mf) {
    MeanFieldState m = mf;
    m.params = for_regime(p, mf.regime);
    return build_drift(m);
}

// {+-i omega_b - gamma_b - kappa, -gamma_a - kappa +- sqrt(chi^2 - G1^2)} at lambda = kappa, upsilon = 0
inline std::array<cplx, 4> nonreciprocal_eigenvalues(const SystemParams& p) {
    SystemParams q = with_coupling(p, Coupling::Nonreciprocal);
    const double phi = phase_slope(q) * q.gravity_drive();
    const cplx r = std::sqrt(cplx(q.chi * q.chi - phi * phi, 0.0));
    const double ga = -q.gamma_a - q.kappa, gb = -q.gamma_b - q.kappa;
    return {cplx(gb, q.omega_b), cplx(gb, -q.omega_b), ga + r, ga - r};
}

struct SteadyMoments {
    Mat4 C;  // C_ij = <A_i A_j^dag>, A = (da, da^dag, db, db^dag)
    double adag_a = 0;
    cplx aa{};
    double bdag_b = 0;
    double residual = 0;  // ||M C + C M^dag + D|| / ||D||
};

// Lyapunov equation M C + C M^dag + D = 0 via the 16x16 Kronecker system
inline SteadyMoments steady_covariance(const LinearSystem& ls) {
    if (!ls.stable) throw NoSteadyState("no steady covariance: drift matrix is not stable");
    using Mat16 = Eigen::Matrix<cplx, 16, 16>;
    const Mat4 Id = Mat4::Identity();
    Mat16 K;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            K.block<4, 4>(4 * i, 4 * j) = Id(i, j) * ls.drift + std::conj(ls.drift(i, j)) * Id;
    Eigen::Matrix<cplx, 16, 1> rhs = -Eigen::Map<const Eigen::Matrix<cplx, 16, 1>>(ls.noise_corr.data());
    Eigen::Matrix<cplx, 16, 1> x = K.fullPivLu().solve(rhs);
    SteadyMoments m;
    m.C = Eigen::Map<Mat4>(x.data());
    m.C = 0.5 * (m.C + m.C.adjoint()).eval();
    m.adag_a = m.C(1, 1).real();
    m.aa = m.C(0, 1);
    m.bdag_b = m.C(3, 3).real();
    const double dn = ls.noise_corr.norm();
    const Mat4 res = ls.drift * m.C + m.C * ls.drift.adjoint() + ls.noise_corr;
    m.residual = dn > 0 ? res.norm() / dn : res.norm();
    return m;
}

// <da^dag da>_s / |alpha|^2 in the nonreciprocal single-photon case, grouping
// (k+ga)(k+gb)[S^2 + (wb+theta)^2] with S = 2k + ga + gb
inline double zeta_closed_form(const SystemParams& p) {
    const double k = p.kappa, ga = p.gamma_a, gb = p.gamma_b;
    const double S = 2 * k + ga + gb;
    const double th = G1(p);
    const double W = S * S + (p.omega_b + th) * (p.omega_b + th);
    const double num = k * ((k + gb) * W + 4 * k * (k + gb) * S + 8 * k * k * S);
    return num / ((k + ga) * (k + gb) * W);
}

// same numerator, denominator read as (k+ga)(k+gb) S^2 + (wb+theta)^2
inline double zeta_closed_form_alt(const SystemParams& p) {
    const double k = p.kappa, ga = p.gamma_a, gb = p.gamma_b;
    const double S = 2 * k + ga + gb;
    const double th = G1(p);
    const double W = S * S + (p.omega_b + th) * (p.omega_b + th);
    const double num = k * ((k + gb) * W + 4 * k * (k + gb) * S + 8 * k * k * S);
    return num / ((k + ga) * (k + gb) * S * S + (p.omega_b + th) * (p.omega_b + th));
}

// one-call helper: mean field -> drift -> moments
inline SteadyMoments moments(const SystemParams& p, Regime r, const MeanFieldOptions& opt = {}) {
    return steady_covariance(build_drift(steady(p, r, opt)));
}

struct ScalingResult {
    LineFit fit;
    std::vector<double> distance;  // chi_c^2 - chi^2
    std::vector<double> adag_a;
};

// <da^dag da>_s against chi_c^2 - chi^2 for the nonreciprocal two-photon regime
inline ScalingResult critical_noise_scaling(const SystemParams& p, const std::vector<double>& chi_values,
                                            const MeanFieldOptions& opt = {}) {
    if (chi_values.size() < 4) throw ParamError("critical_noise_scaling needs at least 4 chi values");
    ScalingResult out;
    for (double chi : chi_values) {
        SystemParams q = p;
        q.chi = chi;
        MeanFieldState mf = steady(q, Regime::NonreciprocalTwoPhoton, opt);
        out.distance.push_back(mf.distance_to_critical);
        out.adag_a.push_back(steady_covariance(build_drift(mf)).adag_a);
    }
    out.fit = loglog_fit(out.distance, out.adag_a);
    return out;
}

// bisection on chi in [lo, hi] for the sign change of the leading drift eigenvalue
inline double stability_frontier(const SystemParams& p, Coupling c, double lo, double hi, double rel_tol = 1e-13) {
    MeanFieldOptions opt;
    opt.allow_beyond_critical = true;
    const Regime r = c == Coupling::Nonreciprocal ? Regime::NonreciprocalTwoPhoton : Regime::ReciprocalTwoPhoton;
    auto growth = [&](double chi) {
        SystemParams q = p;
        q.chi = chi;
        return max_real(build_drift(steady(q, r, opt)).eigenvalues);
    };
    double flo = growth(lo), fhi = growth(hi);
    if ((flo < 0) == (fhi < 0)) throw SolverError("stability_frontier: no sign change in bracket");
    while (std::abs(hi - lo) > rel_tol * std::max(std::abs(lo), std::abs(hi))) {
        double mid = 0.5 * (lo + hi);
        double fm = growth(mid);
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace optograv
