#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "parallel.hpp"
#include "types.hpp"

namespace optograv {

using Mat4c = Eigen::Matrix4cd;
using Vec4c = Eigen::Vector4cd;

struct WeakDriveLimits {
    double max_eta = 0.05;
    double max_drive = 0.05;  // |G'|
};

inline std::vector<std::string> weak_drive_warnings(const SystemParams& p, const WeakDriveLimits& lim = {}) {
    std::vector<std::string> w;
    if (std::abs(p.eta) > lim.max_eta) w.push_back("weak-drive regime violated: eta above threshold");
    if (std::abs(p.gravity_drive()) > lim.max_drive) w.push_back("weak-drive regime violated: |G'| above threshold");
    return w;
}

// Non-Hermitian H_w on the {0,1} x {0,1} truncation, basis index 2 n_a + n_b (00, 01, 10, 11):
// (wb - i gb) b^dag b - i ga a^dag a - k a^dag a (b + b^dag) + G'(b + b^dag) - i lambda z^dag z + eta (a + a^dag)
inline Mat4c effective_hamiltonian(const SystemParams& p) {
    Eigen::Matrix2cd s;
    s << 0, 1, 0, 0;
    const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
    auto kron2 = [](const Eigen::Matrix2cd& x, const Eigen::Matrix2cd& y) {
        Mat4c r;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) r.block<2, 2>(2 * i, 2 * j) = x(i, j) * y;
        return r;
    };
    const Mat4c a = kron2(s, id), b = kron2(id, s);
    const Mat4c ad = a.adjoint(), bd = b.adjoint();
    const Mat4c na = ad * a, xb = b + bd;
    const Mat4c z = I * na + b;
    return cplx(p.omega_b, -p.gamma_b) * (bd * b) - I * p.gamma_a * na - p.kappa * (na * xb) +
           p.gravity_drive() * xb - I * p.lambda * (z.adjoint() * z) + p.eta * (a + ad);
}

inline Mat4c effective_hamiltonian(const SystemParams& p, Coupling c) {
    return effective_hamiltonian(with_coupling(p, c));
}

struct AmplitudeState {
    cplx p00{1.0, 0.0}, p01{}, p10{}, p11{};
    Coupling coupling = Coupling::Nonreciprocal;
    // the 3x3 steady system is solved exactly on the 4-state truncation, all orders in eta, G'
    std::string drive_order = "exact on {00,01,10,11}";
    double residual = 0;
    std::vector<std::string> warnings;

    Vec4c vec() const { return Vec4c(p00, p01, p10, p11); }
};

// steady rows 01, 10, 11 of H_w p = 0 with p00 pinned to 1
inline AmplitudeState steady_amplitudes(const SystemParams& p, Coupling c) {
    const SystemParams q = with_coupling(p, c);
    const Mat4c H = effective_hamiltonian(q);
    const Eigen::Matrix3cd A = H.block<3, 3>(1, 1);
    const Eigen::Vector3cd rhs = -H.block<3, 1>(1, 0);
    Eigen::FullPivLU<Eigen::Matrix3cd> lu(A);
    if (!lu.isInvertible()) throw SolverError("weak drive: singular steady-condition system");
    const Eigen::Vector3cd x = lu.solve(rhs);
    AmplitudeState st;
    st.coupling = c;
    st.p01 = x(0);
    st.p10 = x(1);
    st.p11 = x(2);
    st.residual = (H * st.vec()).tail<3>().cwiseAbs().maxCoeff();
    st.warnings = weak_drive_warnings(q);
    return st;
}

// closed-form p10 reference form for the two couplings
inline cplx reference_p10(const SystemParams& p, Coupling c) {
    const double k = p.kappa, ga = p.gamma_a, gb = p.gamma_b, wb = p.omega_b, e = p.eta;
    const double Gp = p.gravity_drive();
    const cplx w(wb, -gb);
    if (c == Coupling::Nonreciprocal) {
        const cplx t = 2 * k + I * wb + ga + gb;
        return e * w * t / ((I * wb + gb) * (-2 * Gp * k + (k + ga) * t));
    }
    const cplx den = k * k + ga * (I * wb + (ga + gb));
    return e * (Gp * k - w * cplx(wb, -(ga + gb))) / (w * den);
}

// closed-form QFI with respect to g
inline double qfi_closed_form(const SystemParams& p, Coupling c) {
    const double k = p.kappa, ga = p.gamma_a, gb = p.gamma_b, wb = p.omega_b, e = p.eta, m = p.mass;
    if (c == Coupling::Nonreciprocal) {
        const double S = 2 * k + ga + gb;
        return 8 * k * k * e * e * m / (wb * std::pow(k + ga, 4) * (S * S + wb * wb));
    }
    const double t = k * k + ga * ga + ga * gb;
    return 2 * k * k * e * e * m / (wb * (wb * wb + gb * gb) * (t * t + ga * ga * wb * wb));
}

// pure-state QFI 4(<d psi|d psi> - |<psi|d psi>|^2) of a normalized state-valued function of g
template <class StateFn>
double pure_state_qfi(StateFn&& state, double g, double h) {
    auto unit = [&](double x) {
        Eigen::VectorXcd v = state(x);
        return Eigen::VectorXcd(v / v.norm());
    };
    const Eigen::VectorXcd s0 = unit(g);
    const Eigen::VectorXcd d = (unit(g + h) - unit(g - h)) / (2.0 * h);
    const double F = 4.0 * (d.squaredNorm() - std::norm(s0.dot(d)));
    return std::max(F, 0.0);
}

struct QfiResult {
    double closed_form = 0;
    double numeric = 0;         // cavity state |0> + p10 |1>
    double numeric_coarse = 0;  // same with a 10x larger step
    double richardson_rel = 0;  // |numeric - numeric_coarse| / numeric
    double full_state = 0;      // all four amplitudes, diagnostic
    double rel_mismatch = 0;    // |numeric - closed_form| / numeric
    bool closed_form_flagged = false;
    std::vector<std::string> warnings;
};

inline QfiResult qfi(const SystemParams& p, Coupling c, double tol = 0.05, double rel_step = 1e-5) {
    QfiResult r;
    const SystemParams q = with_coupling(p, c);
    r.warnings = weak_drive_warnings(q);
    r.closed_form = qfi_closed_form(q, c);
    auto cavity = [&](double g) {
        SystemParams x = q;
        x.g = g;
        Eigen::VectorXcd v(2);
        v << 1.0, steady_amplitudes(x, c).p10;
        return v;
    };
    auto full = [&](double g) {
        SystemParams x = q;
        x.g = g;
        return Eigen::VectorXcd(steady_amplitudes(x, c).vec());
    };
    const double h = rel_step * std::max(std::abs(q.g), 1.0);
    r.numeric = pure_state_qfi(cavity, q.g, h);
    r.numeric_coarse = pure_state_qfi(cavity, q.g, 10.0 * h);
    r.richardson_rel = r.numeric > 0 ? std::abs(r.numeric - r.numeric_coarse) / r.numeric : 0.0;
    r.full_state = pure_state_qfi(full, q.g, h);
    r.rel_mismatch = r.numeric > 0 ? std::abs(r.numeric - r.closed_form) / r.numeric
                                   : (r.closed_form == 0 ? 0.0 : 1.0);
    r.closed_form_flagged = r.rel_mismatch > tol;
    return r;
}

// 2 sqrt(omega_b^2 + gamma_b^2) / gamma_a
inline double rw_small_kappa(const SystemParams& p) {
    return 2.0 * std::sqrt(p.omega_b * p.omega_b + p.gamma_b * p.gamma_b) / p.gamma_a;
}

inline double rw_closed_form(const SystemParams& p) {
    return std::sqrt(qfi_closed_form(p, Coupling::Nonreciprocal) / qfi_closed_form(p, Coupling::Reciprocal));
}

struct RatioPoint {
    double kappa = 0, gamma_a = 0;
    double R_w = 0;            // sqrt(F_nr / F_r) from the closed forms
    double R_w_amplitude = 0;  // same from the numeric amplitude QFI (0 when not requested)
};

struct RatioGrid {
    double kappa_min = 0.01, kappa_max = 5.0;
    double gamma_a_min = 0.1, gamma_a_max = 10.0;
    int n_kappa = 50, n_gamma_a = 50;
    bool log_spacing = true;
};

inline std::vector<double> spaced(double lo, double hi, int n, bool log) {
    std::vector<double> v(std::size_t(std::max(n, 1)));
    for (int i = 0; i < n; ++i) {
        double t = n == 1 ? 0.0 : double(i) / (n - 1);
        v[std::size_t(i)] = log ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t;
    }
    return v;
}

// kappa outer, gamma_a inner
inline std::vector<RatioPoint> ratio_sweep(const SystemParams& base, const RatioGrid& grid, bool with_amplitude = false,
                                           unsigned jobs = default_jobs()) {
    const auto ks = spaced(grid.kappa_min, grid.kappa_max, grid.n_kappa, grid.log_spacing);
    const auto gs = spaced(grid.gamma_a_min, grid.gamma_a_max, grid.n_gamma_a, grid.log_spacing);
    return parallel_map(ks.size() * gs.size(), jobs, [&](std::size_t i) {
        SystemParams p = base;
        p.kappa = ks[i / gs.size()];
        p.gamma_a = gs[i % gs.size()];
        RatioPoint pt;
        pt.kappa = p.kappa;
        pt.gamma_a = p.gamma_a;
        pt.R_w = rw_closed_form(p);
        if (with_amplitude) {
            double fn = qfi(p, Coupling::Nonreciprocal).numeric, fr = qfi(p, Coupling::Reciprocal).numeric;
            pt.R_w_amplitude = fr > 0 ? std::sqrt(fn / fr) : 0.0;
        }
        return pt;
    });
}

// gamma_a in [lo, hi] where the closed-form R_w crosses 1, by bisection
inline double rw_unity_gamma_a(SystemParams p, double lo, double hi, double rel_tol = 1e-12) {
    auto f = [&](double ga) {
        p.gamma_a = ga;
        return rw_closed_form(p) - 1.0;
    };
    double flo = f(lo);
    if ((flo > 0) == (f(hi) > 0)) throw SolverError("R_w = 1 not bracketed");
    while (hi - lo > rel_tol * hi) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid);
        if ((fm > 0) == (flo > 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace optograv
