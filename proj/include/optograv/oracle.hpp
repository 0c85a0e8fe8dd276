#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <boost/numeric/odeint.hpp>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fock.hpp"
#include "liouvillian.hpp"
#include "weak_drive.hpp"

namespace optograv {

enum class SteadyMethod { NullSpace, TimeEvolution };

inline const char* to_string(SteadyMethod m) { return m == SteadyMethod::NullSpace ? "null_space" : "time_evolution"; }

struct OracleOptions {
    double top_threshold = 1e-4;  // allowed population of the top Fock level of any mode
    double time_factor = 20.0;    // TimeEvolution runs to time_factor / min(gamma)
    double abs_tol = 1e-13;
    double rel_tol = 1e-11;
};

struct SteadyDensity {
    Eigen::MatrixXcd rho;
    Dims dims;
    SteadyMethod method = SteadyMethod::NullSpace;
    double residual = 0;        // ||L rho||_inf
    double liouvillian_norm = 0;  // max |L_ij|
    double trace_error = 0;
    double hermiticity_error = 0;
    double min_eigenvalue = 0;
    double top_population = 0;
    bool truncation_ok = true;
    std::vector<std::string> warnings;
};

inline std::vector<int> mode_dims(const Dims& d) {
    std::vector<int> v{d.a, d.b};
    if (d.c > 0) v.push_back(d.c);
    return v;
}

// reduced density matrix over the modes flagged in `keep`
inline Eigen::MatrixXcd partial_trace(const Eigen::MatrixXcd& rho, const std::vector<int>& ds,
                                      const std::vector<bool>& keep) {
    const int m = int(ds.size());
    int nk = 1;
    for (int j = 0; j < m; ++j)
        if (keep[std::size_t(j)]) nk *= ds[std::size_t(j)];
    const int n = int(rho.rows());
    // split every full index into kept / traced parts
    std::vector<int> kidx(static_cast<std::size_t>(n)), tidx(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        int r = i, ki = 0, ti = 0, kstride = 1, tstride = 1;
        for (int j = m - 1; j >= 0; --j) {
            int dj = ds[std::size_t(j)], digit = r % dj;
            r /= dj;
            if (keep[std::size_t(j)]) {
                ki += digit * kstride;
                kstride *= dj;
            } else {
                ti += digit * tstride;
                tstride *= dj;
            }
        }
        kidx[std::size_t(i)] = ki;
        tidx[std::size_t(i)] = ti;
    }
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(nk, nk);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            if (tidx[std::size_t(i)] == tidx[std::size_t(j)]) out(kidx[std::size_t(i)], kidx[std::size_t(j)]) += rho(i, j);
    return out;
}

inline double trace_distance(const Eigen::MatrixXcd& x, const Eigen::MatrixXcd& y) {
    Eigen::MatrixXcd d = x - y;
    d = 0.5 * (d + d.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(d, Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

namespace detail {

inline void finish_density(SteadyDensity& sd, const SpMat& L, const OracleOptions& opt) {
    const int n = int(sd.rho.rows());
    sd.hermiticity_error = (sd.rho - sd.rho.adjoint()).cwiseAbs().maxCoeff();
    sd.rho = 0.5 * (sd.rho + sd.rho.adjoint()).eval();
    const cplx tr = sd.rho.trace();
    sd.trace_error = std::abs(tr - 1.0);
    sd.rho /= tr.real();
    Eigen::VectorXcd r = L * vec(sd.rho);
    sd.residual = r.cwiseAbs().maxCoeff();
    double ln = 0;
    for (int k = 0; k < L.outerSize(); ++k)
        for (SpMat::InnerIterator it(L, k); it; ++it) ln = std::max(ln, std::abs(it.value()));
    sd.liouvillian_norm = ln;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sd.rho, Eigen::EigenvaluesOnly);
    sd.min_eigenvalue = es.eigenvalues().minCoeff();
    if (sd.min_eigenvalue < -1e-9) sd.warnings.push_back("density matrix not positive within 1e-9");

    const auto ds = mode_dims(sd.dims);
    double top = 0;
    for (std::size_t j = 0; j < ds.size(); ++j) {
        std::vector<bool> keep(ds.size(), false);
        keep[j] = true;
        Eigen::MatrixXcd red = partial_trace(sd.rho, ds, keep);
        top = std::max(top, red(ds[j] - 1, ds[j] - 1).real());
    }
    sd.top_population = top;
    sd.truncation_ok = top < opt.top_threshold;
    if (!sd.truncation_ok) sd.warnings.push_back("truncation: top Fock level population above threshold");
    (void)n;
}

}  // namespace detail

inline SteadyDensity steady_state(const FockOperatorSet& ops, SteadyMethod method = SteadyMethod::NullSpace,
                                  const OracleOptions& opt = {}) {
    const int n = ops.dim();
    const SpMat L = build_liouvillian(ops);
    SteadyDensity sd;
    sd.dims = ops.dims;
    sd.method = method;
    sd.warnings = ops.warnings;

    if (method == SteadyMethod::NullSpace) {
        // replace the first equation by the trace functional
        std::vector<Eigen::Triplet<cplx>> t;
        t.reserve(std::size_t(L.nonZeros()) + std::size_t(n));
        for (int k = 0; k < L.outerSize(); ++k)
            for (SpMat::InnerIterator it(L, k); it; ++it)
                if (it.row() != 0) t.emplace_back(int(it.row()), int(it.col()), it.value());
        for (int i = 0; i < n; ++i) t.emplace_back(0, i * (n + 1), 1.0);
        SpMat A(n * n, n * n);
        A.setFromTriplets(t.begin(), t.end());
        A.makeCompressed();
        Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
        lu.compute(A);
        if (lu.info() != Eigen::Success)
            throw SolverError("steady state: degenerate null space or singular system (" + lu.lastErrorMessage() + ")");
        Eigen::VectorXcd b = Eigen::VectorXcd::Zero(n * n);
        b(0) = 1.0;
        Eigen::VectorXcd x = lu.solve(b);
        if (lu.info() != Eigen::Success || !x.allFinite()) throw SolverError("steady state: solve failed");
        sd.rho = unvec(x, n);
    } else {
        double gmin = std::numeric_limits<double>::infinity();
        for (const auto& c : ops.collapse_ops)
            if (c.first > 0) gmin = std::min(gmin, 0.5 * c.first);
        if (!std::isfinite(gmin)) throw SolverError("time evolution: no dissipation, no steady state");
        using State = std::vector<cplx>;
        State x(std::size_t(n) * std::size_t(n), cplx(0.0));
        x[0] = 1.0;  // vacuum
        auto rhs = [&L](const State& s, State& ds, double) {
            Eigen::Map<const Eigen::VectorXcd> sv(s.data(), Eigen::Index(s.size()));
            Eigen::Map<Eigen::VectorXcd> dv(ds.data(), Eigen::Index(ds.size()));
            dv = L * sv;
        };
        namespace ode = boost::numeric::odeint;
        auto stepper = ode::make_controlled(opt.abs_tol, opt.rel_tol, ode::runge_kutta_dopri5<State>());
        ode::integrate_adaptive(stepper, rhs, x, 0.0, opt.time_factor / gmin, 1e-3);
        Eigen::Map<const Eigen::VectorXcd> xv(x.data(), Eigen::Index(x.size()));
        sd.rho = unvec(xv, n);
    }
    detail::finish_density(sd, L, opt);
    if (sd.residual > 1e-9 * sd.liouvillian_norm) sd.warnings.push_back("steady state residual above 1e-9 ||L||");
    return sd;
}

struct HomodyneMoments {
    double mean = 0;      // <a + a^dag>
    double variance = 0;  // <M^2> - <M>^2
    double photons_a = 0;
    double photons_b = 0;
};

inline HomodyneMoments homodyne_moments(const SteadyDensity& sd) {
    const auto ds = mode_dims(sd.dims);
    const Eigen::MatrixXcd a = Eigen::MatrixXcd(embed(annihilation(sd.dims.a), 0, ds));
    const Eigen::MatrixXcd b = Eigen::MatrixXcd(embed(annihilation(sd.dims.b), 1, ds));
    const Eigen::MatrixXcd M = a + a.adjoint();
    HomodyneMoments h;
    h.mean = (sd.rho * M).trace().real();
    h.variance = (sd.rho * M * M).trace().real() - h.mean * h.mean;
    h.photons_a = (sd.rho * a.adjoint() * a).trace().real();
    h.photons_b = (sd.rho * b.adjoint() * b).trace().real();
    return h;
}

inline SteadyDensity oracle_steady(const SystemParams& p, Coupling c, const Dims& dims,
                                   SteadyMethod m = SteadyMethod::NullSpace, const OracleOptions& opt = {}) {
    return steady_state(build_hamiltonian(with_coupling(p, c), dims, Drive::SinglePhoton | Drive::ExternalForce), m,
                        opt);
}

struct TruncationCheck {
    SteadyDensity coarse, fine;  // dims and doubled dims
    double photons_coarse = 0, photons_fine = 0;
    double rel_change = 0;
    bool converged = true;
};

// photon number at dims vs 2 x dims; flags the run when it moves by more than tol
inline TruncationCheck truncation_check(const SystemParams& p, Coupling c, const Dims& dims, double tol = 0.01,
                                        const OracleOptions& opt = {}) {
    TruncationCheck t;
    t.coarse = oracle_steady(p, c, dims, SteadyMethod::NullSpace, opt);
    t.fine = oracle_steady(p, c, Dims{2 * dims.a, 2 * dims.b, 0}, SteadyMethod::NullSpace, opt);
    t.photons_coarse = homodyne_moments(t.coarse).photons_a;
    t.photons_fine = homodyne_moments(t.fine).photons_a;
    t.rel_change = std::abs(t.photons_fine - t.photons_coarse) / std::max(t.photons_fine, 1e-300);
    t.converged = t.rel_change <= tol;
    if (!t.converged) t.fine.warnings.push_back("truncation: photon number not converged under dims doubling");
    return t;
}

struct OracleQfi {
    double qfi = 0;
    double eigen_floor = 1e-12;
    int clamped = 0;             // eigenvalue pairs dropped below the floor
    double clamp_magnitude = 0;  // most negative eigenvalue seen
};

// mixed-state QFI of the reduced cavity state, SLD form sum 2 |<i|d rho|j>|^2 / (p_i + p_j)
inline OracleQfi numeric_qfi(const SystemParams& p, Coupling c, const Dims& dims, double dg = 1e-3,
                             const OracleOptions& opt = {}) {
    const auto ds = mode_dims(dims);
    std::vector<bool> keep(ds.size(), false);
    keep[0] = true;
    auto cav = [&](double g) {
        SystemParams q = p;
        q.g = g;
        return partial_trace(oracle_steady(q, c, dims, SteadyMethod::NullSpace, opt).rho, ds, keep);
    };
    const Eigen::MatrixXcd r0 = cav(p.g), rp = cav(p.g + dg), rm = cav(p.g - dg);
    const Eigen::MatrixXcd d = (rp - rm) / (2.0 * dg);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(r0);
    const Eigen::VectorXd w = es.eigenvalues();
    const Eigen::MatrixXcd dd = es.eigenvectors().adjoint() * d * es.eigenvectors();
    OracleQfi out;
    out.clamp_magnitude = std::min(0.0, w.minCoeff());
    for (int i = 0; i < w.size(); ++i)
        for (int j = 0; j < w.size(); ++j) {
            double s = std::max(w(i), 0.0) + std::max(w(j), 0.0);
            if (s > out.eigen_floor)
                out.qfi += 2.0 * std::norm(dd(i, j)) / s;
            else if (std::norm(dd(i, j)) > 0)
                ++out.clamped;
        }
    return out;
}

// no-jump conditional steady state: H_eff psi = 0 with psi_00 = 1, projected on {00,01,10,11}
inline Vec4c no_jump_amplitudes(const SystemParams& p, Coupling c, const Dims& dims) {
    const FockOperatorSet ops = build_hamiltonian(with_coupling(p, c), dims, Drive::SinglePhoton | Drive::ExternalForce);
    Eigen::MatrixXcd H = Eigen::MatrixXcd(ops.hamiltonian);
    for (const auto& [r, C] : ops.collapse_ops) H -= (0.5 * r) * I * Eigen::MatrixXcd(adjoint(C) * C);
    const int n = int(H.rows());
    Eigen::VectorXcd x = H.bottomRightCorner(n - 1, n - 1).fullPivLu().solve(-H.bottomLeftCorner(n - 1, 1));
    auto at = [&](int na, int nb) { return na == 0 && nb == 0 ? cplx(1.0) : x(na * dims.b + nb - 1); };
    return Vec4c(at(0, 0), at(0, 1), at(1, 0), at(1, 1));
}

// column |00> of the full steady density, rescaled so the 00 entry is 1 (exact for a pure state)
inline Vec4c projected_amplitudes(const SteadyDensity& sd) {
    const int nb = sd.dims.b;
    const cplx r00 = sd.rho(0, 0);
    auto at = [&](int na, int nb_) { return sd.rho(na * nb + nb_, 0) / r00; };
    return Vec4c(at(0, 0), at(0, 1), at(1, 0), at(1, 1));
}

struct AdiabaticReport {
    double distance = 0;  // trace distance of reduced (a,b) state to the two-mode lambda_eff model
    double lambda_eff = 0;
    double rate_ratio = 0;  // gamma_c / max(gamma_a, gamma_b)
    std::vector<std::string> warnings;
};

inline AdiabaticReport validate_adiabatic_elimination(const SystemParams& p, double mu, double omega_aux,
                                                      double gamma_c, const ThreeModeOptions& topt = {},
                                                      const Dims& dims = {3, 3, 3}) {
    AdiabaticReport rep;
    rep.lambda_eff = effective_lambda(mu, omega_aux, gamma_c, topt.prescription);
    rep.rate_ratio = gamma_c / std::max(p.gamma_a, p.gamma_b);
    const FockOperatorSet three = build_three_mode_model(p, mu, omega_aux, gamma_c, dims, topt);
    rep.warnings = three.warnings;
    const SteadyDensity s3 = steady_state(three);
    const Eigen::MatrixXcd red = partial_trace(s3.rho, mode_dims(dims), {true, true, false});
    SystemParams q = p;
    q.lambda = rep.lambda_eff;
    const SteadyDensity s2 = steady_state(build_hamiltonian(q, Dims{dims.a, dims.b, 0}, Drive::SinglePhoton | Drive::ExternalForce));
    rep.distance = trace_distance(red, s2.rho);
    return rep;
}

}  // namespace optograv
