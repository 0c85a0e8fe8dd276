#pragma once

#include <Eigen/Sparse>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "types.hpp"

namespace optograv {

using SpMat = Eigen::SparseMatrix<cplx>;

enum class Drive : unsigned {
    None = 0,
    SinglePhoton = 1,
    TwoPhoton = 2,
    MPA = 4,
    ExternalForce = 8,
};

constexpr Drive operator|(Drive x, Drive y) {
    return static_cast<Drive>(static_cast<unsigned>(x) | static_cast<unsigned>(y));
}
constexpr bool has(Drive set, Drive d) { return (static_cast<unsigned>(set) & static_cast<unsigned>(d)) != 0; }

inline Drive drive_for(Regime r) {
    Drive d = Drive::SinglePhoton | Drive::ExternalForce;
    if (is_two_photon(r)) d = d | Drive::TwoPhoton;
    if (is_mpa(r)) d = d | Drive::MPA;
    return d;
}

struct Dims {
    int a = 10;
    int b = 10;
    int c = 0;  // 0 = no auxiliary mode
    int total() const { return a * b * (c > 0 ? c : 1); }
};

struct FockOptions {
    // Hilbert dimension cap; Liouvillian is total^2 square
    int max_dim = 100;
};

struct FockOperatorSet {
    Dims dims;
    SpMat a, b, c;
    SpMat hamiltonian;
    std::vector<std::pair<double, SpMat>> collapse_ops;  // (rate, op): rate * D[op]
    std::vector<std::string> warnings;
    int dim() const { return dims.total(); }
};

inline SpMat identity(int n) {
    SpMat m(n, n);
    m.setIdentity();
    return m;
}

inline SpMat annihilation(int d) {
    SpMat m(d, d);
    std::vector<Eigen::Triplet<cplx>> t;
    for (int n = 1; n < d; ++n) t.emplace_back(n - 1, n, std::sqrt(double(n)));
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

inline SpMat kron(const SpMat& x, const SpMat& y) {
    SpMat out(x.rows() * y.rows(), x.cols() * y.cols());
    std::vector<Eigen::Triplet<cplx>> t;
    t.reserve(std::size_t(x.nonZeros()) * std::size_t(y.nonZeros()));
    for (int kx = 0; kx < x.outerSize(); ++kx)
        for (SpMat::InnerIterator ix(x, kx); ix; ++ix)
            for (int ky = 0; ky < y.outerSize(); ++ky)
                for (SpMat::InnerIterator iy(y, ky); iy; ++iy)
                    t.emplace_back(ix.row() * y.rows() + iy.row(), ix.col() * y.cols() + iy.col(),
                                   ix.value() * iy.value());
    out.setFromTriplets(t.begin(), t.end());
    return out;
}

// op acting on mode `which` of the product space, first mode is the most significant index
inline SpMat embed(const SpMat& op, int which, const std::vector<int>& ds) {
    SpMat out = identity(1);
    for (int j = 0; j < int(ds.size()); ++j) out = kron(out, j == which ? op : identity(ds[j]));
    return out;
}

inline SpMat adjoint(const SpMat& m) { return SpMat(m.adjoint()); }

inline void check_dims(const Dims& d, const FockOptions& opt) {
    if (d.a < 2 || d.b < 2) throw ParamError("fock dimensions must be >= 2 per active mode");
    if (d.c == 1 || d.c < 0) throw ParamError("auxiliary mode dimension must be 0 or >= 2");
    if (d.total() > opt.max_dim)
        throw ParamError("dimension overflow: product space " + std::to_string(d.total()) + " exceeds cap " +
                         std::to_string(opt.max_dim));
}

namespace detail {

inline FockOperatorSet two_mode_core(const SystemParams& p, const Dims& dims, Drive drive, const FockOptions& opt) {
    check_dims(dims, opt);
    if (has(drive, Drive::TwoPhoton) && has(drive, Drive::MPA))
        throw ParamError("invalid drive combination: two-photon drive and parametric amplification together");
    std::vector<int> ds{dims.a, dims.b};
    if (dims.c > 0) ds.push_back(dims.c);

    FockOperatorSet ops;
    ops.dims = dims;
    ops.a = embed(annihilation(dims.a), 0, ds);
    ops.b = embed(annihilation(dims.b), 1, ds);
    if (dims.c > 0) ops.c = embed(annihilation(dims.c), 2, ds);

    const SpMat ad = adjoint(ops.a), bd = adjoint(ops.b);
    const SpMat na = ad * ops.a;
    const SpMat xb = ops.b + bd;

    // frame rotating at the (resonant) drive frequency, no cavity detuning term
    SpMat H = p.omega_b * (bd * ops.b) - p.kappa * (na * xb);
    H += (std::cos(p.theta_tilt) * p.G()) * xb;
    if (has(drive, Drive::ExternalForce)) H -= p.force_F * xb;
    if (has(drive, Drive::SinglePhoton)) H += p.eta * (ops.a + ad);
    if (has(drive, Drive::TwoPhoton)) H += (0.5 * p.chi) * (ops.a * ops.a + ad * ad);
    if (has(drive, Drive::MPA)) H += (0.5 * p.upsilon) * (ops.b * ops.b + bd * bd);
    ops.hamiltonian = H;

    // amplitude damping gamma <-> Lindblad prefactor 2 gamma
    ops.collapse_ops.emplace_back(2.0 * p.gamma_a, ops.a);
    ops.collapse_ops.emplace_back(2.0 * p.gamma_b, ops.b);
    if (p.lambda > 0) ops.collapse_ops.emplace_back(2.0 * p.lambda, SpMat(I * na + ops.b));
    if (!p.standard_lambda()) ops.warnings.push_back("unverified regime: lambda not in {0, kappa}");
    return ops;
}

}  // namespace detail

inline FockOperatorSet build_hamiltonian(const SystemParams& p, const Dims& dims, Drive drive,
                                         const FockOptions& opt = {}) {
    p.validate();
    Dims d = dims;
    d.c = 0;
    return detail::two_mode_core(p, d, drive, opt);
}

enum class CouplingPrescription {
    Engineered,    // nu = i mu, mode c couples to z = i a^dag a + b
    Literal,  // nu = omega_aux - i gamma_c
};

struct ThreeModeOptions {
    CouplingPrescription prescription = CouplingPrescription::Engineered;
    double min_rate_ratio = 50.0;
    FockOptions fock{1000};
};

// lambda the reduced two-mode model should show for a given auxiliary mode
inline double effective_lambda(double mu, double omega_aux, double gamma_c, CouplingPrescription pr) {
    double den = omega_aux * omega_aux + gamma_c * gamma_c;
    return pr == CouplingPrescription::Engineered ? mu * mu * gamma_c / den : mu * mu / den;
}

// mu giving effective_lambda == lam
inline double mu_for_lambda(double lam, double omega_aux, double gamma_c, CouplingPrescription pr) {
    double den = omega_aux * omega_aux + gamma_c * gamma_c;
    return pr == CouplingPrescription::Engineered ? std::sqrt(lam * den / gamma_c) : std::sqrt(lam * den);
}

// Auxiliary lossy mode c. The dissipative coupling is carried by c, so p.lambda is ignored here.
inline FockOperatorSet build_three_mode_model(const SystemParams& p, double mu, double omega_aux, double gamma_c,
                                              const Dims& dims, const ThreeModeOptions& opt = {}) {
    p.validate();
    if (dims.c < 2) throw ParamError("three-mode model needs dims.c >= 2");
    if (!(gamma_c > 0)) throw ParamError("gamma_c must be > 0");
    SystemParams q = p;
    q.lambda = 0.0;
    FockOperatorSet ops = detail::two_mode_core(q, dims, Drive::SinglePhoton | Drive::ExternalForce, opt.fock);
    ops.warnings.clear();

    const cplx nu = opt.prescription == CouplingPrescription::Engineered ? cplx(0.0, mu)
                                                                          : cplx(omega_aux, -gamma_c);
    const SpMat cd = adjoint(ops.c), bd = adjoint(ops.b);
    const SpMat na = adjoint(ops.a) * ops.a;
    ops.hamiltonian += omega_aux * (cd * ops.c) + mu * (na * (ops.c + cd)) + nu * (bd * ops.c) +
                       std::conj(nu) * (ops.b * cd);
    ops.collapse_ops.emplace_back(2.0 * gamma_c, ops.c);

    if (gamma_c / std::max(p.gamma_a, p.gamma_b) < opt.min_rate_ratio)
        ops.warnings.push_back("adiabatic regime not satisfied: gamma_c / max(gamma_a, gamma_b) below " +
                               std::to_string(opt.min_rate_ratio));
    return ops;
}

// max |H - H^dag|
inline double hermiticity_error(const SpMat& H) {
    SpMat d = H - adjoint(H);
    double m = 0;
    for (int k = 0; k < d.outerSize(); ++k)
        for (SpMat::InnerIterator it(d, k); it; ++it) m = std::max(m, std::abs(it.value()));
    return m;
}

}  // namespace optograv
