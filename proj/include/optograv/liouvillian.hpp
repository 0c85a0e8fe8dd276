#pragma once

#include <Eigen/Dense>

#include "fock.hpp"

namespace optograv {

// Column stacking: vec(A X B) = (B^T kron A) vec(X).
// d rho/dt = -i[H, rho] + sum r (C rho C^dag - 1/2 {C^dag C, rho})
inline SpMat build_liouvillian(const FockOperatorSet& ops) {
    const int n = ops.dim();
    const SpMat Id = identity(n);
    const SpMat& H = ops.hamiltonian;
    SpMat L = (-I) * (kron(Id, H) - kron(SpMat(H.transpose()), Id));
    for (const auto& [rate, C] : ops.collapse_ops) {
        if (rate == 0.0) continue;
        const SpMat CdC = adjoint(C) * C;
        L += rate * (kron(SpMat(C.conjugate()), C) - 0.5 * kron(Id, CdC) - 0.5 * kron(SpMat(CdC.transpose()), Id));
    }
    L.makeCompressed();
    return L;
}

inline Eigen::VectorXcd vec(const Eigen::MatrixXcd& rho) {
    return Eigen::Map<const Eigen::VectorXcd>(rho.data(), rho.size());
}

inline Eigen::MatrixXcd unvec(const Eigen::VectorXcd& v, int n) {
    return Eigen::Map<const Eigen::MatrixXcd>(v.data(), n, n);
}

// || L^dag (identity) ||_inf, zero for a trace preserving generator
inline double trace_preservation_error(const SpMat& L, int n) {
    Eigen::VectorXcd id = vec(Eigen::MatrixXcd::Identity(n, n));
    Eigen::VectorXcd r = L.adjoint() * id;
    return r.cwiseAbs().maxCoeff();
}

}  // namespace optograv
