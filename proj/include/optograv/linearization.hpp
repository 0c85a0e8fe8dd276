#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "types.hpp"

namespace optograv {

using Mat4 = Eigen::Matrix4cd;
using Vec4 = Eigen::Vector4cd;

// Fluctuation basis (da, da^dag, db, db^dag). Derived from the Langevin equations
// linearized around (alpha, beta) for general lambda, chi, upsilon.
inline Mat4 drift_matrix(const SystemParams& p, cplx alpha, cplx beta) {
    const double k = p.kappa, l = p.lambda;
    const double xb = 2.0 * beta.real();
    const cplx da = -p.gamma_a - l + I * (k + l) * xb;
    const cplx cab = I * (k + l) * alpha;
    const cplx cba = I * (k - l);
    Mat4 M;
    M << da, -I * p.chi, cab, cab,
        I * p.chi, std::conj(da), std::conj(cab), std::conj(cab),
        cba * std::conj(alpha), cba * alpha, cplx(-p.gamma_b - l, -p.omega_b), -I * p.upsilon,
        std::conj(cba * alpha), std::conj(cba * std::conj(alpha)), I * p.upsilon, cplx(-p.gamma_b - l, p.omega_b);
    return M;
}

// D = B N B^dag for inputs (a_in, a_in^dag, b_in, b_in^dag, z_in, z_in^dag), vacuum N = diag(1,0,1,0,1,0)
inline Mat4 noise_matrix(const SystemParams& p, cplx alpha) {
    Eigen::Matrix<cplx, 4, 6> B = Eigen::Matrix<cplx, 4, 6>::Zero();
    const double sa = std::sqrt(2 * p.gamma_a), sb = std::sqrt(2 * p.gamma_b), sl = std::sqrt(2 * p.lambda);
    B(0, 0) = sa;
    B(0, 4) = B(0, 5) = -I * sl * alpha;
    B(1, 1) = sa;
    B(1, 4) = B(1, 5) = I * sl * std::conj(alpha);
    B(2, 2) = sb;
    B(2, 4) = sl;
    B(3, 3) = sb;
    B(3, 5) = sl;
    Eigen::Matrix<cplx, 6, 1> nd;
    nd << 1, 0, 1, 0, 1, 0;
    return B * nd.asDiagonal() * B.adjoint();
}

// diagonal similarity balancing, keeps eigenvalues accurate when alpha is huge
template <class M>
M balanced(M A) {
    const int n = int(A.rows());
    bool done = false;
    for (int it = 0; it < 100 && !done; ++it) {
        done = true;
        for (int i = 0; i < n; ++i) {
            double c = 0, r = 0;
            for (int j = 0; j < n; ++j)
                if (j != i) {
                    c += std::abs(A(j, i));
                    r += std::abs(A(i, j));
                }
            if (c == 0 || r == 0) continue;
            double f = 1.0, s = c + r;
            while (c < r / 2) {
                c *= 2;
                r /= 2;
                f *= 2;
            }
            while (c > r * 2) {
                c /= 2;
                r *= 2;
                f /= 2;
            }
            if ((c + r) < 0.95 * s) {
                done = false;
                A.row(i) /= f;
                A.col(i) *= f;
            }
        }
    }
    return A;
}

inline Vec4 drift_eigenvalues(const Mat4& M) {
    Eigen::ComplexEigenSolver<Mat4> es(balanced(M), false);
    Vec4 ev = es.eigenvalues();
    std::sort(ev.data(), ev.data() + 4, [](cplx x, cplx y) {
        return x.real() != y.real() ? x.real() > y.real() : x.imag() > y.imag();
    });
    return ev;
}

inline double max_real(const Vec4& ev) { return ev.real().maxCoeff(); }

}  // namespace optograv
