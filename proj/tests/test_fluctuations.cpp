#include <gtest/gtest.h>

#include <optograv/fluctuations.hpp>

#include "oracles.hpp"

using namespace optograv;

namespace {

SystemParams point(double kappa, double eta, double G, Coupling c = Coupling::Nonreciprocal) {
    SystemParams p;
    p.omega_b = 20;
    p.gamma_a = p.gamma_b = 1;
    p.kappa = kappa;
    p.lambda = c == Coupling::Nonreciprocal ? kappa : 0.0;
    p.eta = eta;
    p.set_G(G);
    return p;
}

}  // namespace

TEST(Drift, MatchesNumericJacobian) {
    auto p = point(0.3, 2.0, 0.7);
    p.chi = 0.4;
    p.upsilon = 3.0;
    for (Regime r : {Regime::NonreciprocalMPA, Regime::ReciprocalMPA, Regime::NonreciprocalTwoPhoton,
                     Regime::ReciprocalTwoPhoton}) {
        auto q = for_regime(p, r);
        q.lambda = 0.17;  // generic lambda, not one of the regimes
        const cplx a(0.3, -1.1), b(-0.02, 0.05);
        const Mat4 M = drift_matrix(q, a, b);
        const Mat4 N = oracle::numeric_drift(q, a, b);
        EXPECT_LT((M - N).norm(), 1e-8) << to_string(r);
    }
}

TEST(Drift, NonreciprocalSpectrum) {
    for (double chi : {0.0, 0.3, -0.9}) {
        auto p = point(0.05, 2.0, 1.0);
        p.chi = chi;
        auto ls = build_drift(steady_two_photon(p, Coupling::Nonreciprocal));
        auto ref = nonreciprocal_eigenvalues(p);
        for (const cplx& z : ref) {
            double best = 1e300;
            for (int i = 0; i < 4; ++i) best = std::min(best, std::abs(ls.eigenvalues(i) - z));
            EXPECT_LT(best, 1e-10) << chi;
        }
        EXPECT_TRUE(ls.stable);
    }
}

TEST(Drift, EigenvaluesSortedByGrowth) {
    auto ls = build_drift(steady_reciprocal_single(point(0.1, 3.0, 1.0, Coupling::Reciprocal)));
    for (int i = 0; i < 3; ++i) EXPECT_GE(ls.eigenvalues(i).real(), ls.eigenvalues(i + 1).real());
}

TEST(Noise, HandEntries) {
    auto p = point(0.2, 1.0, 1.0);
    const cplx a(0.5, -0.3);
    Mat4 D = noise_matrix(p, a);
    EXPECT_NEAR(std::abs(D(0, 0) - (2.0 + 0.4 * std::norm(a))), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(D(1, 1) - 0.4 * std::norm(a)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(D(2, 2) - 2.4), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(D(0, 2) - (-I * 0.4 * a)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(D(1, 0) + 0.4 * std::conj(a) * std::conj(a)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(D(3, 3)), 0.0, 1e-15);
    EXPECT_LT((D - D.adjoint()).norm(), 1e-15);
    // positive semidefinite
    Eigen::SelfAdjointEigenSolver<Mat4> es(D);
    EXPECT_GT(es.eigenvalues().minCoeff(), -1e-14);
}

TEST(Lyapunov, MatchesKernelQuadrature) {
    struct Case {
        double kappa, eta, G, chi;
        Coupling c;
    };
    for (const Case& k : {Case{0.05, 2.0, 1.0, 0.0, Coupling::Nonreciprocal}, Case{0.3, 0.7, 2.0, 0.5, Coupling::Nonreciprocal},
                          Case{0.1, 2.0, 1.0, 0.0, Coupling::Reciprocal}, Case{0.2, 1.0, 3.0, -0.4, Coupling::Reciprocal}}) {
        auto p = point(k.kappa, k.eta, k.G, k.c);
        p.chi = k.chi;
        auto ls = build_drift(steady_two_photon(p, k.c));
        auto m = steady_covariance(ls);
        const double q = oracle::kernel_quadrature_adag_a(ls.drift, ls.noise_corr);
        EXPECT_LT(std::abs(m.adag_a - q) / q, 1e-6) << k.kappa << " " << k.G;
        EXPECT_LT(m.residual, 1e-12);
    }
}

TEST(Lyapunov, NonreciprocalRatioIsExact) {
    for (double eta : {0.1, 2.0, 30.0, 1e3}) {
        auto p = point(0.05, eta, 1.0);
        auto mf = steady_nonreciprocal_single(p);
        auto m = steady_covariance(build_drift(mf));
        EXPECT_NEAR(m.adag_a / mf.n(), 0.05 / 1.05, 1e-9) << eta;
    }
}

TEST(Lyapunov, ClosedFormZeta) {
    auto p = point(0.05, 2.0, 1.0);
    auto mf = steady_nonreciprocal_single(p);
    const double z = steady_covariance(build_drift(mf)).adag_a / mf.n();
    EXPECT_LT(std::abs(zeta_closed_form(p) - z) / z, 2e-3);
    EXPECT_GT(std::abs(zeta_closed_form_alt(p) - z) / z, 0.05);
}

TEST(Lyapunov, UnstableRefused) {
    auto p = point(0.05, 2.0, 1.0);
    p.chi = 1.01 * chi_critical(p);
    MeanFieldOptions o;
    o.allow_beyond_critical = true;
    auto ls = build_drift(steady_two_photon(p, Coupling::Nonreciprocal, o));
    EXPECT_FALSE(ls.stable);
    EXPECT_THROW(steady_covariance(ls), NoSteadyState);
}

TEST(Lyapunov, UndrivenCavityIsVacuum) {
    auto m = moments(point(0.05, 0.0, 1.0), Regime::NonreciprocalSingle);
    EXPECT_NEAR(m.adag_a, 0.0, 1e-15);
    // the b part of D[z] only adds damping at zero temperature
    EXPECT_NEAR(m.bdag_b, 0.0, 1e-15);
}

TEST(Scaling, NoiseGrowsTowardCritical) {
    auto p = point(0.05, 2.0, 1.0);
    const double cc = chi_critical(p);
    std::vector<double> chis;
    for (double f : {0.9, 0.99, 0.999, 0.9999}) chis.push_back(f * cc);
    auto s = critical_noise_scaling(p, chis);
    ASSERT_EQ(s.adag_a.size(), 4u);
    for (int i = 0; i < 3; ++i) EXPECT_GT(s.adag_a[i + 1], s.adag_a[i]);
    EXPECT_LT(s.fit.slope, -1.0);
    EXPECT_THROW(critical_noise_scaling(p, {0.1, 0.2, 0.3}), ParamError);
}

TEST(Frontier, NonreciprocalBisection) {
    auto p = point(0.05, 2.0, 1.0);
    const double cc = std::sqrt(1.05 * 1.05 + G1(p) * G1(p));
    EXPECT_NEAR(chi_critical(p), cc, 1e-14);
    EXPECT_LT(std::abs(stability_frontier(p, Coupling::Nonreciprocal, 0.5 * cc, 2 * cc) - cc) / cc, 1e-9);
    EXPECT_LT(std::abs(stability_frontier(p, Coupling::Nonreciprocal, -2 * cc, -0.5 * cc) + cc) / cc, 1e-9);
    EXPECT_THROW(stability_frontier(p, Coupling::Nonreciprocal, 0.1 * cc, 0.5 * cc), SolverError);
}
