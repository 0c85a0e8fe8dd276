#include <gtest/gtest.h>

#include <optograv/metrology.hpp>
#include <optograv/oracle.hpp>
#include <optograv/weak_drive.hpp>

using namespace optograv;

namespace {

SystemParams point(double eta, double G, double kappa = 0.05) {
    SystemParams p;
    p.omega_b = 20;
    p.gamma_a = p.gamma_b = 1;
    p.kappa = p.lambda = kappa;
    p.eta = eta;
    p.set_G(G);
    return p;
}

Eigen::MatrixXcd thermal(int d, double x) {
    Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(d, d);
    for (int i = 0; i < d; ++i) r(i, i) = std::pow(x, i);
    r /= r.trace();
    r(0, 1) = r(1, 0) = 0.05;
    return r;
}

}  // namespace

TEST(PartialTrace, ProductState) {
    const Eigen::MatrixXcd ra = thermal(3, 0.3), rb = thermal(4, 0.5);
    Eigen::MatrixXcd r(12, 12);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r.block(4 * i, 4 * j, 4, 4) = ra(i, j) * rb;
    EXPECT_LT((partial_trace(r, {3, 4}, {true, false}) - ra).norm(), 1e-15);
    EXPECT_LT((partial_trace(r, {3, 4}, {false, true}) - rb).norm(), 1e-15);
}

TEST(TraceDistance, Basics) {
    Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(2, 2), y = x;
    x(0, 0) = 1;
    y(1, 1) = 1;
    EXPECT_NEAR(trace_distance(x, y), 1.0, 1e-15);
    EXPECT_NEAR(trace_distance(x, x), 0.0, 1e-15);
}

TEST(Steady, PhysicalDensity) {
    for (Coupling c : {Coupling::Nonreciprocal, Coupling::Reciprocal}) {
        auto sd = oracle_steady(point(0.1, 1.0), c, {6, 6});
        EXPECT_LT(sd.trace_error, 1e-10);
        EXPECT_LT(sd.hermiticity_error, 1e-12);
        EXPECT_GT(sd.min_eigenvalue, -1e-12);
        EXPECT_LT(sd.residual, 1e-12 * sd.liouvillian_norm);
        EXPECT_TRUE(sd.truncation_ok);
        EXPECT_TRUE(sd.warnings.empty());
    }
}

TEST(Steady, UndrivenIsVacuum) {
    auto sd = oracle_steady(point(0.0, 0.0), Coupling::Nonreciprocal, {4, 4});
    EXPECT_NEAR(std::real(sd.rho(0, 0)), 1.0, 1e-12);
    auto h = homodyne_moments(sd);
    EXPECT_NEAR(h.mean, 0.0, 1e-12);
    EXPECT_NEAR(h.variance, 1.0, 1e-12);
}

TEST(Steady, DrivenDampedCavity) {
    // no optomechanics: coherent state alpha = -i eta / gamma_a on the cavity
    auto p = point(0.3, 1.0, 0.0);
    p.gamma_a = 2.0;
    p.omega_b = 20;
    auto h = homodyne_moments(oracle_steady(p, Coupling::Nonreciprocal, {8, 4}));
    const cplx alpha = -I * 0.3 / 2.0;
    EXPECT_NEAR(h.mean, 2 * alpha.real(), 1e-12);
    EXPECT_NEAR(h.photons_a, std::norm(alpha), 1e-9);
    EXPECT_NEAR(h.variance, 1.0, 1e-9);
}

TEST(Steady, TimeEvolutionAgrees) {
    auto p = point(0.1, 1.0);
    auto a = oracle_steady(p, Coupling::Nonreciprocal, {4, 4});
    auto b = oracle_steady(p, Coupling::Nonreciprocal, {4, 4}, SteadyMethod::TimeEvolution);
    EXPECT_LT(trace_distance(a.rho, b.rho), 1e-9);
}

TEST(Steady, TruncationFlagged) {
    auto sd = oracle_steady(point(2.0, 1.0), Coupling::Nonreciprocal, {3, 3});
    EXPECT_FALSE(sd.truncation_ok);
    EXPECT_FALSE(sd.warnings.empty());
}

TEST(Steady, TruncationDoubling) {
    auto t = truncation_check(point(0.1, 1.0), Coupling::Nonreciprocal, {4, 4});
    EXPECT_TRUE(t.converged);
    EXPECT_LT(t.rel_change, 1e-6);
    auto bad = truncation_check(point(1.5, 1.0), Coupling::Nonreciprocal, {2, 3});
    EXPECT_FALSE(bad.converged);
}

TEST(CrossCheck, NonreciprocalWeakDrive) {
    auto p = point(0.1, 1.0);
    auto h = homodyne_moments(oracle_steady(p, Coupling::Nonreciprocal, {6, 6}));
    auto mf = steady_nonreciprocal_single(p);
    auto m = moments(p, Regime::NonreciprocalSingle);
    EXPECT_NEAR(h.mean, mf.homodyne_mean(), 1e-8);
    // D[z] commutes with a^dag a, the exact population is |alpha|^2 (1 + k / gamma_a)
    EXPECT_NEAR(h.photons_a, mf.n() * (1 + 0.05), 1e-8);
    EXPECT_LT(std::abs(h.photons_a - (mf.n() + m.adag_a)) / h.photons_a, 0.01);
    EXPECT_LT(std::abs(h.variance - (1 + 2 * m.adag_a)) / h.variance, 0.01);
    EXPECT_LT(std::abs(h.variance - (1 + 2 * m.adag_a + 2 * m.aa.real())) / h.variance, 1e-4);
}

TEST(CrossCheck, ReciprocalWeakDrive) {
    auto p = point(0.1, 1.0);
    p.lambda = 0;
    auto h = homodyne_moments(oracle_steady(p, Coupling::Reciprocal, {6, 6}));
    auto mf = steady_reciprocal_single(p);
    auto m = moments(p, Regime::ReciprocalSingle);
    EXPECT_LT(std::abs(h.mean - mf.homodyne_mean()) / std::abs(h.mean), 0.05);
    EXPECT_LT(std::abs(h.photons_a - (mf.n() + m.adag_a)) / h.photons_a, 0.01);
    EXPECT_LT(std::abs(h.variance - (1 + 2 * m.adag_a)) / h.variance, 0.01);
}

TEST(Qfi, CoherentStateValue) {
    auto p = point(0.01, 0.0);
    const double h = 1e-5;
    SystemParams pp = p, pm = p;
    pp.g += h;
    pm.g -= h;
    const cplx da = (steady_nonreciprocal_single(pp).alpha - steady_nonreciprocal_single(pm).alpha) / (2 * h);
    auto q = numeric_qfi(p, Coupling::Nonreciprocal, {4, 4});
    EXPECT_NEAR(q.qfi / (4 * std::norm(da)), 1.0, 1e-3);
    // jump terms double the dispersive response of the no-jump picture
    EXPECT_NEAR(q.qfi / qfi_closed_form(p, Coupling::Nonreciprocal), 4.0, 0.2);
}

TEST(Qfi, VanishesWithoutCoupling) {
    EXPECT_EQ(numeric_qfi(point(0.01, 0.0, 0.0), Coupling::Nonreciprocal, {3, 3}).qfi, 0.0);
}

TEST(Qfi, CouplingRatioAtGridPoints) {
    for (double ga : {0.5, 2.0}) {
        auto p = point(0.01, 0.0, 0.1);
        p.gamma_a = ga;
        const double oracle_ratio = std::sqrt(numeric_qfi(p, Coupling::Nonreciprocal, {4, 4}).qfi /
                                              numeric_qfi(p, Coupling::Reciprocal, {4, 4}).qfi);
        const double amp_ratio = std::sqrt(qfi(p, Coupling::Nonreciprocal).numeric / qfi(p, Coupling::Reciprocal).numeric);
        // jump terms give the nonreciprocal state a factor 4 in QFI, none in the reciprocal one
        EXPECT_NEAR(oracle_ratio / amp_ratio, 2.0, 0.02) << ga;
        EXPECT_LT(oracle_ratio, 0.1 * rw_closed_form(p)) << ga;
    }
}

TEST(Qfi, CramerRaoHomodyne) {
    auto p = point(0.01, 0.01);
    const Dims d{4, 4};
    auto q = numeric_qfi(p, Coupling::Nonreciprocal, d);
    const double h = 1e-3;
    SystemParams pp = p, pm = p;
    pp.g += h;
    pm.g -= h;
    const double dM = (homodyne_moments(oracle_steady(pp, Coupling::Nonreciprocal, d)).mean -
                       homodyne_moments(oracle_steady(pm, Coupling::Nonreciprocal, d)).mean) / (2 * h);
    const double var = homodyne_moments(oracle_steady(p, Coupling::Nonreciprocal, d)).variance;
    const double dg = std::sqrt(var) / std::abs(dM);
    EXPECT_GE(dg * std::sqrt(q.qfi), 1.0 - 1e-3);
}

TEST(NoJump, MatchesEffectiveHamiltonianOnTwoLevels) {
    auto p = point(0.01, 0.01, 0.3);
    p.gamma_a = 2.0;
    for (Coupling c : {Coupling::Nonreciprocal, Coupling::Reciprocal}) {
        const Vec4c nj = no_jump_amplitudes(p, c, {2, 2});
        const Vec4c hw = steady_amplitudes(p, c).vec();
        EXPECT_LT((nj - hw).norm(), 1e-14) << to_string(c);
        // larger truncation moves it only at higher order in the drive
        EXPECT_LT((no_jump_amplitudes(p, c, {4, 4}) - hw).norm() / std::abs(hw(2)), 1e-3) << to_string(c);
    }
}

TEST(NoJump, HalfTheDispersiveShift) {
    auto p = point(0.01, 0.01, 0.3);
    auto sd = oracle_steady(p, Coupling::Nonreciprocal, {4, 4});
    const Vec4c pr = projected_amplitudes(sd);
    const Vec4c nj = no_jump_amplitudes(p, Coupling::Nonreciprocal, {4, 4});
    const cplx alpha = steady_nonreciprocal_single(p).alpha;
    EXPECT_EQ(pr(0), cplx(1));
    EXPECT_LT(std::abs(pr(2) - alpha) / std::abs(alpha), 1e-4);
    EXPECT_NEAR(pr(2).real() / alpha.real(), 1.0, 1e-3);
    EXPECT_NEAR(nj(2).real() / alpha.real(), 0.5, 0.02);
}

TEST(Adiabatic, ConvergesWithRateRatio) {
    auto p = point(0.1, 0.3, 0.5);
    double prev = 1.0;
    for (double ratio : {50.0, 500.0}) {
        const double mu = mu_for_lambda(p.kappa, 0.0, ratio, CouplingPrescription::Engineered);
        auto r = validate_adiabatic_elimination(p, mu, 0.0, ratio);
        EXPECT_NEAR(r.lambda_eff, p.kappa, 1e-12);
        EXPECT_LT(r.distance, prev);
        EXPECT_LT(r.distance, 1e-3);
        prev = r.distance;
    }
    EXPECT_NEAR(prev, 6.6e-5, 0.5e-5);
}

TEST(Adiabatic, DecoupledAuxiliary) {
    auto r = validate_adiabatic_elimination(point(0.1, 0.3, 0.5), 0.0, 0.0, 50.0);
    EXPECT_LT(r.distance, 1e-12);
    EXPECT_EQ(r.lambda_eff, 0.0);
}

TEST(Adiabatic, SlowAuxiliaryWarns) {
    auto p = point(0.1, 0.3, 0.5);
    const double mu = mu_for_lambda(p.kappa, 0.0, 5.0, CouplingPrescription::Engineered);
    auto r = validate_adiabatic_elimination(p, mu, 0.0, 5.0);
    EXPECT_FALSE(r.warnings.empty());
}

TEST(Adiabatic, LiteralPrescriptionDoesNotConverge) {
    auto p = point(0.1, 0.3, 0.5);
    ThreeModeOptions o;
    o.prescription = CouplingPrescription::Literal;
    const double m50 = mu_for_lambda(p.kappa, 0.0, 50.0, o.prescription);
    const double m500 = mu_for_lambda(p.kappa, 0.0, 500.0, o.prescription);
    EXPECT_GT(validate_adiabatic_elimination(p, m50, 0.0, 50.0, o).distance, 0.05);
    EXPECT_GT(validate_adiabatic_elimination(p, m500, 0.0, 500.0, o).distance, 0.05);
}
