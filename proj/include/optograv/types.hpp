#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace optograv {

using cplx = std::complex<double>;
inline constexpr cplx I{0.0, 1.0};

// error kinds, the cli maps config problems to exit 2 and the rest to 3
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ParamError : Error {
    using Error::Error;
};
struct BeyondCritical : Error {
    using Error::Error;
};
struct NoSteadyState : Error {
    using Error::Error;
};
struct DegenerateEstimand : Error {
    using Error::Error;
};
struct SolverError : Error {
    using Error::Error;
};

// All quantities dimensionless, gamma_b = 1 is the usual unit rate.
struct SystemParams {
    double omega_b = 20.0;
    double kappa = 0.05;
    double lambda = 0.05;
    double gamma_a = 1.0;
    double gamma_b = 1.0;
    double eta = 0.0;
    double chi = 0.0;
    double upsilon = 0.0;
    double mass = 40.0;  // with omega_b = 20 this gives dG/dg = 1
    double g = 0.0;
    double theta_tilt = 0.0;
    double force_F = 0.0;

    double dG_dg() const { return std::sqrt(mass / (2.0 * omega_b)); }
    double G() const { return g * dG_dg(); }
    // net coefficient of (b + b^dag): cos(theta) G - F
    double gravity_drive() const { return std::cos(theta_tilt) * G() - force_F; }
    // derivative of gravity_drive with respect to g
    double drive_dg() const { return std::cos(theta_tilt) * dG_dg(); }

    void set_G(double G) { g = G / dG_dg(); }

    // lambda in {0, kappa}; anything else is accepted by the builders only
    bool standard_lambda() const { return lambda == 0.0 || lambda == kappa; }

    void validate() const {
        auto bad = [](const char* what) { throw ParamError(std::string("invalid parameter: ") + what); };
        if (!(gamma_a > 0)) bad("gamma_a must be > 0");
        if (!(gamma_b > 0)) bad("gamma_b must be > 0");
        if (!(omega_b > 0)) bad("omega_b must be > 0");
        if (!(mass > 0)) bad("mass must be > 0");
        if (!(lambda >= 0)) bad("lambda must be >= 0");
        for (double v : {kappa, eta, chi, upsilon, g, theta_tilt, force_F})
            if (!std::isfinite(v)) bad("non-finite value");
    }
};

enum class Regime {
    NonreciprocalSingle,
    ReciprocalSingle,
    NonreciprocalTwoPhoton,
    ReciprocalTwoPhoton,
    NonreciprocalMPA,
    ReciprocalMPA,
};

enum class Coupling { Nonreciprocal, Reciprocal };

inline Coupling coupling_of(Regime r) {
    switch (r) {
    case Regime::NonreciprocalSingle:
    case Regime::NonreciprocalTwoPhoton:
    case Regime::NonreciprocalMPA: return Coupling::Nonreciprocal;
    default: return Coupling::Reciprocal;
    }
}

inline bool is_two_photon(Regime r) {
    return r == Regime::NonreciprocalTwoPhoton || r == Regime::ReciprocalTwoPhoton;
}
inline bool is_mpa(Regime r) { return r == Regime::NonreciprocalMPA || r == Regime::ReciprocalMPA; }

inline const char* to_string(Regime r) {
    switch (r) {
    case Regime::NonreciprocalSingle: return "nonreciprocal_single";
    case Regime::ReciprocalSingle: return "reciprocal_single";
    case Regime::NonreciprocalTwoPhoton: return "nonreciprocal_two_photon";
    case Regime::ReciprocalTwoPhoton: return "reciprocal_two_photon";
    case Regime::NonreciprocalMPA: return "nonreciprocal_mpa";
    case Regime::ReciprocalMPA: return "reciprocal_mpa";
    }
    return "?";
}

inline Regime regime_from_string(const std::string& s) {
    for (Regime r : {Regime::NonreciprocalSingle, Regime::ReciprocalSingle, Regime::NonreciprocalTwoPhoton,
                     Regime::ReciprocalTwoPhoton, Regime::NonreciprocalMPA, Regime::ReciprocalMPA})
        if (s == to_string(r)) return r;
    throw ParamError("unknown regime: " + s);
}

inline const char* to_string(Coupling c) {
    return c == Coupling::Nonreciprocal ? "nonreciprocal" : "reciprocal";
}

inline SystemParams with_coupling(SystemParams p, Coupling c) {
    p.lambda = c == Coupling::Nonreciprocal ? p.kappa : 0.0;
    return p;
}

// lambda set by the regime, drives that the regime does not have are zeroed
inline SystemParams for_regime(SystemParams p, Regime r) {
    p = with_coupling(p, coupling_of(r));
    if (!is_two_photon(r)) p.chi = 0.0;
    if (!is_mpa(r)) p.upsilon = 0.0;
    return p;
}

}  // namespace optograv
