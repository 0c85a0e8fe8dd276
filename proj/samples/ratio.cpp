// Compare gravimetric uncertainty of the two couplings across cavity drive strength.
#include <cstdio>

#include <optograv/optograv.hpp>

int main() {
    using namespace optograv;
    SystemParams p;
    p.kappa = 0.01;
    p.set_G(1.0);

    std::printf("%10s %14s %14s %10s %10s\n", "eta", "dg_nonrecip", "dg_recip", "R", "validity");
    for (double eta : {0.1, 0.3, 1.0, 3.0, 10.0, 30.0}) {
        p.eta = eta;
        try {
            const RatioReport r = regime_ratio(p);
            std::printf("%10.3g %14.6g %14.6g %10.4f %10.3g\n", eta, r.nonreciprocal.delta_g, r.reciprocal.delta_g,
                        r.R, r.nonreciprocal.validity_ratio);
        } catch (const Error& e) {
            std::printf("%10.3g  %s\n", eta, e.what());
        }
    }
}
