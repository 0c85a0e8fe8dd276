#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "types.hpp"

namespace optograv {

struct LineFit {
    double slope = 0;
    double intercept = 0;
    double rms = 0;  // residual rms in log space
};

// least squares of log y against log x
inline LineFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw ParamError("fit needs matching x, y with >= 2 points");
    const int n = int(x.size());
    Eigen::MatrixXd A(n, 2);
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) {
        if (!(x[i] > 0) || !(y[i] > 0)) throw ParamError("log-log fit needs positive data");
        A(i, 0) = std::log(x[i]);
        A(i, 1) = 1.0;
        b(i) = std::log(y[i]);
    }
    Eigen::Vector2d c = A.colPivHouseholderQr().solve(b);
    LineFit f;
    f.slope = c(0);
    f.intercept = c(1);
    f.rms = std::sqrt((A * c - b).squaredNorm() / n);
    return f;
}

}  // namespace optograv
