#pragma once

#include <algorithm>
#include <cmath>

#include "csrr/matrix.hpp"

namespace csrr {

/// Singular value thresholding: shrink every singular value by `threshold`
/// and clip at zero. Closed-form proximal operator of the nuclear norm.
inline Matrix svt(const Matrix& m, double threshold) {
    SvdResult d = svd(m);
    Eigen::VectorXd shrunk =
        (d.singular.array() - threshold).cwiseMax(0.0).matrix();
    return d.left * shrunk.asDiagonal() * d.right.transpose();
}

/// sign(a) * max(|a| - b, 0)
inline double soft_threshold(double a, double b) {
    double mag = std::abs(a) - b;
    if (mag <= 0.0) return 0.0;
    return a < 0.0 ? -mag : mag;
}

/// Entry-wise soft threshold; proximal operator of threshold * ||.||_1.
inline Matrix prox_l1(const Matrix& m, double threshold) {
    return m.unaryExpr([threshold](double a) { return soft_threshold(a, threshold); });
}

}  // namespace csrr
