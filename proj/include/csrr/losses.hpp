#pragma once

#include <cmath>
#include <stdexcept>

#include "csrr/matrix.hpp"

namespace csrr {

enum class LossVariant { TypeI, TypeII };

struct InvalidWeightsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Asymmetric misclassification costs (c_p, c_n) with the derived bias
/// alpha = c_p / c_n >= 1.
struct CostModel {
    LossVariant variant = LossVariant::TypeI;
    double c_p = 0.5;
    double c_n = 0.5;
    double alpha = 1.0;

    static CostModel from_costs(LossVariant variant, double c_p, double c_n) {
        if (c_p <= 0 || c_n <= 0 || std::abs(c_p + c_n - 1.0) > 1e-12)
            throw InvalidWeightsError("CostModel requires c_p, c_n in (0,1] with c_p + c_n = 1");
        if (c_n > c_p)
            throw InvalidWeightsError("CostModel requires c_n <= c_p (alpha >= 1)");
        return CostModel{variant, c_p, c_n, c_p / c_n};
    }

    /// Direct alpha, mapped back onto (c_p, c_n) with c_p + c_n = 1.
    static CostModel from_alpha(LossVariant variant, double alpha) {
        if (alpha < 1.0) throw InvalidWeightsError("alpha must be >= 1");
        double c_n = 1.0 / (1.0 + alpha);
        return CostModel{variant, 1.0 - c_n, c_n, alpha};
    }
};

/// Class weights of the weighted recall/specificity sum, with the class
/// counts needed to derive alpha.
struct SumWeights {
    double mu_p = 0.5;
    double mu_n = 0.5;
    Index t_p = 1;
    Index t_n = 1;
};

inline double alpha_from_sum(const SumWeights& w) {
    if (std::abs(w.mu_p + w.mu_n - 1.0) > 1e-12)
        throw InvalidWeightsError("SumWeights requires mu_p + mu_n = 1");
    if (w.mu_n <= 0 || w.t_p <= 0)
        throw InvalidWeightsError("alpha_from_sum requires mu_n > 0 and t_p > 0");
    return (w.mu_p * static_cast<double>(w.t_n)) /
           (w.mu_n * static_cast<double>(w.t_p));
}

/// Cost-sensitive squared loss of one entry. TypeI scales the positive-class
/// loss by alpha; TypeII shifts the positive-class target to alpha.
inline double loss_entry(double x, bool positive, const CostModel& cm) {
    if (positive) {
        if (cm.variant == LossVariant::TypeI) {
            double d = x - 1.0;
            return cm.alpha * 0.5 * d * d;
        }
        double d = x - cm.alpha;
        return 0.5 * d * d;
    }
    return 0.5 * x * x;
}

/// Mistake-driven subgradient: zero whenever the entry's own loss is zero.
inline double subgrad_entry(double x, bool positive, const CostModel& cm) {
    if (loss_entry(x, positive, cm) == 0.0) return 0.0;
    if (positive) {
        if (cm.variant == LossVariant::TypeI) return cm.alpha * (x - 1.0);
        return x - cm.alpha;
    }
    return x;
}

/// Sum of loss_entry over all mn entries (unobserved entries count as 0's).
/// Kahan-compensated so the value is summation-order stable.
inline double total_loss(const Matrix& x, const ObservationMatrix& a, const CostModel& cm) {
    if (x.rows() != a.rows() || x.cols() != a.cols())
        throw DimensionError("total_loss: dimension mismatch");
    double sum = 0.0, comp = 0.0;
    for (Index i = 0; i < x.rows(); ++i) {
        for (Index j = 0; j < x.cols(); ++j) {
            double term = loss_entry(x(i, j), a.is_positive(i, j), cm);
            double y = term - comp;
            double t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
    }
    return sum;
}

/// Entry-wise mistake-driven subgradient matrix G with G_ij =
/// subgrad_entry(X_ij, A_ij).
inline Matrix subgrad_matrix(const Matrix& x, const ObservationMatrix& a, const CostModel& cm) {
    if (x.rows() != a.rows() || x.cols() != a.cols())
        throw DimensionError("subgrad_matrix: dimension mismatch");
    Matrix g(x.rows(), x.cols());
    for (Index i = 0; i < x.rows(); ++i)
        for (Index j = 0; j < x.cols(); ++j)
            g(i, j) = subgrad_entry(x(i, j), a.is_positive(i, j), cm);
    return g;
}

}  // namespace csrr
