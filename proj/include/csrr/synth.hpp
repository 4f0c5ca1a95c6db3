#pragma once

#include <cmath>
#include <vector>

#include "csrr/matrix.hpp"
#include "csrr/rng.hpp"

namespace csrr {

/// Synthetic ground truth: M = low-rank + sparse outliers in [0,1],
/// Y = I(M > q), A = a uniform sample of round(rho * S) positives of Y.
struct SyntheticTruth {
    Matrix m_true;
    ObservationMatrix y;
    ObservationMatrix a;
    double q = 0.5;
    double rho = 1.0;
    Index s = 0;  // total 1's in Y
    uint64_t seed = 0;
};

/// Deterministic generator. The low-rank factor is a rank-`rank` product of
/// uniform [0,1] factors rescaled to max entry 0.95, preserving exact rank;
/// outlier cells are overwritten with values in [0.5, 1.0] so they flip
/// thresholding decisions at q = 0.5. Pre-clamp entries never exceed 1, so
/// clamp_unit is inactive and the rank structure is exact off the outliers.
inline SyntheticTruth generate(Index n, Index m, Index rank, double outlier_frac, double q,
                               double rho, uint64_t seed) {
    if (rank < 1 || rank > std::min(n, m))
        throw std::invalid_argument("generate: rank must be in [1, min(n,m)]");
    if (outlier_frac < 0 || outlier_frac > 1 || rho < 0 || rho > 1 || q < 0 || q > 1)
        throw std::invalid_argument("generate: outlier_frac, rho, q must be in [0,1]");

    SplitMix64 rng(seed);
    Matrix f(n, rank), g(rank, m);
    for (Index i = 0; i < n; ++i)
        for (Index r = 0; r < rank; ++r) f(i, r) = rng.next_double();
    for (Index r = 0; r < rank; ++r)
        for (Index j = 0; j < m; ++j) g(r, j) = rng.next_double();
    Matrix low = f * g;
    double peak = low.maxCoeff();
    if (peak > 0) low *= 0.95 / peak;

    Matrix m_true = low;
    Index n_outliers = static_cast<Index>(std::floor(outlier_frac * static_cast<double>(n * m)));
    std::vector<Index> cells(static_cast<size_t>(n * m));
    for (size_t c = 0; c < cells.size(); ++c) cells[c] = static_cast<Index>(c);
    rng.shuffle(cells);
    for (Index k = 0; k < n_outliers; ++k) {
        Index cell = cells[static_cast<size_t>(k)];
        m_true(cell / m, cell % m) = 0.5 + 0.5 * rng.next_double();
    }
    m_true = clamp_unit(m_true);

    SyntheticTruth t{m_true, ObservationMatrix(n, m), ObservationMatrix(n, m), q, rho, 0, seed};
    std::vector<std::pair<Index, Index>> ones;
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < m; ++j)
            if (m_true(i, j) > q) {
                t.y.add_positive(i, j);
                ones.emplace_back(i, j);
            }
    t.s = static_cast<Index>(ones.size());

    rng.shuffle(ones);
    Index n_obs = static_cast<Index>(std::floor(rho * static_cast<double>(t.s) + 0.5));
    for (Index k = 0; k < n_obs; ++k) t.a.add_positive(ones[static_cast<size_t>(k)].first,
                                                       ones[static_cast<size_t>(k)].second);
    return t;
}

/// Thresholded cost-sensitive 0-1 error against the observed matrix A:
/// alpha * #(A=1, X<=q) + #(A=0, X>q).
inline double thresholded_loss(const Matrix& x, const SyntheticTruth& truth, double alpha) {
    if (x.rows() != truth.a.rows() || x.cols() != truth.a.cols())
        throw DimensionError("thresholded_loss: dimension mismatch");
    double loss = 0.0;
    for (Index i = 0; i < x.rows(); ++i) {
        for (Index j = 0; j < x.cols(); ++j) {
            if (truth.a.is_positive(i, j)) {
                if (x(i, j) <= truth.q) loss += alpha;
            } else {
                if (x(i, j) > truth.q) loss += 1.0;
            }
        }
    }
    return loss;
}

/// Independent oracle for the nuclear-norm prox: minimize
/// (1/2 eta) ||U - U_hat||_F^2 + lambda1 ||U||_* by subgradient descent with
/// a decaying step. Small matrices only; this is a test-time routine.
inline Matrix brute_force_prox_u(const Matrix& u_hat, double eta, double lambda1,
                                 Index iterations = 1000000) {
    if (u_hat.rows() > 3 || u_hat.cols() > 3)
        throw std::invalid_argument("brute_force_prox_u: small matrices only");
    if (lambda1 == 0.0) return u_hat;
    Matrix u = u_hat;
    Matrix best = u;
    auto objective = [&](const Matrix& cand) {
        return (cand - u_hat).squaredNorm() / (2.0 * eta) + lambda1 * nuclear_norm(cand);
    };
    double best_obj = objective(best);
    // Strong convexity modulus is 1/eta, so step eta/(k+1) is the classical
    // schedule for strongly convex subgradient descent.
    for (Index k = 0; k < iterations; ++k) {
        SvdResult d = svd(u);
        Matrix subgrad_nuc = d.left * d.right.transpose();
        Matrix grad = (u - u_hat) / eta + lambda1 * subgrad_nuc;
        double step = eta / static_cast<double>(k + 1);
        u -= step * grad;
        double obj = objective(u);
        if (obj < best_obj) {
            best_obj = obj;
            best = u;
        }
    }
    return best;
}

}  // namespace csrr
