#pragma once

#include <cmath>

#include "csrr/losses.hpp"
#include "csrr/matrix.hpp"
#include "csrr/prox.hpp"
#include "csrr/rng.hpp"
#include "csrr/solver_nnm.hpp"

namespace csrr {

struct BfConfig {
    SolverConfig base;
    Index latent_dim = 10;
    Index inner_max_iters = 50;
    double inner_rel_tol = 1e-4;
};

/// Bilinear factorization state: U is represented as P^T Q with inner
/// dimension d, so rank(P^T Q) <= d by construction.
struct BfState {
    Matrix p;  // d x n, entries in [0, 1/sqrt(d)]
    Matrix q;  // d x m, entries in [0, 1/sqrt(d)]
    Matrix v;  // n x m, entries in [0, 1]
    Index iter = 0;
    double objective = 0.0;
};

inline Matrix predict_bf(const BfState& s) { return s.p.transpose() * s.q + s.v; }

inline double bf_objective(const BfState& s, const ObservationMatrix& a, const BfConfig& cfg) {
    return total_loss(predict_bf(s), a, cfg.base.cost) +
           0.5 * cfg.base.lambda1 * (s.p.squaredNorm() + s.q.squaredNorm()) +
           cfg.base.lambda2 * s.v.cwiseAbs().sum();
}

inline BfState bf_initial_state(const ObservationMatrix& a, const BfConfig& cfg) {
    if (cfg.latent_dim < 1 || cfg.latent_dim > std::min(a.rows(), a.cols()))
        throw std::invalid_argument("latent_dim must be in [1, min(n,m)]");
    double box = 1.0 / std::sqrt(static_cast<double>(cfg.latent_dim));
    SplitMix64 rng(cfg.base.seed);
    BfState s;
    s.p = Matrix(cfg.latent_dim, a.rows());
    s.q = Matrix(cfg.latent_dim, a.cols());
    for (Index i = 0; i < s.p.rows(); ++i)
        for (Index j = 0; j < s.p.cols(); ++j) s.p(i, j) = box * rng.next_double();
    for (Index i = 0; i < s.q.rows(); ++i)
        for (Index j = 0; j < s.q.cols(); ++j) s.q(i, j) = box * rng.next_double();
    s.v = Matrix::Zero(a.rows(), a.cols());
    s.iter = 0;
    s.objective = bf_objective(s, a, cfg);
    return s;
}

/// Proximal gradient matrices of P and Q, given the entry-wise subgradient
/// G at X^t: P_hat = P - eta * Q G^T, Q_hat = Q - eta * P G.
inline std::pair<Matrix, Matrix> pq_gradients(const BfState& s, const Matrix& g,
                                              const BfConfig& cfg) {
    double eta = cfg.base.eta;
    return {s.p - eta * (s.q * g.transpose()), s.q - eta * (s.p * g)};
}

inline std::pair<Matrix, Matrix> pq_gradients(const BfState& s, const ObservationMatrix& a,
                                              const BfConfig& cfg) {
    return pq_gradients(s, subgrad_matrix(predict_bf(s), a, cfg.base.cost), cfg);
}

inline Matrix clamp_box(const Matrix& m, double hi) {
    return m.cwiseMax(0.0).cwiseMin(hi);
}

/// Alternate the closed-form P/Q updates until the (P,Q) change is small.
/// The subgradient G is evaluated once at X^t and held fixed inside, and the
/// proximal anchor stays at (P^t, Q^t); only the coupling partner in the
/// gradient term is refreshed, so the alternation contracts to the proximal
/// point instead of drifting.
inline BfState inner_solve(const BfState& state, const ObservationMatrix& a,
                           const BfConfig& cfg) {
    double box = 1.0 / std::sqrt(static_cast<double>(cfg.latent_dim));
    double shrink = 1.0 / (1.0 + cfg.base.eta * cfg.base.lambda1);
    Matrix g = subgrad_matrix(predict_bf(state), a, cfg.base.cost);

    BfState s = state;
    for (Index k = 0; k < cfg.inner_max_iters; ++k) {
        double norm_before = s.p.norm() + s.q.norm();
        Matrix p_hat = state.p - cfg.base.eta * (s.q * g.transpose());
        s.p = clamp_box(shrink * p_hat, box);
        Matrix q_hat = state.q - cfg.base.eta * (s.p * g);
        s.q = clamp_box(shrink * q_hat, box);
        if (!s.p.allFinite() || !s.q.allFinite())
            throw DivergenceError("inner_solve diverged");
        double norm_after = s.p.norm() + s.q.norm();
        double rel = std::abs(norm_after - norm_before) / std::max(1.0, norm_before);
        if (rel < cfg.inner_rel_tol) break;
    }
    return s;
}

/// One outer iteration: inner P/Q alternation, then the V prox step with
/// box projection.
inline BfState bf_iterate(const BfState& state, const ObservationMatrix& a,
                          const BfConfig& cfg) {
    BfState s = inner_solve(state, a, cfg);
    if (cfg.base.disable_v) {
        s.v = Matrix::Zero(a.rows(), a.cols());
    } else {
        Matrix g = subgrad_matrix(predict_bf(state), a, cfg.base.cost);
        s.v = clamp_unit(prox_l1(state.v - cfg.base.eta * g, cfg.base.eta * cfg.base.lambda2));
    }
    s.iter = state.iter + 1;
    s.objective = bf_objective(s, a, cfg);
    if (!std::isfinite(s.objective))
        throw DivergenceError("solver diverged (non-finite objective)");
    return s;
}

inline BfState fit_bf(const ObservationMatrix& a, const BfConfig& cfg) {
    cfg.base.validate();
    BfState s = bf_initial_state(a, cfg);
    for (Index t = 0; t < cfg.base.max_iters; ++t) {
        double prev = s.objective;
        s = bf_iterate(s, a, cfg);
        if (total_loss(predict_bf(s), a, cfg.base.cost) == 0.0) break;
        double rel = std::abs(s.objective - prev) / std::max(1.0, std::abs(prev));
        if (rel < cfg.base.rel_tol) break;
    }
    return s;
}

}  // namespace csrr
