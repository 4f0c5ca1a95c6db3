#pragma once

#include <cmath>
#include <stdexcept>

#include "csrr/losses.hpp"
#include "csrr/matrix.hpp"
#include "csrr/prox.hpp"

namespace csrr {

struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SolverConfig {
    double eta = 0.1;
    double lambda1 = 0.1;
    double lambda2 = 0.1;
    Index max_iters = 200;
    double rel_tol = 1e-5;
    uint64_t seed = 0;
    CostModel cost;
    bool disable_v = false;  // ablation: hold V = 0 throughout

    void validate() const {
        if (eta <= 0 || rel_tol <= 0 || lambda1 < 0 || lambda2 < 0 || max_iters < 1)
            throw std::invalid_argument("SolverConfig: eta, rel_tol > 0; lambdas >= 0; max_iters >= 1");
    }
};

/// Accelerated proximal gradient state for the nuclear-norm solver.
struct NnmState {
    Matrix u, v;                // projected iterates, entries in [0,1]
    Matrix u_tilde, v_tilde;    // prox outputs before momentum/projection
    double tau = 1.0;
    Index iter = 0;
    double objective = 0.0;
};

inline Matrix predict(const NnmState& s) { return s.u + s.v; }

inline double nnm_objective(const NnmState& s, const ObservationMatrix& a,
                            const SolverConfig& cfg) {
    return total_loss(s.u + s.v, a, cfg.cost) + cfg.lambda1 * nuclear_norm(s.u) +
           cfg.lambda2 * s.v.cwiseAbs().sum();
}

inline NnmState nnm_initial_state(const ObservationMatrix& a, const SolverConfig& cfg) {
    NnmState s;
    s.u = Matrix::Zero(a.rows(), a.cols());
    s.v = s.u;
    s.u_tilde = s.u;
    s.v_tilde = s.u;
    s.tau = 1.0;
    s.iter = 0;
    s.objective = nnm_objective(s, a, cfg);
    return s;
}

/// One gradient step at X = U + V. The same entry-wise subgradient G is
/// applied to both components, since dX/dU = dX/dV = 1.
inline std::pair<Matrix, Matrix> gradient_step(const NnmState& s, const ObservationMatrix& a,
                                               const SolverConfig& cfg) {
    Matrix g = subgrad_matrix(s.u + s.v, a, cfg.cost);
    return {s.u - cfg.eta * g, s.v - cfg.eta * g};
}

/// One full APGL iteration: gradient step, SVT / soft-threshold prox,
/// momentum extrapolation, box projection onto [0,1].
inline NnmState apgl_iterate(const NnmState& s, const ObservationMatrix& a,
                             const SolverConfig& cfg) {
    auto [u_hat, v_hat] = gradient_step(s, a, cfg);

    NnmState next;
    next.u_tilde = svt(u_hat, cfg.eta * cfg.lambda1);
    next.v_tilde = cfg.disable_v ? Matrix::Zero(a.rows(), a.cols())
                                 : prox_l1(v_hat, cfg.eta * cfg.lambda2);

    double tau_next = (1.0 + std::sqrt(1.0 + 4.0 * s.tau * s.tau)) / 2.0;
    double momentum = (s.tau - 1.0) / tau_next;
    next.u = clamp_unit(next.u_tilde + momentum * (next.u_tilde - s.u_tilde));
    next.v = clamp_unit(next.v_tilde + momentum * (next.v_tilde - s.v_tilde));
    next.tau = tau_next;
    next.iter = s.iter + 1;
    next.objective = nnm_objective(next, a, cfg);
    if (!std::isfinite(next.objective))
        throw DivergenceError("solver diverged (non-finite objective); eta may be too large");
    return next;
}

/// Run APGL until the relative objective change drops below rel_tol or the
/// iteration budget is exhausted. Deterministic given the configuration.
inline NnmState fit(const ObservationMatrix& a, const SolverConfig& cfg) {
    cfg.validate();
    NnmState s = nnm_initial_state(a, cfg);
    for (Index t = 0; t < cfg.max_iters; ++t) {
        double prev = s.objective;
        s = apgl_iterate(s, a, cfg);
        if (total_loss(s.u + s.v, a, cfg.cost) == 0.0) break;  // mistake-driven halt
        double rel = std::abs(s.objective - prev) / std::max(1.0, std::abs(prev));
        if (rel < cfg.rel_tol) break;
    }
    return s;
}

}  // namespace csrr
