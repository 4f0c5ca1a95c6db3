#include <doctest.h>

#include "csrr/solver_nnm.hpp"
#include "test_helpers.hpp"

using namespace csrr;

namespace {

SolverConfig basic_config(double alpha = 1.0) {
    SolverConfig cfg;
    cfg.eta = 0.1;
    cfg.lambda1 = 0.01;
    cfg.lambda2 = 0.01;
    cfg.max_iters = 100;
    cfg.rel_tol = 1e-7;
    cfg.cost = CostModel::from_alpha(LossVariant::TypeI, alpha);
    return cfg;
}

ObservationMatrix full_ones(Index n, Index m) {
    ObservationMatrix a(n, m);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < m; ++j) a.add_positive(i, j);
    return a;
}

}  // namespace

TEST_CASE("predict is the entry-wise sum of components") {
    NnmState s;
    s.u = Matrix::Constant(2, 2, 0.3);
    s.v = Matrix::Constant(2, 2, 0.4);
    CHECK(predict(s)(0, 0) == doctest::Approx(0.7));
    s.v.setZero();
    CHECK(predict(s) == s.u);
    s.u.setZero();
    CHECK(predict(s).norm() == 0.0);
}

TEST_CASE("gradient_step hand examples") {
    SolverConfig cfg = basic_config(2.0);
    ObservationMatrix a(1, 1);
    a.add_positive(0, 0);

    NnmState s;
    s.u = Matrix::Constant(1, 1, 0.2);
    s.v = Matrix::Constant(1, 1, 0.3);
    auto [u_hat, v_hat] = gradient_step(s, a, cfg);
    // X = 0.5, G = 2*(0.5-1) = -1
    CHECK(u_hat(0, 0) == doctest::Approx(0.3));
    CHECK(v_hat(0, 0) == doctest::Approx(0.4));

    ObservationMatrix zero(1, 1);
    s.u = Matrix::Constant(1, 1, 0.2);
    s.v = Matrix::Constant(1, 1, 0.2);
    cfg.eta = 0.5;
    auto [u2, v2] = gradient_step(s, zero, cfg);
    CHECK(u2(0, 0) == doctest::Approx(0.0));
    CHECK(v2(0, 0) == doctest::Approx(0.0));
}

TEST_CASE("gradient_step is a no-op at zero loss") {
    SolverConfig cfg = basic_config();
    ObservationMatrix a(2, 2);
    a.add_positive(0, 0);
    NnmState s;
    s.u = a.dense();
    s.v = Matrix::Zero(2, 2);
    auto [u_hat, v_hat] = gradient_step(s, a, cfg);
    CHECK(u_hat == s.u);
    CHECK(v_hat == s.v);
}

TEST_CASE("tau recurrence") {
    SolverConfig cfg = basic_config();
    ObservationMatrix a(2, 2);
    a.add_positive(0, 1);
    NnmState s = nnm_initial_state(a, cfg);
    CHECK(s.tau == 1.0);
    s = apgl_iterate(s, a, cfg);
    CHECK(s.tau == doctest::Approx((1.0 + std::sqrt(5.0)) / 2.0));

    double prev = 1.0;
    NnmState t = nnm_initial_state(a, cfg);
    for (int k = 0; k < 30; ++k) {
        t = apgl_iterate(t, a, cfg);
        CHECK(t.tau > prev);
        CHECK(t.tau >= (static_cast<double>(k) + 2.0) / 2.0);
        prev = t.tau;
    }
}

TEST_CASE("first iteration has no momentum extrapolation") {
    SolverConfig cfg = basic_config();
    ObservationMatrix a(2, 2);
    a.add_positive(1, 0);
    NnmState s0 = nnm_initial_state(a, cfg);
    NnmState s1 = apgl_iterate(s0, a, cfg);
    // (tau0 - 1)/tau1 = 0, so U^1 = clamp(U~^1)
    CHECK(s1.u == clamp_unit(s1.u_tilde));
    CHECK(s1.v == clamp_unit(s1.v_tilde));
}

TEST_CASE("zero loss with zero regularizers is a fixed point") {
    SolverConfig cfg = basic_config();
    cfg.lambda1 = 0.0;
    cfg.lambda2 = 0.0;
    ObservationMatrix a(2, 2);
    a.add_positive(0, 0);
    NnmState s;
    s.u = a.dense();
    s.v = Matrix::Zero(2, 2);
    s.u_tilde = s.u;
    s.v_tilde = s.v;
    s.tau = 1.0;
    NnmState next = apgl_iterate(s, a, cfg);
    CHECK((next.u - s.u).norm() <= 1e-10);
    CHECK((next.v - s.v).norm() <= 1e-10);
    CHECK(next.iter == s.iter + 1);
}

TEST_CASE("fit on an all-zero matrix converges to zero") {
    SolverConfig cfg = basic_config();
    ObservationMatrix a(4, 4);
    NnmState s = fit(a, cfg);
    CHECK(s.u.norm() <= 1e-8);
    CHECK(s.v.norm() <= 1e-8);
}

TEST_CASE("fit recovers a fully observed rank-1 block") {
    SolverConfig cfg = basic_config(1.0);
    cfg.lambda1 = 0.001;
    cfg.lambda2 = 0.1;
    cfg.eta = 0.2;
    cfg.max_iters = 500;
    ObservationMatrix a = full_ones(5, 5);
    NnmState s = fit(a, cfg);
    CHECK((predict(s) - a.dense()).cwiseAbs().maxCoeff() <= 0.1);
}

TEST_CASE("box invariant holds after every iterate") {
    SolverConfig cfg = basic_config(3.0);
    cfg.eta = 0.3;
    ObservationMatrix a(5, 4);
    a.add_positive(0, 0);
    a.add_positive(2, 1);
    a.add_positive(4, 3);
    NnmState s = nnm_initial_state(a, cfg);
    for (int k = 0; k < 40; ++k) {
        s = apgl_iterate(s, a, cfg);
        CHECK(s.u.minCoeff() >= 0.0);
        CHECK(s.u.maxCoeff() <= 1.0);
        CHECK(s.v.minCoeff() >= 0.0);
        CHECK(s.v.maxCoeff() <= 1.0);
    }
}

TEST_CASE("endpoint objective descent") {
    SplitMix64 rng(13);
    for (int trial = 0; trial < 5; ++trial) {
        SolverConfig cfg = basic_config(2.0);
        ObservationMatrix a(6, 5);
        for (Index i = 0; i < 6; ++i)
            for (Index j = 0; j < 5; ++j)
                if (rng.next_double() < 0.3) a.add_positive(i, j);
        NnmState start = nnm_initial_state(a, cfg);
        NnmState end = fit(a, cfg);
        CHECK(end.objective <= start.objective + 1e-12);
    }
}

TEST_CASE("sparsity response to extreme regularizers") {
    ObservationMatrix a(4, 4);
    a.add_positive(0, 0);
    a.add_positive(1, 2);
    a.add_positive(3, 3);

    SolverConfig cfg = basic_config(2.0);
    cfg.lambda2 = 1e3 / cfg.eta;
    NnmState s = fit(a, cfg);
    CHECK(s.v.norm() == 0.0);

    cfg = basic_config(2.0);
    cfg.lambda1 = 1e3 / cfg.eta;
    s = fit(a, cfg);
    CHECK(s.u.norm() == 0.0);
}

TEST_CASE("fit is deterministic") {
    SolverConfig cfg = basic_config(2.0);
    ObservationMatrix a(5, 5);
    a.add_positive(1, 1);
    a.add_positive(2, 4);
    NnmState s1 = fit(a, cfg);
    NnmState s2 = fit(a, cfg);
    CHECK(s1.objective == s2.objective);  // bit-identical
    CHECK(s1.u == s2.u);
}

TEST_CASE("invalid configuration is rejected") {
    SolverConfig cfg = basic_config();
    cfg.eta = 0.0;
    ObservationMatrix a(2, 2);
    a.add_positive(0, 0);
    CHECK_THROWS_AS(fit(a, cfg), std::invalid_argument);
    cfg = basic_config();
    cfg.max_iters = 0;
    CHECK_THROWS_AS(fit(a, cfg), std::invalid_argument);
}

TEST_CASE("ablation flag holds V at zero") {
    SolverConfig cfg = basic_config(2.0);
    cfg.disable_v = true;
    ObservationMatrix a(4, 4);
    a.add_positive(0, 1);
    a.add_positive(2, 2);
    NnmState s = fit(a, cfg);
    CHECK(s.v.norm() == 0.0);
    CHECK(s.u.norm() > 0.0);
}
