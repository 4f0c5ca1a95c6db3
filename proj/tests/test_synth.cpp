#include <doctest.h>

#include "csrr/solver_nnm.hpp"
#include "csrr/synth.hpp"
#include "test_helpers.hpp"

using namespace csrr;

TEST_CASE("generate: rank structure without outliers") {
    SyntheticTruth t = generate(8, 6, 1, 0.0, 0.5, 1.0, 3);
    Eigen::VectorXd sv = svd(t.m_true).singular;
    for (Index i = 1; i < sv.size(); ++i) CHECK(sv(i) <= 1e-10);
    CHECK(t.m_true.minCoeff() >= 0.0);
    CHECK(t.m_true.maxCoeff() <= 1.0);
}

TEST_CASE("generate: thresholding and sampling arithmetic") {
    SyntheticTruth t = generate(10, 8, 2, 0.05, 0.5, 0.5, 17);
    // Y = I(M > q) exactly
    Index ones = 0;
    for (Index i = 0; i < 10; ++i)
        for (Index j = 0; j < 8; ++j) {
            bool expected = t.m_true(i, j) > t.q;
            CHECK(t.y.is_positive(i, j) == expected);
            if (expected) ++ones;
        }
    CHECK(t.s == ones);
    CHECK(t.a.positive_count() ==
          static_cast<Index>(std::floor(0.5 * static_cast<double>(t.s) + 0.5)));
    // A subset of Y
    for (auto [i, j] : t.a.positives()) CHECK(t.y.is_positive(i, j));
}

TEST_CASE("generate: rho = 1 observes every positive") {
    SyntheticTruth t = generate(6, 6, 2, 0.0, 0.5, 1.0, 5);
    CHECK(t.a.positive_count() == t.s);
}

TEST_CASE("generate is deterministic per seed") {
    SyntheticTruth t1 = generate(7, 5, 2, 0.1, 0.5, 0.6, 99);
    SyntheticTruth t2 = generate(7, 5, 2, 0.1, 0.5, 0.6, 99);
    CHECK(t1.m_true == t2.m_true);
    CHECK(t1.a.positives() == t2.a.positives());
    SyntheticTruth t3 = generate(7, 5, 2, 0.1, 0.5, 0.6, 100);
    CHECK(t1.m_true != t3.m_true);
}

TEST_CASE("thresholded loss examples") {
    SyntheticTruth t = generate(1, 2, 1, 0.0, 0.5, 1.0, 1);
    // overwrite with a controlled observation pattern
    t.a = ObservationMatrix(1, 2);
    t.a.add_positive(0, 0);
    t.q = 0.5;

    Matrix x(1, 2);
    x << 0.4, 0.6;  // miss the positive, false-positive the negative
    CHECK(thresholded_loss(x, t, 2.0) == doctest::Approx(3.0));
    CHECK(thresholded_loss(x, t, 1.0) == doctest::Approx(2.0));  // plain 0-1 errors

    Matrix exact(1, 2);
    exact << 1.0, 0.0;
    CHECK(thresholded_loss(exact, t, 2.0) == 0.0);
}

TEST_CASE("cost transformation inequality gamma*X^2 >= I(X > q) at q = 0.5") {
    SplitMix64 rng(31);
    const double q = 0.5, gamma = 4.0;  // 1/q^2 = 1/(1-q)^2 = 4
    for (int trial = 0; trial < 500; ++trial) {
        double x = rng.next_double();
        double ind_fp = x > q ? 1.0 : 0.0;
        double ind_fn = x <= q ? 1.0 : 0.0;
        CHECK(gamma * x * x >= ind_fp);
        CHECK(gamma * (x - 1.0) * (x - 1.0) >= ind_fn);
    }
}

TEST_CASE("brute-force prox oracle trivial cases") {
    SplitMix64 rng(41);
    Matrix u_hat = csrr::testing::random_matrix(3, 3, rng);
    CHECK(brute_force_prox_u(u_hat, 1.0, 0.0) == u_hat);
    Matrix zero = Matrix::Zero(2, 2);
    CHECK(brute_force_prox_u(zero, 1.0, 0.5).norm() <= 1e-9);
    CHECK_THROWS_AS(brute_force_prox_u(Matrix::Zero(4, 4), 1.0, 0.5), std::invalid_argument);
}

TEST_CASE("size trend of the per-entry thresholded cost") {
    // larger instances achieve no worse per-entry cost, 3-seed mean
    auto mean_per_entry = [&](Index n, Index m) {
        double total = 0;
        for (uint64_t seed : {1ULL, 2ULL, 3ULL}) {
            SyntheticTruth t = generate(n, m, 2, 0.02, 0.5, 0.5, seed);
            SolverConfig cfg;
            cfg.eta = 0.2;
            cfg.lambda1 = 0.05;
            cfg.lambda2 = 0.05;
            cfg.max_iters = 60;
            cfg.cost = CostModel::from_alpha(LossVariant::TypeI, 3.0);
            NnmState s = fit(t.a, cfg);
            total += thresholded_loss(predict(s), t, 3.0) / static_cast<double>(n * m);
        }
        return total / 3.0;
    };
    CHECK(mean_per_entry(40, 32) <= mean_per_entry(20, 16) + 1e-12);
}
