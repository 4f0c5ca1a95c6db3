#include <doctest.h>

#include "csrr/prox.hpp"
#include "csrr/synth.hpp"
#include "test_helpers.hpp"

using namespace csrr;
using csrr::testing::random_matrix;

TEST_CASE("svt shrinks diagonal singular values") {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = 3.0;
    m(1, 1) = 1.0;
    Matrix out = svt(m, 2.0);
    CHECK(out(0, 0) == doctest::Approx(1.0));
    CHECK(out(1, 1) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(std::abs(out(0, 1)) < 1e-12);
}

TEST_CASE("svt with zero threshold is the identity") {
    SplitMix64 rng(1);
    Matrix m = random_matrix(4, 3, rng);
    CHECK((svt(m, 0.0) - m).norm() <= 1e-8);
}

TEST_CASE("svt with a large threshold annihilates the matrix") {
    SplitMix64 rng(2);
    Matrix m = random_matrix(3, 3, rng);
    double top = svd(m).singular(0);
    CHECK(svt(m, top + 1.0).norm() <= 1e-12);
}

TEST_CASE("svt never increases rank") {
    SplitMix64 rng(9);
    for (int trial = 0; trial < 10; ++trial) {
        Matrix m = random_matrix(5, 4, rng);
        Eigen::VectorXd before = svd(m).singular;
        Eigen::VectorXd after = svd(svt(m, 0.4)).singular;
        int rank_before = (before.array() > 1e-10).count();
        int rank_after = (after.array() > 1e-10).count();
        CHECK(rank_after <= rank_before);
    }
}

TEST_CASE("svt is non-expansive") {
    SplitMix64 rng(17);
    for (double theta : {0.1, 0.5, 1.0}) {
        for (int trial = 0; trial < 20; ++trial) {
            Matrix m1 = random_matrix(4, 4, rng, -2.0, 2.0);
            Matrix m2 = random_matrix(4, 4, rng, -2.0, 2.0);
            CHECK((svt(m1, theta) - svt(m2, theta)).norm() <= (m1 - m2).norm() + 1e-10);
        }
    }
}

TEST_CASE("svt attains the prox objective minimum against random perturbations") {
    SplitMix64 rng(31);
    const double eta = 1.0;
    for (double theta : {0.1, 0.5, 1.0}) {
        Matrix u_hat = random_matrix(3, 3, rng, -1.0, 1.0);
        Matrix star = svt(u_hat, eta * theta);
        auto objective = [&](const Matrix& u) {
            return (u - u_hat).squaredNorm() / (2.0 * eta) + theta * nuclear_norm(u);
        };
        double best = objective(star);
        for (int k = 0; k < 1000; ++k) {
            Matrix perturbed = star + 0.05 * random_matrix(3, 3, rng, -1.0, 1.0);
            CHECK(objective(perturbed) >= best - 1e-10);
        }
    }
}

TEST_CASE("svt agrees with the independent subgradient-descent oracle") {
    SplitMix64 rng(101);
    for (double theta : {0.1, 0.5, 1.0}) {
        for (int trial = 0; trial < 5; ++trial) {
            Matrix u_hat = random_matrix(3, 3, rng, -1.0, 1.0);
            Matrix via_svt = svt(u_hat, theta);
            Matrix via_oracle = brute_force_prox_u(u_hat, 1.0, theta);
            CHECK((via_svt - via_oracle).norm() <= 1e-5);
        }
    }
}

TEST_CASE("soft_threshold examples") {
    CHECK(soft_threshold(0.7, 0.2) == doctest::Approx(0.5));
    CHECK(soft_threshold(-0.7, 0.2) == doctest::Approx(-0.5));
    CHECK(soft_threshold(0.1, 0.2) == 0.0);
    CHECK(soft_threshold(0.0, 0.0) == 0.0);
}

TEST_CASE("soft_threshold minimizes the scalar lasso objective (grid oracle)") {
    SplitMix64 rng(55);
    for (int trial = 0; trial < 200; ++trial) {
        double a = -2.0 + 4.0 * rng.next_double();
        double b = 2.0 * rng.next_double();
        double best_v = 0.0, best_obj = std::numeric_limits<double>::infinity();
        for (double v = -2.5; v <= 2.5; v += 1e-4) {
            double obj = 0.5 * (v - a) * (v - a) + b * std::abs(v);
            if (obj < best_obj) {
                best_obj = obj;
                best_v = v;
            }
        }
        CHECK(std::abs(soft_threshold(a, b) - best_v) <= 2e-4);
    }
}

TEST_CASE("prox_l1 applies soft threshold entry-wise") {
    Matrix m(2, 2);
    m << 0.7, -0.7, 0.1, 0.0;
    Matrix out = prox_l1(m, 0.2);
    CHECK(out(0, 0) == doctest::Approx(0.5));
    CHECK(out(0, 1) == doctest::Approx(-0.5));
    CHECK(out(1, 0) == 0.0);
    CHECK(out(1, 1) == 0.0);

    SplitMix64 rng(77);
    Matrix r = random_matrix(4, 4, rng);
    CHECK(prox_l1(r, 0.0) == r);
    CHECK(prox_l1(r, 1.5).norm() == 0.0);  // all |entries| < 1.5
}
