#include "pil/error.hpp"
#include "pil/metriplectic.hpp"

#include <doctest.h>

#include <cmath>

using namespace pil;

namespace {

Mat rotation2() {
    Mat J(2, 2);
    J << 0, -1, 1, 0;
    return J;
}

MetriplecticSystem planar(Mat J, Mat R, Mat QXi, double lambda) {
    return make_system(std::move(J), std::move(R), Mat::Identity(2, 2), std::move(QXi), lambda, Mat::Zero(2, 1), 0.0);
}

} // namespace

TEST_CASE("degeneracy check") {
    SeededRng rng(1);
    SUBCASE("harmonic system has no dissipative sector") {
        const auto sys = planar(rotation2(), Mat::Zero(2, 2), Mat::Zero(2, 2), 0.5);
        const auto rep = check_degeneracy(sys, 50, 1e-12, rng);
        CHECK(rep.pass);
        CHECK(rep.max_j_gradxi == 0.0);
        CHECK(rep.max_r_gradh == 0.0);
    }
    SUBCASE("disjoint blocks") {
        Mat J = Mat::Zero(4, 4), R = Mat::Zero(4, 4), QH = Mat::Zero(4, 4), QXi = Mat::Zero(4, 4);
        J.block(0, 0, 2, 2) = rotation2();
        QH.block(0, 0, 2, 2) = Mat::Identity(2, 2);
        R.block(2, 2, 2, 2) = Mat::Identity(2, 2);
        QXi.block(2, 2, 2, 2) = Mat::Identity(2, 2);
        const auto sys = make_system(J, R, QH, QXi, 1.0, Mat::Zero(4, 1), 0.0);
        CHECK(check_degeneracy(sys, 50, 1e-12, rng).pass);
    }
    SUBCASE("rotation and isotropic entropy on the same coordinates") {
        const auto sys = planar(rotation2(), Mat::Identity(2, 2), Mat::Identity(2, 2), 1.0);
        const auto rep = check_degeneracy(sys, 20, 1e-6, rng);
        CHECK_FALSE(rep.pass);
        // Unit-norm samples: |J x| = |x| = 1.
        CHECK(rep.max_j_gradxi == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("entropy production rate") {
    Vec x(2);
    x << 0.6, 0.8;
    CHECK(entropy_production_rate(planar(rotation2(), Mat::Identity(2, 2), Mat::Identity(2, 2), 0.0), x) == 0.0);
    CHECK(entropy_production_rate(planar(rotation2(), Mat::Identity(2, 2), Mat::Identity(2, 2), 0.37), x) ==
          doctest::Approx(0.37).epsilon(1e-14));
    Mat R = Mat::Zero(2, 2);
    R(0, 0) = 1;
    R(1, 1) = 2;
    Vec ones = Vec::Ones(2);
    CHECK(entropy_production_rate(planar(Mat::Zero(2, 2), R, Mat::Identity(2, 2), 1.0), ones) == doctest::Approx(3.0));
}

TEST_CASE("make_system keeps only the skew part of J and rejects indefinite R") {
    Mat J(2, 2);
    J << 0, 1, 1, 0;
    CHECK(planar(J, Mat::Zero(2, 2), Mat::Zero(2, 2), 0.0).J.norm() == 0.0);
    Mat R(2, 2);
    R << 1, 0, 0, -1;
    CHECK_THROWS_AS(planar(rotation2(), R, Mat::Identity(2, 2), 1.0), Error);
}

TEST_CASE("Euler-Maruyama step") {
    SeededRng rng(4);
    Vec x(2);
    x << 1.0, 0.0;
    const Vec u = Vec::Zero(1);
    SUBCASE("reversible rotation keeps the norm after renormalisation") {
        const auto sys = planar(rotation2(), Mat::Zero(2, 2), Mat::Zero(2, 2), 0.0);
        Vec y = x;
        for (int k = 0; k < 100; ++k) y = step(sys, y, u, 1e-3, rng, true).x;
        CHECK(std::abs(y.norm() - 1.0) < 1e-10);
    }
    SUBCASE("pure dissipation decays as exp(-lambda t)") {
        const auto sys = planar(Mat::Zero(2, 2), Mat::Identity(2, 2), Mat::Identity(2, 2), 1.0);
        Vec y = x;
        for (int k = 0; k < 10000; ++k) y = step(sys, y, u, 1e-4, rng, false).x;
        CHECK(std::abs(y[0] - std::exp(-1.0)) < 1e-4);
    }
    SUBCASE("renormalised state has unit norm") {
        const auto sys = make_system(rotation2(), Mat::Identity(2, 2), Mat::Identity(2, 2), Mat::Identity(2, 2), 2.0,
                                     Mat::Ones(2, 1), 0.1);
        Vec y = x;
        for (int k = 0; k < 50; ++k) {
            y = step(sys, y, Vec::Constant(1, 0.5), 0.01, rng, true).x;
            CHECK(std::abs(y.norm() - 1.0) < 1e-15);
        }
    }
    SUBCASE("flux on the unit sphere is lambda") {
        const auto sys = planar(rotation2(), Mat::Identity(2, 2), Mat::Identity(2, 2), 0.25);
        const auto r = step(sys, x, u, 0.01, rng, true);
        CHECK(r.flux.entropy_production_rate == doctest::Approx(0.25));
    }
}

TEST_CASE("split stepper preserves the reversible norm at any dt") {
    const auto sys = planar(rotation2(), Mat::Zero(2, 2), Mat::Zero(2, 2), 0.0);
    const SplitStepper st(sys, 0.9);
    SeededRng rng(1);
    Vec x(2);
    x << 0.3, 0.4;
    for (int k = 0; k < 1000; ++k) x = st(x, Vec::Zero(1), rng, false).x;
    CHECK(std::abs(x.norm() - 0.5) < 1e-12);
}
