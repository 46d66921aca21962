#include "pil/error.hpp"
#include "pil/numerics.hpp"

#include <doctest.h>

#include <cmath>

using namespace pil;

namespace {

// Taylor series after scaling by 2^-s, then s squarings. Written here so the
// check does not lean on the library's own matrix exponential.
Mat taylor_expm(const Mat& A) {
    const int s = 12;
    const Mat B = A / std::pow(2.0, s);
    Mat term = Mat::Identity(A.rows(), A.cols()), sum = term;
    for (int k = 1; k < 30; ++k) {
        term = term * B / k;
        sum += term;
    }
    for (int i = 0; i < s; ++i) sum = sum * sum;
    return sum;
}

} // namespace

TEST_CASE("rk4 keeps a planar rotation on the unit circle") {
    const double w = 1.7;
    const Field f = [w](const Vec& x) {
        Vec d(2);
        d << -w * x[1], w * x[0];
        return d;
    };
    Vec x0(2);
    x0 << 1.0, 0.0;
    const auto tr = integrate_rk4(f, x0, 0.01, 1000);
    for (const auto& s : tr.states) CHECK(std::abs(s.norm() - 1.0) < 1e-8);
}

TEST_CASE("rk4 scalar decay reaches exp(-1)") {
    const Field f = [](const Vec& x) { return Vec(-x); };
    const auto tr = integrate_rk4(f, Vec::Constant(1, 1.0), 0.01, 100);
    CHECK(std::abs(tr.states.back()[0] - std::exp(-1.0)) < 1e-6);
}

TEST_CASE("rk4 on a linear system matches a matrix exponential oracle") {
    Mat A(2, 2);
    A << -0.3, 1.2, -0.8, 0.1;
    const Field f = [&A](const Vec& x) { return Vec(A * x); };
    Vec x0(2);
    x0 << 0.4, -1.1;
    const auto tr = integrate_rk4(f, x0, 0.001, 1000);
    const Vec want = taylor_expm(A) * x0;
    CHECK((tr.states.back() - want).norm() < 1e-6);
    CHECK((expm(A) - taylor_expm(A)).norm() < 1e-10);
}

TEST_CASE("Euler-Maruyama without noise is explicit Euler, bit for bit") {
    const Field f = [](const Vec& x) {
        Vec d(2);
        d << std::sin(x[1]) - x[0], x[0] * x[0] - 0.5 * x[1];
        return d;
    };
    Vec x(2);
    x << 0.3, -0.2;
    SeededRng rng(3);
    const auto tr = integrate_em(f, Vec::Zero(2), x, 0.01, 200, rng);
    for (int k = 0; k < 200; ++k) x = x + f(x) * 0.01;
    CHECK(tr.states.back()[0] == x[0]);
    CHECK(tr.states.back()[1] == x[1]);
}

TEST_CASE("Ornstein-Uhlenbeck stationary variance is D / theta") {
    const double theta = 1.0, D = 0.5;
    const Field f = [theta](const Vec& x) { return Vec(-theta * x); };
    SeededRng rng(11);
    const auto tr = integrate_em(f, Vec::Constant(1, std::sqrt(2.0 * D)), Vec::Zero(1), 0.01, 1000000, rng, 10);
    std::vector<double> xs;
    for (std::size_t i = 1000; i < tr.size(); ++i) xs.push_back(tr.states[i][0]);
    CHECK(std::abs(variance(xs) - D / theta) < 0.05 * D / theta);
}

TEST_CASE("a high double-well barrier keeps trajectories in their basin") {
    // U = p^4 - 4 p^2, barrier 4 against kT = 0.25: Kramers time ~ 1e6.
    const double a = 1.0, b = 4.0, kT = 0.25;
    const Field f = [=](const Vec& p) { return Vec::Constant(1, -(4 * a * p[0] * p[0] * p[0] - 2 * b * p[0])); };
    SeededRng rng(5);
    long escaped = 0, total = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const auto tr = integrate_em(f, Vec::Constant(1, std::sqrt(2 * kT)), Vec::Constant(1, -std::sqrt(b / (2 * a))),
                                     1e-3, 20000, rng, 100);
        for (const auto& s : tr.states) {
            escaped += s[0] > 0.0;
            ++total;
        }
    }
    CHECK(static_cast<double>(escaped) / total < 0.01);
}

TEST_CASE("ridge regression") {
    SeededRng rng(2);
    Mat X(20, 5);
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 5; ++j) X(i, j) = rng.gaussian();
    Vec w0(5);
    w0 << 1, -2, 0.5, 3, -1;

    SUBCASE("targets in the column span are fit exactly") {
        const Vec w = ridge_fit(X, X * w0, 0.0);
        CHECK((X * w - X * w0).norm() < 1e-8);
    }
    SUBCASE("huge regularizer shrinks the weights to zero") {
        CHECK(ridge_fit(X, X * w0, 1e9).norm() < 1e-6);
    }
    SUBCASE("matches an independent LU solve of the normal equations") {
        Vec y(20);
        for (int i = 0; i < 20; ++i) y[i] = rng.gaussian();
        const Mat G = X.transpose() * X + 0.3 * Mat::Identity(5, 5);
        const Vec want = G.fullPivLu().solve(X.transpose() * y);
        CHECK((ridge_fit(X, y, 0.3) - want).norm() < 1e-8);
    }
}

TEST_CASE("spectral radius rescaling") {
    SUBCASE("identity") {
        const Mat W = rescale_spectral_radius(Mat::Identity(4, 4), 0.9, 1e-10);
        CHECK((W - 0.9 * Mat::Identity(4, 4)).norm() < 1e-9);
    }
    SUBCASE("nilpotent matrix has no radius to rescale") {
        Mat W(2, 2);
        W << 0, 2, 0, 0;
        CHECK_THROWS_AS(rescale_spectral_radius(W, 1.0, 1e-8), Error);
    }
    SUBCASE("random dense matrix against a norm-growth oracle") {
        SeededRng rng(9);
        Mat W(50, 50);
        for (int i = 0; i < 50; ++i)
            for (int j = 0; j < 50; ++j) W(i, j) = rng.gaussian();
        const Mat S = rescale_spectral_radius(W, 1.0, 1e-6);
        // log |S^k| grows like k log rho; difference the growth between
        // k = 2^(m-1) and 2^m with renormalised repeated squaring.
        Mat P = S;
        double logn = 0.0, prev = 0.0;
        const int m = 12;
        for (int i = 0; i < m; ++i) {
            P = P * P;
            logn *= 2.0;
            const double n = P.norm();
            P /= n;
            logn += std::log(n);
            if (i == m - 2) prev = logn;
        }
        const double rho = std::exp((logn - prev) / std::pow(2.0, m - 1));
        CHECK(std::abs(rho - 1.0) < 1e-3);
    }
}

TEST_CASE("seeded streams are reproducible and independent") {
    SeededRng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    SeededRng c = SeededRng(42).derive(1), d = SeededRng(42).derive(2);
    CHECK(c.next_u64() != d.next_u64());
    CHECK(SeededRng(42).derive(1).uniform() == SeededRng(42).derive(1).uniform());
}

TEST_CASE("grids") {
    const auto l = linspace(0.1, 1.8, 20);
    REQUIRE(l.size() == 20);
    CHECK(l.front() == 0.1);
    CHECK(l.back() == 1.8);
    const auto g = logspace(1e-3, 10.0, 10);
    CHECK(g.front() == doctest::Approx(1e-3));
    CHECK(g.back() == doctest::Approx(10.0));
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] / g[i - 1] == doctest::Approx(std::pow(1e4, 1.0 / 9)));
}
