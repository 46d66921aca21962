#include "pil/numerics.hpp"

#include "pil/error.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <string>

namespace pil {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

SeededRng::SeededRng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream) {
    // Mix seed and stream so nearby pairs give unrelated engines.
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(splitmix64(stream)),
                      static_cast<std::uint32_t>(splitmix64(stream) >> 32)};
    eng_.seed(seq);
}

SeededRng SeededRng::derive(std::uint64_t id) const {
    return SeededRng(seed_, splitmix64(stream_ ^ splitmix64(id + 1)));
}

double SeededRng::uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
}

std::uint64_t SeededRng::below(std::uint64_t n) {
    // Rejection keeps the draw exactly uniform.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t r;
    do {
        r = eng_();
    } while (r >= limit);
    return r % n;
}

double SeededRng::gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * M_PI * u2;
    spare_ = r * std::sin(phi);
    has_spare_ = true;
    return r * std::cos(phi);
}

Vec SeededRng::gaussian_vec(int n) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = gaussian();
    return v;
}

bool all_finite(const Vec& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (!std::isfinite(v[i])) return false;
    return true;
}

namespace {

void check_step_args(double dt, long steps) {
    if (!(dt > 0.0)) fail(ErrorKind::InvalidConfig, "dt must be positive");
    if (steps < 1) fail(ErrorKind::InvalidConfig, "steps must be at least 1");
}

void record(Trajectory& tr, long k, double dt, const Vec& x) {
    tr.times.push_back(static_cast<double>(k) * dt);
    tr.states.push_back(x);
}

} // namespace

Trajectory integrate_rk4(const Field& field, const Vec& x0, double dt, long steps,
                         long record_every) {
    check_step_args(dt, steps);
    record_every = std::max(1L, record_every);
    Trajectory tr;
    tr.dt = dt * static_cast<double>(record_every);
    Vec x = x0;
    record(tr, 0, dt, x);
    for (long k = 1; k <= steps; ++k) {
        const Vec k1 = field(x);
        const Vec k2 = field(x + 0.5 * dt * k1);
        const Vec k3 = field(x + 0.5 * dt * k2);
        const Vec k4 = field(x + dt * k3);
        x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!all_finite(x))
            throw DivergedError(k, "rk4 diverged at step " + std::to_string(k));
        if (k % record_every == 0 || k == steps) record(tr, k, dt, x);
    }
    return tr;
}

Trajectory integrate_em(const Field& drift, const Vec& diffusion, const Vec& x0, double dt,
                        long steps, SeededRng& rng, long record_every) {
    check_step_args(dt, steps);
    if (diffusion.size() != x0.size())
        fail(ErrorKind::InvalidConfig, "diffusion must have one entry per coordinate");
    if ((diffusion.array() < 0.0).any())
        fail(ErrorKind::InvalidConfig, "diffusion must be nonnegative");
    record_every = std::max(1L, record_every);
    const bool noisy = (diffusion.array() > 0.0).any();
    const double sq = std::sqrt(dt);
    Trajectory tr;
    tr.dt = dt * static_cast<double>(record_every);
    Vec x = x0;
    record(tr, 0, dt, x);
    for (long k = 1; k <= steps; ++k) {
        Vec next = x + dt * drift(x);
        if (noisy) {
            for (Eigen::Index i = 0; i < x.size(); ++i)
                next[i] += diffusion[i] * sq * rng.gaussian();
        }
        x = std::move(next);
        if (!all_finite(x))
            throw DivergedError(k, "euler-maruyama diverged at step " + std::to_string(k));
        if (k % record_every == 0 || k == steps) record(tr, k, dt, x);
    }
    return tr;
}

Vec ridge_fit(const Mat& features, const Vec& targets, double regularizer) {
    if (features.rows() < 1 || features.rows() != targets.size())
        fail(ErrorKind::InvalidConfig, "ridge_fit: features/targets shape mismatch");
    if (regularizer < 0.0) fail(ErrorKind::InvalidConfig, "ridge_fit: negative regularizer");
    const Eigen::Index n = features.cols();
    Mat A = features.transpose() * features;
    A.diagonal().array() += regularizer;
    const Vec rhs = features.transpose() * targets;
    Eigen::LDLT<Mat> ldlt(A);
    const double scale = std::max(A.diagonal().cwiseAbs().maxCoeff(), 1e-300);
    if (n == 0 || ldlt.info() != Eigen::Success ||
        ldlt.vectorD().cwiseAbs().minCoeff() <= 1e-13 * scale)
        fail(ErrorKind::SingularMatrix, "ridge_fit: normal equations are singular");
    return ldlt.solve(rhs);
}

namespace {

double max_modulus_2x2(const Eigen::Matrix2d& H) {
    const double tr = H.trace();
    const double det = H.determinant();
    const std::complex<double> disc = std::sqrt(std::complex<double>(tr * tr / 4.0 - det, 0.0));
    const std::complex<double> l1 = tr / 2.0 + disc;
    const std::complex<double> l2 = tr / 2.0 - disc;
    return std::max(std::abs(l1), std::abs(l2));
}

} // namespace

double spectral_radius(const Mat& W, double rel_tol, int max_iter) {
    if (W.rows() != W.cols() || W.rows() == 0)
        fail(ErrorKind::InvalidConfig, "spectral_radius: matrix must be square and nonempty");
    const Eigen::Index n = W.rows();
    // Deterministic start with no special alignment to common structures.
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = 1.0 + 0.5 * std::sin(1.7 * static_cast<double>(i) + 0.3);
    v.normalize();
    const double wnorm = std::max(W.cwiseAbs().maxCoeff(), 1e-300);

    double prev = -1.0;
    int stable = 0;
    for (int it = 0; it < max_iter; ++it) {
        const Vec w1 = W * v;
        const double n1 = w1.norm();
        if (n1 <= 1e-280 * wnorm) fail(ErrorKind::NoConvergence, "spectral radius is zero");
        const Vec q1 = w1 / n1;
        const Vec Wq1 = W * q1;
        Vec r = Wq1 - q1.dot(Wq1) * q1;
        const double rn = r.norm();
        double est;
        if (rn <= 1e-12 * std::max(Wq1.norm(), 1e-300)) {
            est = std::abs(q1.dot(Wq1));
        } else {
            const Vec q2 = r / rn;
            const Vec Wq2 = W * q2;
            Eigen::Matrix2d H;
            H << q1.dot(Wq1), q1.dot(Wq2), q2.dot(Wq1), q2.dot(Wq2);
            est = max_modulus_2x2(H);
        }
        if (est <= 1e-280 * wnorm) fail(ErrorKind::NoConvergence, "spectral radius is zero");
        const double wq1n = Wq1.norm();
        if (wq1n <= 1e-280 * wnorm) fail(ErrorKind::NoConvergence, "spectral radius is zero");
        v = Wq1 / wq1n;
        if (prev > 0.0 && std::abs(est - prev) < rel_tol * est) {
            if (++stable >= 3) return est;
        } else {
            stable = 0;
        }
        prev = est;
    }
    fail(ErrorKind::NoConvergence, "power iteration did not converge in " +
                                        std::to_string(max_iter) + " iterations");
}

Mat rescale_spectral_radius(const Mat& W, double target, double tol) {
    if (!(target > 0.0) || !(tol > 0.0))
        fail(ErrorKind::InvalidConfig, "rescale_spectral_radius: target and tol must be positive");
    const double rho = spectral_radius(W, 1e-2 * tol / target);
    return (target / rho) * W;
}

Mat expm(const Mat& A) { return A.exp(); }

double mean(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

double pearson(const Vec& a, const Vec& b) {
    const Vec da = a.array() - a.mean();
    const Vec db = b.array() - b.mean();
    const double d = std::sqrt(da.squaredNorm() * db.squaredNorm());
    return d > 0.0 ? da.dot(db) / d : 0.0;
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> out;
    if (n <= 0) return out;
    if (n == 1) return {lo};
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        out.push_back(i == n - 1 ? hi : lo + (hi - lo) * static_cast<double>(i) / (n - 1));
    return out;
}

std::vector<double> logspace(double lo, double hi, int n) {
    std::vector<double> out = linspace(std::log10(lo), std::log10(hi), n);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::pow(10.0, out[i]);
    if (!out.empty()) {
        out.front() = lo;
        out.back() = hi;
    }
    return out;
}

} // namespace pil
