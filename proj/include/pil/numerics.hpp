#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace pil {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Field = std::function<Vec(const Vec&)>;

struct Trajectory {
    double dt = 0.0;
    std::vector<double> times;
    std::vector<Vec> states;

    std::size_t size() const { return states.size(); }
    int dim() const { return states.empty() ? 0 : static_cast<int>(states.front().size()); }
};

// Deterministic across platforms: mt19937_64 is bit-specified by the standard,
// and we convert to doubles ourselves instead of relying on <random>
// distributions (whose algorithms are implementation-defined).
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    // Independent child stream; same (seed, stream, id) gives the same child.
    SeededRng derive(std::uint64_t id) const;

    std::uint64_t next_u64() { return eng_(); }
    // 53-bit uniform in [0, 1).
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);
    // Standard normal via the Box-Muller transform; the second variate of each
    // pair is cached and returned by the next call.
    double gaussian();
    Vec gaussian_vec(int n);

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

// Classical RK4. `record_every` thins the stored states (the final state is
// always stored).
Trajectory integrate_rk4(const Field& field, const Vec& x0, double dt, long steps,
                         long record_every = 1);

// Euler-Maruyama: x' = x + f(x) dt + g * sqrt(dt) * N(0, I), g per coordinate.
Trajectory integrate_em(const Field& drift, const Vec& diffusion, const Vec& x0, double dt,
                        long steps, SeededRng& rng, long record_every = 1);

// argmin |Xw - y|^2 + reg |w|^2 via normal equations.
Vec ridge_fit(const Mat& features, const Vec& targets, double regularizer);

// Spectral radius by block power iteration (Rayleigh-Ritz on a two-vector
// Krylov window, so complex-conjugate dominant pairs converge too).
double spectral_radius(const Mat& W, double rel_tol, int max_iter = 10000);

Mat rescale_spectral_radius(const Mat& W, double target, double tol);

Mat expm(const Mat& A);

bool all_finite(const Vec& v);

double mean(const std::vector<double>& v);
double variance(const std::vector<double>& v); // unbiased
double pearson(const Vec& a, const Vec& b);

std::vector<double> linspace(double lo, double hi, int n);
std::vector<double> logspace(double lo, double hi, int n);

} // namespace pil
