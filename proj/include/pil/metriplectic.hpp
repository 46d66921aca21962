#pragma once

#include "pil/numerics.hpp"

namespace pil {

// x' = J QH x - lambda R QXi x + B u + noise * xi.
// H = x'QH x / 2 and Xi = x'QXi x / 2, so gradH = QH x and gradXi = QXi x.
struct MetriplecticSystem {
    int dim = 0;
    Mat J;
    Mat R;
    Mat QH;
    Mat QXi;
    double lambda = 0.0;
    Mat B; // dim x m
    double noise = 0.0;
    double alpha = 1.0;

    Vec grad_h(const Vec& x) const { return QH * x; }
    Vec grad_xi(const Vec& x) const { return QXi * x; }
};

// Validates shapes and positive semidefiniteness of R; J is replaced by its
// antisymmetric part so the reversible sector is exactly skew.
MetriplecticSystem make_system(Mat J, Mat R, Mat QH, Mat QXi, double lambda, Mat B,
                               double noise, double alpha = 1.0);

struct FluxRecord {
    double time = 0.0;
    double entropy_production_rate = 0.0;
    double irr_info_rate = 0.0;
    double work_rate = 0.0;
};

struct DegeneracyReport {
    double max_j_gradxi = 0.0;
    double max_r_gradh = 0.0;
    double tol = 0.0;
    bool pass = false;
};

DegeneracyReport check_degeneracy(const MetriplecticSystem& sys, int samples, double tol,
                                  SeededRng& rng);

double entropy_production_rate(const MetriplecticSystem& sys, const Vec& x);

struct StepResult {
    Vec x;
    FluxRecord flux;
};

// One Euler-Maruyama step; flux is evaluated at the pre-step state.
StepResult step(const MetriplecticSystem& sys, const Vec& x, const Vec& u, double dt,
                SeededRng& rng, bool renormalize, double t = 0.0);

// Lie splitting: the reversible flow is applied exactly through
// the precomputed propagator exp(dt J QH), then the dissipative, input and
// noise terms take an Euler-Maruyama step. Norm-preserving in the reversible
// sector for any dt, which plain Euler is not.
class SplitStepper {
public:
    SplitStepper(const MetriplecticSystem& sys, double dt);
    // Uses an explicitly supplied reversible propagator (must be orthogonal
    // when J QH is skew).
    SplitStepper(const MetriplecticSystem& sys, double dt, Mat propagator);

    StepResult operator()(const Vec& x, const Vec& u, SeededRng& rng, bool renormalize,
                          double t = 0.0) const;

    const Mat& propagator() const { return P_; }

private:
    const MetriplecticSystem* sys_;
    double dt_;
    Mat P_;
    Mat D_; // lambda R QXi
};

} // namespace pil
