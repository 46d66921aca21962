#include "pil/metriplectic.hpp"

#include "pil/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pil {

MetriplecticSystem make_system(Mat J, Mat R, Mat QH, Mat QXi, double lambda, Mat B,
                               double noise, double alpha) {
    const Eigen::Index n = J.rows();
    auto square = [n](const Mat& M, const char* name) {
        if (M.rows() != n || M.cols() != n)
            fail(ErrorKind::InvalidConfig, std::string(name) + " must be " + std::to_string(n) +
                                               "x" + std::to_string(n));
    };
    square(J, "J");
    square(R, "R");
    square(QH, "QH");
    square(QXi, "QXi");
    if (B.rows() != n) fail(ErrorKind::InvalidConfig, "B must have one row per state coordinate");
    if (lambda < 0.0 || noise < 0.0 || !(alpha > 0.0))
        fail(ErrorKind::InvalidConfig, "lambda, noise must be >= 0 and alpha > 0");

    // Construct antisymmetric exactly rather than merely checking it.
    J = (0.5 * (J - J.transpose())).eval();
    if ((R - R.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        fail(ErrorKind::InvalidConfig, "R must be symmetric");
    R = (0.5 * (R + R.transpose())).eval();
    if (n > 0) {
        Eigen::SelfAdjointEigenSolver<Mat> es(R, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-10)
            fail(ErrorKind::InvalidConfig, "R must be positive semidefinite");
    }

    MetriplecticSystem sys;
    sys.dim = static_cast<int>(n);
    sys.J = std::move(J);
    sys.R = std::move(R);
    sys.QH = std::move(QH);
    sys.QXi = std::move(QXi);
    sys.lambda = lambda;
    sys.B = std::move(B);
    sys.noise = noise;
    sys.alpha = alpha;
    return sys;
}

DegeneracyReport check_degeneracy(const MetriplecticSystem& sys, int samples, double tol,
                                  SeededRng& rng) {
    if (samples < 1) fail(ErrorKind::InvalidConfig, "check_degeneracy needs samples >= 1");
    DegeneracyReport rep;
    rep.tol = tol;
    for (int s = 0; s < samples; ++s) {
        Vec x = rng.gaussian_vec(sys.dim);
        const double nx = x.norm();
        if (nx > 0.0) x /= nx;
        rep.max_j_gradxi = std::max(rep.max_j_gradxi, (sys.J * sys.grad_xi(x)).norm());
        rep.max_r_gradh = std::max(rep.max_r_gradh, (sys.R * sys.grad_h(x)).norm());
    }
    rep.pass = rep.max_j_gradxi < tol && rep.max_r_gradh < tol;
    return rep;
}

double entropy_production_rate(const MetriplecticSystem& sys, const Vec& x) {
    const Vec g = sys.grad_xi(x);
    // Clamp the roundoff-negative values a PSD form can produce.
    return std::max(0.0, sys.lambda * g.dot(sys.R * g));
}

namespace {

FluxRecord flux_at(const MetriplecticSystem& sys, const Vec& x, double t) {
    FluxRecord f;
    f.time = t;
    f.entropy_production_rate = entropy_production_rate(sys, x);
    f.irr_info_rate = f.entropy_production_rate / sys.alpha;
    return f;
}

Vec input_term(const MetriplecticSystem& sys, const Vec& u) {
    if (u.size() == 0 || sys.B.cols() == 0) return Vec::Zero(sys.dim);
    if (u.size() != sys.B.cols())
        fail(ErrorKind::InvalidConfig, "input has wrong dimension for B");
    return sys.B * u;
}

void add_noise(const MetriplecticSystem& sys, Vec& x, double dt, SeededRng& rng) {
    if (sys.noise <= 0.0) return;
    const double s = sys.noise * std::sqrt(dt);
    for (int i = 0; i < sys.dim; ++i) x[i] += s * rng.gaussian();
}

void finish(Vec& x, bool renormalize, long step_index) {
    if (renormalize) {
        const double nx = x.norm();
        if (!(nx > 0.0) || !std::isfinite(nx))
            throw DivergedError(step_index, "cannot renormalize a zero or non-finite state");
        x /= nx;
    }
    if (!all_finite(x)) throw DivergedError(step_index, "metriplectic step produced non-finite state");
}

} // namespace

StepResult step(const MetriplecticSystem& sys, const Vec& x, const Vec& u, double dt,
                SeededRng& rng, bool renormalize, double t) {
    if (!(dt > 0.0)) fail(ErrorKind::InvalidConfig, "dt must be positive");
    StepResult out;
    out.flux = flux_at(sys, x, t);
    const Vec drift =
        sys.J * sys.grad_h(x) - sys.lambda * (sys.R * sys.grad_xi(x)) + input_term(sys, u);
    out.x = x + dt * drift;
    add_noise(sys, out.x, dt, rng);
    finish(out.x, renormalize, 0);
    return out;
}

SplitStepper::SplitStepper(const MetriplecticSystem& sys, double dt)
    : SplitStepper(sys, dt, expm(dt * sys.J * sys.QH)) {}

SplitStepper::SplitStepper(const MetriplecticSystem& sys, double dt, Mat propagator)
    : sys_(&sys), dt_(dt), P_(std::move(propagator)) {
    if (!(dt > 0.0)) fail(ErrorKind::InvalidConfig, "dt must be positive");
    if (P_.rows() != sys.dim || P_.cols() != sys.dim)
        fail(ErrorKind::InvalidConfig, "propagator has wrong shape");
    D_ = sys.lambda * sys.R * sys.QXi;
}

StepResult SplitStepper::operator()(const Vec& x, const Vec& u, SeededRng& rng,
                                    bool renormalize, double t) const {
    StepResult out;
    out.flux = flux_at(*sys_, x, t);
    Vec y = P_ * x;
    y += dt_ * (input_term(*sys_, u) - D_ * y);
    add_noise(*sys_, y, dt_, rng);
    finish(y, renormalize, 0);
    out.x = std::move(y);
    return out;
}

} // namespace pil
