#pragma once

#include <optional>
#include <vector>

#include "tdd/susceptibility.hpp"
#include "tdd/system.hpp"

namespace tdd {

struct LosslessTrajectory {
    std::vector<double> t;
    std::vector<Vector> u, f;
};

// Dispersionless propagation f(t) = exp(t KJK^T) K u0,
// u(t) = u0 + J K^T int_0^t f, both by the skew eigendecomposition.
LosslessTrajectory solve_lossless(const SystemSpec& spec, const Vector& u0, double t_final,
                                  double sample_dt);

struct VolterraResult {
    double dt = 0.0;
    std::vector<double> t;
    std::vector<Vector> u, f;
    std::vector<double> work_ext; // cumulative int <f, K rho>
};

struct VolterraOptions {
    // impulsive initial data (rho = u0 delta(t)): marching starts from
    // u(0) = u0, f(0) = K u0 with empty history
    std::optional<Vector> u0;
};

// Trapezoidal convolution-quadrature marching for the driven TDD system;
// the full history is kept (O(N^2)).
VolterraResult solve_volterra(const SystemSpec& spec, const SusceptibilityModel& model,
                              const Drive& drive, double dt, double t_final,
                              const VolterraOptions& opts = {});

// W_fr = -1/2 double-int <f(t), a_e(t - tau) f(tau)> dt dtau by double
// trapezoid; the 2 chi(0+) delta diagonal is taken in closed form and the
// power-law kernel's integrable singularity uses the cell-averaged weight.
double friction_work(const SusceptibilityModel& model, const std::vector<Vector>& f_samples,
                     double dt);

} // namespace tdd
