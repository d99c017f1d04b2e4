#pragma once

#include <functional>
#include <vector>

#include "tdd/susceptibility.hpp"
#include "tdd/system.hpp"

namespace tdd {

// Point oscillator in (p, q) coordinates: h = p^2/2m + k q^2/2,
// K = diag(1/sqrt(m), sqrt(k)), canonical J.
SystemSpec oscillator_spec(double m, double k);

struct DampedOscillator {
    SystemSpec spec;
    SusceptibilityModel chi; // Markov on the p-stress channel
    double m = 1.0, k = 1.0, gamma = 0.0;

    // closed form for qddot = -(k/m) q - gamma qdot
    double analytic_q(double t, double q0, double v0) const;
    // phase point (p, q) giving q(0) = q0, qdot(0) = v0 at an impulsive start
    Vector impulsive_u0(double q0, double v0) const;
};

DampedOscillator damped_oscillator(double m, double k, double gamma);

// Oscillator with a Lorentz susceptibility on the p-stress channel.
struct DispersiveOscillator {
    SystemSpec spec;
    SusceptibilityModel chi;
};
DispersiveOscillator lorentz_oscillator(double m, double k, double strength, double omega0,
                                        double gamma_l);
DispersiveOscillator debye_oscillator(double m, double k, double delta, double tau_d);

// h(u) = p^2/2m + V(q) with Markov friction gamma on the p channel.
struct NonlinearOscillator {
    SystemSpec spec;
    SusceptibilityModel chi;
    double m = 1.0, gamma = 0.0;
    std::function<double(double)> potential;
    std::function<double(double)> dpotential;
};
NonlinearOscillator nonlinear_oscillator(double m, double gamma,
                                         std::function<double(double)> potential,
                                         std::function<double(double)> dpotential);

// RK4 reference for qddot = -dV(q)/m - gamma qdot; returns q at multiples of
// sample_dt using an internal step sample_dt / substeps.
std::vector<double> reference_damped_ode(double m, double gamma,
                                         const std::function<double(double)>& dpotential,
                                         double q0, double v0, double sample_dt, double t_final,
                                         int substeps);

// 1D TDD-Maxwell system on a staggered grid (units c = 1, Gaussian 1/4pi
// weights).  Phase variables are scaled by sqrt(dx/4pi) so the framework's
// Euclidean energy matches the physical one; accessors undo the scaling.
struct Maxwell1D {
    SystemSpec spec;
    int n_nodes = 0;     // A, Pi, E, D at nodes; H, B on the n_nodes-1 links
    double dx = 0.0;
    double scale = 1.0;  // sqrt(dx / 4pi)
    Vector eps;          // at nodes
    Vector mu;           // at links
    int slab_begin = 0, slab_end = 0; // node range [begin, end)

    Eigen::Index dim_V() const { return 2 * n_nodes; }
    Eigen::Index dim_H() const { return 2 * n_nodes - 1; }

    // stress-space susceptibility shape for an E-channel strength profile:
    // diag(strength_i / eps_i) on E rows, zero on H rows
    SymMatrix stress_shape(const Vector& strength_at_nodes) const;

    Vector efield(const Vector& f) const;   // E at nodes
    Vector hfield(const Vector& f) const;   // H at links
    Vector dfield(const Vector& u) const;   // D at nodes
    Vector bfield(const Vector& u) const;   // B at links
    Vector poynting(const Vector& f) const; // S_x = -E H / 4pi at links
    // field energy assigned per node (half of each adjacent link)
    Vector node_energy(const Vector& f) const;

    // external current j(x, t) = profile(x) * time factor; returns the scaled
    // drive vector rho = (4 pi j, 0) in scaled phase coordinates
    Vector current_amplitude(const Vector& j_profile_at_nodes) const;
};

Maxwell1D maxwell1d(int n_nodes, double dx, Vector eps_nodes, Vector mu_links, int slab_begin,
                    int slab_end);

} // namespace tdd
