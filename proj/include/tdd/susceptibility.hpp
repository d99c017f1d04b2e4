#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "tdd/linalg.hpp"

namespace tdd {

// Matrix-valued causal susceptibility kernels chi(t) with closed-form
// frequency transforms.  Models are immutable values; composition via
// sum() and conjugated().
//
// Variants and transforms (Im zeta >= 0):
//   Zero      chi = 0
//   Markov    chi(t) = gamma,                  chi_hat = i gamma / zeta
//   Debye     chi(t) = (D/tau) e^{-t/tau},     chi_hat = D / (1 - i zeta tau)
//   Lorentz   chi(t) = S e^{-g t/2} sin(nu t)/nu,
//             chi_hat = S / (w0^2 - zeta^2 - i g zeta),  nu = sqrt(w0^2 - g^2/4)
//   PowerLaw  chi(t) = S t^alpha,              chi_hat = i G(a+1) e^{i pi a/2} / zeta^{a+1}
class SusceptibilityModel {
public:
    enum class Kind { Zero, Markov, Debye, Lorentz, PowerLaw, Sum, Conjugated };

    SusceptibilityModel() = default;

    static SusceptibilityModel zero(Eigen::Index stress_dim);
    static SusceptibilityModel markov(SymMatrix gamma);
    static SusceptibilityModel debye(SymMatrix delta, double tau_d);
    static SusceptibilityModel lorentz(SymMatrix strength, double omega0, double gamma_l);
    // alpha in [0, 1/3]; scale symmetric (sign-flipped scales are accepted so
    // the PDC gate can reject them).
    static SusceptibilityModel power_law(double alpha, SymMatrix scale);
    static SusceptibilityModel sum(std::vector<SusceptibilityModel> parts);
    static SusceptibilityModel conjugated(SusceptibilityModel base, Matrix c);

    bool valid() const { return node_ != nullptr; }
    Eigen::Index stress_dim() const;
    Kind kind() const;

    // chi(t), t >= 0 (NegativeTime otherwise); t = 0 returns chi(0+).
    SymMatrix chi_time(double t) const;
    // Odd extension chi^o(tau); UndefinedAtZero at tau = 0 when chi(0+) != 0.
    SymMatrix odd_extension(double tau) const;
    // chi(0+)
    SymMatrix chi_zero_plus() const;
    // d/dt chi(t) for t > 0 (the smooth part of the friction function)
    SymMatrix chi_time_derivative(double t) const;

    // Fourier-Laplace transform, Im zeta >= 0; boundary values are the
    // analytic limits.  PoleOnAxis at real-axis poles.
    CMatrix chi_hat(Complex zeta) const;
    // Phi(omega + i0) = Im{omega chi_hat(omega + i0)}, real symmetric.
    SymMatrix phi_boundary(double omega) const;
    // d/domega [omega chi_hat(omega + i0)], analytic per variant.
    CMatrix d_omega_omega_chi_hat(double omega) const;
    // true if chi_hat has a pole at the real point omega
    bool pole_on_axis(double omega) const;
    // true if Phi(omega + i0) itself is singular there (chi_hat poles whose
    // omega chi_hat combination stays regular, like Markov at 0, are excluded)
    bool phi_singular(double omega) const;

    // exact integral of Phi over [a, b] on the positive half axis; used for
    // the central quadrature cell of kernels singular at omega = 0.
    SymMatrix phi_moment(double a, double b) const;
    bool singular_at_zero() const;

    // chi(t) = kernel(t) * shape with a scalar kernel: shape if separable
    std::optional<SymMatrix> separable_shape() const;
    // 1x1 unit-parameter model evaluating the scalar kernel (requires a
    // separable model)
    SusceptibilityModel scalar_unit() const;

private:
    struct Node;
    explicit SusceptibilityModel(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

struct FrictionFunction {
    SymMatrix dirac_weight;                      // chi(0+)
    std::function<SymMatrix(double)> smooth_part; // d/dt chi(t), t > 0
};

FrictionFunction friction_function(const SusceptibilityModel& model);

struct PdcReport {
    struct Probe {
        double omega = 0.0;
        double eta = 0.0;
    };
    std::vector<Probe> grid;
    double min_eig = 0.0;
    Probe worst;
    bool passed = false;
    double pdc_tol = 0.0;
};

// Scans min eigenvalue of Im{zeta chi_hat(zeta)} over the boundary
// (eta = 0, analytic limits) and interior probe points.  Points at poles
// are skipped.
PdcReport check_pdc(const SusceptibilityModel& model,
                    const std::vector<double>& omega_grid,
                    const std::vector<double>& eta_grid,
                    double pdc_tol = 1e-9);

// Uniform grid helper that never lands exactly on omega = 0.
std::vector<double> pdc_omega_grid(double omega_max, int n);

} // namespace tdd
