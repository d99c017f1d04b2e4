#pragma once

#include <optional>
#include <ostream>
#include <vector>

#include "tdd/susceptibility.hpp"

namespace tdd {

struct CouplingOptions {
    double tail_tol = 1e-4;  // relative residual of Phi_reg allowed at kappa_max
    double flat_tol = 1e-4;  // relative flatness threshold for Dirac detection
    double pdc_tol = 1e-9;
};

// String coupling synthesized from a susceptibility:
//   sigma_hat(kappa) = sqrt(2 Phi(kappa + i0)),
// split as Phi = Phi_inf + Phi_reg with the constant tail Phi_inf carried by
// a Dirac component at s = 0 (weight sqrt(2 Phi_inf)).  Phi_reg is stored
// signed; quadrature consumers (Herglotz check, kernel reconstruction) use it
// directly, while square-root consumers (spatial samples, string modes)
// require it to be PSD up to the recorded clamp.
class CouplingFunction {
public:
    Eigen::Index stress_dim() const { return dim_; }
    const std::vector<double>& kappa_grid() const { return kappa_; }
    const std::vector<double>& quad_weights() const { return w_; }
    double dkappa() const { return dkappa_; }
    double kappa_max() const { return kappa_max_; }

    bool has_dirac() const { return has_dirac_; }
    const SymMatrix& dirac_weight() const { return dirac_weight_; }
    SymMatrix phi_inf() const;
    // gamma_M of the equivalent instantaneous-friction channel (= Phi_inf)
    const SymMatrix& markov_gamma() const { return phi_inf_m_; }

    // full sigma_hat at grid point j
    SymMatrix sigma_hat(int j) const;
    // signed regular part Phi_reg(kappa_j)
    SymMatrix phi_reg(int j) const;
    // sqrt(2 Phi_reg(kappa_j)); NotPSD when the split left a signed remainder
    SymMatrix sigma_hat_reg(int j) const;

    bool reg_is_psd() const { return reg_psd_; }
    double reg_clamp() const { return reg_clamp_; }

    // central cell of kernels singular at kappa = 0: stored points then start
    // at dkappa and the [0, dkappa] mass enters through an exact moment.
    bool singular_cell() const { return singular_; }
    // int_0^dkappa Phi(kappa) dkappa for the singular-cell path (full Phi)
    SymMatrix cell_moment() const;

    // separable fast path: Phi(kappa) = phi(kappa) * shape
    struct SeparableData {
        SymMatrix shape;
        bool diag = false;   // diagonal shape: eigvecs are the coordinate axes
        Matrix shape_sqrt;   // empty when diag
        Vector eigvals;      // shape = V diag(eigvals) V^T
        Matrix eigvecs;      // empty when diag
        std::vector<double> phi;      // full scalar phi on the grid
        double phi_inf = 0.0;
        double cell_moment = 0.0;     // int_0^dkappa phi (full), singular path

        Vector eigvec(Eigen::Index r) const {
            if (!diag) return eigvecs.col(r);
            Vector v = Vector::Zero(eigvals.size());
            v(r) = 1.0;
            return v;
        }
        Matrix sqrt_mat() const {
            if (!diag) return shape_sqrt;
            return Matrix(eigvals.cwiseMax(0.0).cwiseSqrt().asDiagonal());
        }
    };
    const std::optional<SeparableData>& separable() const { return sep_; }

    // cosine transform of sqrt(2 Phi_reg): regular spatial samples of the
    // coupling (the Dirac component is excluded).  Even in s exactly.
    std::vector<SymMatrix> spatial_samples(const std::vector<double>& s_grid) const;
    // scalar profile version for separable couplings: sigma_reg(s) = prof(s) * shape_sqrt
    std::vector<double> spatial_profile(const std::vector<double>& s_grid) const;

    void write_csv(std::ostream& os) const;

    friend CouplingFunction build_coupling(const SusceptibilityModel&, double, double,
                                           const CouplingOptions&);

private:
    Eigen::Index dim_ = 0;
    double dkappa_ = 0.0, kappa_max_ = 0.0;
    std::vector<double> kappa_;
    std::vector<double> w_; // half-line trapezoid weights
    bool singular_ = false;

    std::optional<SeparableData> sep_;
    std::vector<SymMatrix> phi_m_;  // generic path: full Phi matrices
    SymMatrix phi_inf_m_;
    SymMatrix cell_moment_m_;

    SymMatrix dirac_weight_;
    bool has_dirac_ = false;
    bool reg_psd_ = true;
    double reg_clamp_ = 0.0;
};

// Pointwise sigma_hat(kappa) = sqrt(2 Phi(kappa + i0)).
SymMatrix coupling_hat(const SusceptibilityModel& model, double kappa);

CouplingFunction build_coupling(const SusceptibilityModel& model, double dkappa,
                                double kappa_max, const CouplingOptions& opts = {});

// Quadrature of (1/2pi) int sigma_hat(k)^2 / (k^2 - zeta^2) dk plus the
// analytic Dirac term i Phi_inf / zeta, compared against chi_hat; returns the
// max relative Frobenius residual over the probes.
double verify_herglotz(const CouplingFunction& coupling, const SusceptibilityModel& model,
                       const std::vector<Complex>& zeta_probes);

// chi(tau) recovered from the coupling in spectral form.
std::vector<SymMatrix> reconstruct_chi(const CouplingFunction& coupling,
                                       const std::vector<double>& tau_grid);

} // namespace tdd
