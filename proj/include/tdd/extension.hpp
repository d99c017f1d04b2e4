#pragma once

#include <Eigen/Sparse>
#include <memory>
#include <vector>

#include "tdd/coupling.hpp"
#include "tdd/system.hpp"

namespace tdd {

enum class StringRep { Spectral, Spatial };
enum class IntegratorKind { ImplicitMidpoint, ExponentialMidpoint };

struct Discretization {
    StringRep rep = StringRep::Spectral;
    // spectral
    double dkappa = 0.0, kappa_max = 0.0; // taken from the coupling when 0
    // spatial
    double ds = 0.0;
    double s_extent = 0.0;  // string domain is [-s_extent, s_extent]
    double t_max = 0.0;     // light-cone containment horizon
};

// Full conservative state: subsystem coordinate u plus the string fields,
// stored channel-major.  fields_q/fields_p are (n_channels x n_modes) for the
// scalar-channel bank or (dim_H x n_modes) for the dense bank; spatial runs
// use grid points in place of modes.  f_dirac carries the running integral
// int f dt' of the Markov channel.
struct ExtendedState {
    Vector u;
    Matrix fields_q;
    Matrix fields_p;
    Vector f_dirac;
    double t = 0.0;
    double markov_absorbed = 0.0; // energy radiated into the Dirac-channel string
};

class ExtendedSystem {
public:
    const SystemSpec& spec() const { return spec_; }
    StringRep rep() const { return rep_; }
    bool dense_bank() const { return dense_; }
    bool has_markov() const { return has_markov_; }
    const SymMatrix& markov_gamma() const { return gamma_m_; }
    const SymMatrix& dirac_weight() const { return dirac_weight_; }

    Eigen::Index n_channels() const { return dense_ ? spec_.dim_H() : dirs_.cols(); }
    Eigen::Index n_modes() const { return static_cast<Eigen::Index>(kappa_.size()); }
    const std::vector<double>& mode_kappa() const { return kappa_; }
    const std::vector<double>& s_grid() const { return s_; }

    ExtendedState rest_state() const;
    ExtendedState rest_state(const Vector& u0) const;

    // f = K u - T phi (- Markov channel)
    Vector kinematical_stress(const ExtendedState& st) const;
    // (H_sys, H_str_resident, H_total_resident); the ledger adds the
    // Dirac-channel absorption to H_str during simulation.
    struct Energies {
        double h_sys = 0.0, h_str = 0.0, h_total = 0.0;
    };
    Energies energies(const ExtendedState& st) const;
    // per-channel string energies (scalar-channel banks)
    Vector channel_energies(const ExtendedState& st) const;
    Vector channel_direction(Eigen::Index r) const { return dirs_.col(r); }
    // string Lagrangian |theta|^2/2 - |d_s phi|^2/2 (kappa form in spectral runs)
    double string_lagrangian(const ExtendedState& st) const;

    // Markov-channel string displacement reconstructed from the F history:
    // phi_M(s, t) = dirac_weight/2 * F(t - |s|).
    // f_history sampled at dt from t = 0 (rest) is required.
    std::vector<Vector> markov_string_profile(const std::vector<Vector>& f_dirac_history,
                                              double dt, const std::vector<double>& s_grid,
                                              double t) const;

    friend ExtendedSystem build_extension(const SystemSpec&, const CouplingFunction&,
                                          const Discretization&);
    friend class Stepper;

private:
    SystemSpec spec_;
    StringRep rep_ = StringRep::Spectral;
    bool dense_ = false;
    bool has_markov_ = false;
    SymMatrix gamma_m_;       // Phi_inf
    SymMatrix dirac_weight_;  // sqrt(2 Phi_inf)

    // scalar-channel bank: stress directions (dim_H x R) and couplings
    Matrix dirs_;       // columns v_r
    Matrix coup_;       // spectral: g_{r j} (R x n_modes); spatial: c_r(s_i) (R x n_s)
    // dense bank (spectral only): per-mode symmetric couplings
    std::vector<Matrix> coup_dense_;

    std::vector<double> kappa_; // spectral modes
    std::vector<double> s_;     // spatial grid
    std::vector<double> sw_;    // spatial site weights
    double ds_ = 0.0;

    bool sparse_k_ = false; // large grids: sample stresses through a sparse K
    Eigen::SparseMatrix<double> sp_k_sys_;
};

// Builds the discrete conservative extension.  Spatial runs raise
// LightConeViolation when s_extent < sigma support + t_max; couplings whose
// regular part is signed raise NotPSD.
ExtendedSystem build_extension(const SystemSpec& spec, const CouplingFunction& coupling,
                               const Discretization& disc);

struct StepOptions {
    IntegratorKind integrator = IntegratorKind::ImplicitMidpoint;
    double fixed_point_tol = 1e-12;
    int fixed_point_max_iter = 50;
    int threads = 1;
};

// One-step propagator with cached factorizations.
class Stepper {
public:
    Stepper(const ExtendedSystem& sys, double dt, StepOptions opts = {});

    // advances st by dt; drive is sampled at the interval midpoint
    void advance(ExtendedState& st, const Drive& drive);

    // external work and stress at the last midpoint (for ledgers)
    double last_work_increment() const { return last_work_; }
    const Vector& last_f_mid() const { return f_mid_; }
    double dt() const { return dt_; }

private:
    void solve_f_mid(const ExtendedState& st, const Vector& rho_mid, bool with_u_substitution,
                     const Vector* u_mid_override);

    const ExtendedSystem& sys_;
    double dt_, h_;
    StepOptions opts_;
    // dense factorizations (small stress spaces)
    Eigen::PartialPivLU<Matrix> lu_subst_;   // I - h KJK^T + h gamma + h^2 C
    Eigen::PartialPivLU<Matrix> lu_plain_;   // I + h gamma + h^2 C (nonlinear path)
    Matrix kjkt_;
    // sparse path for large banded systems (field grids)
    bool sparse_ = false;
    Eigen::SparseMatrix<double> sp_k_, sp_jkt_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> sp_subst_, sp_plain_;
    // spectral helpers
    Vector mode_d_;       // 1/(1 + h^2 k^2) or exp-midpoint weights
    Vector mode_rot_c_, mode_rot_s_; // cos(k dt), sin(k dt)/k for exp midpoint
    Vector mode_half_c_, mode_half_q_; // half-step response weights
    // spatial helpers (per channel): factorized (I - h^2 A) tridiagonal
    struct Tridiag {
        Vector dl, d, du; // factor storage
        void factor(Vector a, Vector b, Vector c);
        void solve(Vector& x) const;
    };
    Tridiag string_op_;
    Matrix z_;            // per channel L^{-1} c (n_s x R)
    Vector f_mid_;
    double last_work_ = 0.0;
};

// Convenience single-step entry point matching the module contract; builds a
// Stepper internally (simulate() keeps one alive instead).
ExtendedState step(const ExtendedSystem& sys, const ExtendedState& st, double dt,
                   const Drive& drive, const StepOptions& opts = {});

struct EnergyLedger {
    std::vector<double> t;
    std::vector<double> h_sys, h_str, h_total;
    std::vector<double> work_ext, work_fr;
};

struct Trajectory {
    std::vector<double> t;
    std::vector<Vector> u, f;
    std::vector<Vector> f_dirac;
};

struct SimOptions {
    int sample_stride = 1;
    StepOptions step;
    std::vector<double> probe_times; // snapshot the full state near these times
    Vector u0;                        // optional initial u (rest strings)
    bool record_channel_energies = false;
};

struct SimResult {
    Trajectory traj;
    EnergyLedger ledger;
    std::vector<std::pair<double, ExtendedState>> snapshots;
    ExtendedState final_state;
    std::vector<Vector> channel_energy; // per sample, when requested
};

SimResult simulate(const ExtendedSystem& sys, const Drive& drive, double t_final, double dt,
                   const SimOptions& opts = {});

// Independent string oracle: phi(s, t) = 1/2 int_0^inf dtau int_{s-tau}^{s+tau}
// dsigma sigma(sig) f(t - tau), evaluated from a sampled f history (rest before
// sample 0) by nested quadrature.
std::vector<Vector> string_exact_response(const CouplingFunction& coupling,
                                          const std::vector<Vector>& f_history, double dt,
                                          const std::vector<double>& s_grid, double t);

} // namespace tdd
