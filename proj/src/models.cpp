#include "tdd/models.hpp"

#include <cmath>

namespace tdd {

SystemSpec oscillator_spec(double m, double k) {
    if (!(m > 0.0) || !(k > 0.0)) throw Error("oscillator requires m, k > 0");
    SystemSpec s;
    s.J = canonical_symplectic(1);
    s.K = Matrix::Zero(2, 2);
    s.K(0, 0) = 1.0 / std::sqrt(m);
    s.K(1, 1) = std::sqrt(k);
    s.split = PqSplit{1, 1, 1, 1};
    return s;
}

DampedOscillator damped_oscillator(double m, double k, double gamma) {
    if (gamma < 0.0) throw Error("damped_oscillator requires gamma >= 0");
    DampedOscillator d;
    d.spec = oscillator_spec(m, k);
    d.m = m;
    d.k = k;
    d.gamma = gamma;
    Vector diag(2);
    diag << gamma, 0.0;
    d.chi = SusceptibilityModel::markov(SymMatrix::diagonal(diag));
    return d;
}

double DampedOscillator::analytic_q(double t, double q0, double v0) const {
    const double beta = 0.5 * gamma;
    const double w2 = k / m;
    const double disc = beta * beta - w2;
    const double e = std::exp(-beta * t);
    if (std::abs(disc) < 1e-14) return e * (q0 + (v0 + beta * q0) * t);
    if (disc < 0.0) {
        const double nu = std::sqrt(-disc);
        return e * (q0 * std::cos(nu * t) + (v0 + beta * q0) / nu * std::sin(nu * t));
    }
    const double mu = std::sqrt(disc);
    return e * (q0 * std::cosh(mu * t) + (v0 + beta * q0) / mu * std::sinh(mu * t));
}

Vector DampedOscillator::impulsive_u0(double q0, double v0) const {
    // f_p(0+) = K_p p0 and qdot(0+) = f_p / sqrt(m)  =>  p0 = m v0
    Vector u0(2);
    u0 << m * v0, q0;
    return u0;
}

namespace {

SymMatrix p_channel_shape(double v) {
    Vector d(2);
    d << v, 0.0;
    return SymMatrix::diagonal(d);
}

} // namespace

DispersiveOscillator lorentz_oscillator(double m, double k, double strength, double omega0,
                                        double gamma_l) {
    DispersiveOscillator d;
    d.spec = oscillator_spec(m, k);
    d.chi = SusceptibilityModel::lorentz(p_channel_shape(strength), omega0, gamma_l);
    return d;
}

DispersiveOscillator debye_oscillator(double m, double k, double delta, double tau_d) {
    DispersiveOscillator d;
    d.spec = oscillator_spec(m, k);
    d.chi = SusceptibilityModel::debye(p_channel_shape(delta), tau_d);
    return d;
}

NonlinearOscillator nonlinear_oscillator(double m, double gamma,
                                         std::function<double(double)> potential,
                                         std::function<double(double)> dpotential) {
    if (!(m > 0.0) || gamma < 0.0) throw Error("nonlinear_oscillator parameters");
    NonlinearOscillator n;
    n.m = m;
    n.gamma = gamma;
    n.potential = potential;
    n.dpotential = dpotential;
    n.spec.J = canonical_symplectic(1);
    n.spec.K = Matrix::Zero(1, 2);
    n.spec.K(0, 0) = 1.0 / std::sqrt(m); // quadratic part p^2 / 2m only
    n.spec.h1 = [potential](const Vector& u) { return potential(u(1)); };
    n.spec.grad_h1 = [dpotential](const Vector& u) {
        Vector g(2);
        g << 0.0, dpotential(u(1));
        return g;
    };
    n.chi = SusceptibilityModel::markov(SymMatrix::scalar(gamma));
    return n;
}

std::vector<double> reference_damped_ode(double m, double gamma,
                                         const std::function<double(double)>& dpotential,
                                         double q0, double v0, double sample_dt, double t_final,
                                         int substeps) {
    const long n = std::lround(t_final / sample_dt);
    const double h = sample_dt / substeps;
    std::vector<double> out;
    out.reserve(n + 1);
    double q = q0, v = v0;
    out.push_back(q);
    auto acc = [&](double qq, double vv) { return -dpotential(qq) / m - gamma * vv; };
    for (long s = 0; s < n; ++s) {
        for (int i = 0; i < substeps; ++i) {
            const double k1q = v, k1v = acc(q, v);
            const double k2q = v + 0.5 * h * k1v, k2v = acc(q + 0.5 * h * k1q, v + 0.5 * h * k1v);
            const double k3q = v + 0.5 * h * k2v, k3v = acc(q + 0.5 * h * k2q, v + 0.5 * h * k2v);
            const double k4q = v + h * k3v, k4v = acc(q + h * k3q, v + h * k3v);
            q += h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
            v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        }
        out.push_back(q);
    }
    return out;
}

SymMatrix Maxwell1D::stress_shape(const Vector& strength_at_nodes) const {
    if (strength_at_nodes.size() != n_nodes) throw DimensionMismatch("stress_shape profile");
    Vector d = Vector::Zero(dim_H());
    for (int i = 0; i < n_nodes; ++i) d(i) = strength_at_nodes(i) / eps(i);
    return SymMatrix::diagonal(d);
}

Vector Maxwell1D::efield(const Vector& f) const {
    Vector e(n_nodes);
    for (int i = 0; i < n_nodes; ++i) e(i) = f(i) / (std::sqrt(eps(i)) * scale);
    return e;
}

Vector Maxwell1D::hfield(const Vector& f) const {
    Vector h(n_nodes - 1);
    for (int i = 0; i + 1 < n_nodes; ++i) h(i) = f(n_nodes + i) / (std::sqrt(mu(i)) * scale);
    return h;
}

Vector Maxwell1D::dfield(const Vector& u) const {
    Vector d(n_nodes);
    for (int i = 0; i < n_nodes; ++i) d(i) = -u(i) / scale;
    return d;
}

Vector Maxwell1D::bfield(const Vector& u) const {
    Vector b(n_nodes - 1);
    for (int i = 0; i + 1 < n_nodes; ++i)
        b(i) = (u(n_nodes + i + 1) - u(n_nodes + i)) / (dx * scale);
    return b;
}

Vector Maxwell1D::poynting(const Vector& f) const {
    // S_x = (E x H)_x / 4pi at links; with B_z = +dA_y/dx a right-moving
    // vacuum pulse has H = E and carries S > 0, and the discrete node energy
    // law telescopes exactly with this flux
    Vector e = efield(f), h = hfield(f);
    Vector s(n_nodes - 1);
    for (int i = 0; i + 1 < n_nodes; ++i)
        s(i) = 0.5 * (e(i) + e(i + 1)) * h(i) / (4.0 * M_PI);
    return s;
}

Vector Maxwell1D::node_energy(const Vector& f) const {
    Vector en = Vector::Zero(n_nodes);
    for (int i = 0; i < n_nodes; ++i) en(i) += 0.5 * f(i) * f(i);
    for (int i = 0; i + 1 < n_nodes; ++i) {
        const double le = 0.5 * f(n_nodes + i) * f(n_nodes + i);
        en(i) += 0.5 * le;
        en(i + 1) += 0.5 * le;
    }
    return en;
}

Vector Maxwell1D::current_amplitude(const Vector& j_profile_at_nodes) const {
    if (j_profile_at_nodes.size() != n_nodes) throw DimensionMismatch("current profile");
    Vector rho = Vector::Zero(dim_V());
    for (int i = 0; i < n_nodes; ++i) rho(i) = scale * 4.0 * M_PI * j_profile_at_nodes(i);
    return rho;
}

Maxwell1D maxwell1d(int n_nodes, double dx, Vector eps_nodes, Vector mu_links, int slab_begin,
                    int slab_end) {
    if (n_nodes < 3 || !(dx > 0.0)) throw Error("maxwell1d grid");
    if (eps_nodes.size() != n_nodes || mu_links.size() != n_nodes - 1)
        throw DimensionMismatch("maxwell1d material profiles");
    if (eps_nodes.minCoeff() <= 0.0 || mu_links.minCoeff() <= 0.0)
        throw Error("maxwell1d requires eps, mu > 0");
    Maxwell1D m;
    m.n_nodes = n_nodes;
    m.dx = dx;
    m.scale = std::sqrt(dx / (4.0 * M_PI));
    m.eps = std::move(eps_nodes);
    m.mu = std::move(mu_links);
    m.slab_begin = slab_begin;
    m.slab_end = slab_end;

    const Eigen::Index nv = m.dim_V(), nh = m.dim_H();
    m.spec.J = canonical_symplectic(n_nodes);
    m.spec.K = Matrix::Zero(nh, nv);
    for (int i = 0; i < n_nodes; ++i) m.spec.K(i, i) = -1.0 / std::sqrt(m.eps(i)); // f_E = -Pi/sqrt(eps)
    for (int i = 0; i + 1 < n_nodes; ++i) {
        const double c = 1.0 / (std::sqrt(m.mu(i)) * dx);
        m.spec.K(n_nodes + i, n_nodes + i) = -c;     // f_H = (A_{i+1} - A_i) / (sqrt(mu) dx)
        m.spec.K(n_nodes + i, n_nodes + i + 1) = c;
    }
    m.spec.split = PqSplit{n_nodes, n_nodes, n_nodes, n_nodes - 1};
    return m;
}

} // namespace tdd
