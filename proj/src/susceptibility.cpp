#include "tdd/susceptibility.hpp"

#include <cmath>
#include <limits>

namespace tdd {

namespace {

double gamma_ap1(double alpha) { return std::tgamma(alpha + 1.0); }

// principal branch zeta^p for zeta in the closed upper half plane
Complex upper_pow(Complex zeta, double p) {
    const double r = std::abs(zeta);
    double th = std::arg(zeta);
    if (th < -1e-7) th += 2.0 * M_PI; // negative real axis reached via -0.0 imag
    else if (th < 0.0) th = 0.0;      // boundary roundoff
    return std::pow(r, p) * std::exp(Complex(0.0, th * p));
}

} // namespace

struct SusceptibilityModel::Node {
    Kind kind = Kind::Zero;
    Eigen::Index dim = 0;

    // leaf parameters
    SymMatrix shape;      // gamma / delta / strength / scale
    double tau_d = 0.0;   // Debye
    double omega0 = 0.0;  // Lorentz
    double gamma_l = 0.0; // Lorentz
    double alpha = 0.0;   // PowerLaw

    // composition
    std::vector<SusceptibilityModel> parts; // Sum
    SusceptibilityModel base;               // Conjugated
    Matrix c;                               // Conjugated

    double lorentz_nu() const { return std::sqrt(omega0 * omega0 - 0.25 * gamma_l * gamma_l); }

    // scalar kernel k(t) with chi(t) = k(t) * shape (leaves only)
    double kernel_time(double t) const {
        switch (kind) {
            case Kind::Zero: return 0.0;
            case Kind::Markov: return 1.0;
            case Kind::Debye: return std::exp(-t / tau_d) / tau_d;
            case Kind::Lorentz: {
                const double nu = lorentz_nu();
                const double damp = std::exp(-0.5 * gamma_l * t);
                if (nu * t == 0.0) return damp * t;
                return damp * std::sin(nu * t) / nu;
            }
            case Kind::PowerLaw:
                if (alpha == 0.0) return 1.0;
                return std::pow(t, alpha);
            default: throw Error("kernel_time on composite");
        }
    }

    double kernel_dt(double t) const {
        switch (kind) {
            case Kind::Zero: return 0.0;
            case Kind::Markov: return 0.0;
            case Kind::Debye: return -std::exp(-t / tau_d) / (tau_d * tau_d);
            case Kind::Lorentz: {
                const double nu = lorentz_nu();
                const double damp = std::exp(-0.5 * gamma_l * t);
                return damp * (std::cos(nu * t) - 0.5 * gamma_l * std::sin(nu * t) / nu);
            }
            case Kind::PowerLaw:
                if (alpha == 0.0) return 0.0;
                return alpha * std::pow(t, alpha - 1.0);
            default: throw Error("kernel_dt on composite");
        }
    }

    double kernel_zero_plus() const {
        switch (kind) {
            case Kind::Zero: return 0.0;
            case Kind::Markov: return 1.0;
            case Kind::Debye: return 1.0 / tau_d;
            case Kind::Lorentz: return 0.0;
            case Kind::PowerLaw: return alpha == 0.0 ? 1.0 : 0.0;
            default: throw Error("kernel_zero_plus on composite");
        }
    }

    Complex kernel_hat(Complex zeta) const {
        const Complex iu(0.0, 1.0);
        switch (kind) {
            case Kind::Zero: return 0.0;
            case Kind::Markov: return iu / zeta;
            case Kind::Debye: return 1.0 / (1.0 - iu * zeta * tau_d);
            case Kind::Lorentz:
                return 1.0 / (omega0 * omega0 - zeta * zeta - iu * gamma_l * zeta);
            case Kind::PowerLaw:
                return iu * gamma_ap1(alpha) * std::exp(Complex(0.0, 0.5 * M_PI * alpha)) /
                       upper_pow(zeta, alpha + 1.0);
            default: throw Error("kernel_hat on composite");
        }
    }

    // d/domega [omega k_hat(omega)] on the real axis
    Complex kernel_d_omega_omega_hat(double w) const {
        const Complex iu(0.0, 1.0);
        switch (kind) {
            case Kind::Zero: return 0.0;
            case Kind::Markov: return 0.0; // omega * i/omega = i
            case Kind::Debye: {
                const Complex d = 1.0 - iu * w * tau_d;
                return 1.0 / (d * d);
            }
            case Kind::Lorentz: {
                const Complex d = omega0 * omega0 - Complex(w * w, 0.0) - iu * gamma_l * w;
                return (omega0 * omega0 + w * w) / (d * d);
            }
            case Kind::PowerLaw: {
                // omega k_hat = i G e^{i pi a/2} omega^{-a} for omega > 0,
                // and d/domega[omega k_hat](-w) = conj(d/domega[omega k_hat](w))
                const Complex base = iu * gamma_ap1(alpha) * std::exp(Complex(0.0, 0.5 * M_PI * alpha));
                const Complex dpos = -alpha * base * std::pow(std::abs(w), -alpha - 1.0);
                return w > 0.0 ? dpos : std::conj(dpos);
            }
            default: throw Error("kernel_d_omega_omega_hat on composite");
        }
    }

    double kernel_phi(double w) const {
        switch (kind) {
            case Kind::Zero: return 0.0;
            case Kind::Markov: return 1.0;
            case Kind::Debye: {
                const double x = w * tau_d;
                return x * x / (tau_d * (1.0 + x * x));
            }
            case Kind::Lorentz: {
                const double a = omega0 * omega0 - w * w;
                return gamma_l * w * w / (a * a + gamma_l * gamma_l * w * w);
            }
            case Kind::PowerLaw:
                return gamma_ap1(alpha) * std::cos(0.5 * M_PI * alpha) * std::pow(std::abs(w), -alpha);
            default: throw Error("kernel_phi on composite");
        }
    }

    bool kernel_pole_on_axis(double w) const {
        switch (kind) {
            case Kind::Zero: return false;
            case Kind::Markov: return w == 0.0;
            case Kind::Debye: return false;
            case Kind::Lorentz: return gamma_l == 0.0 && std::abs(std::abs(w) - omega0) < 1e-12;
            case Kind::PowerLaw: return w == 0.0;
            default: throw Error("kernel_pole_on_axis on composite");
        }
    }

    // Phi(omega + i0) and d/domega[omega chi_hat] stay regular at the Markov
    // pole (omega chi_hat = i gamma there); only genuinely singular points:
    bool kernel_phi_singular(double w) const {
        switch (kind) {
            case Kind::Zero:
            case Kind::Markov:
            case Kind::Debye: return false;
            case Kind::Lorentz: return gamma_l == 0.0 && std::abs(std::abs(w) - omega0) < 1e-12;
            case Kind::PowerLaw: return alpha > 0.0 && w == 0.0;
            default: throw Error("kernel_phi_singular on composite");
        }
    }
};

SusceptibilityModel SusceptibilityModel::zero(Eigen::Index stress_dim) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Zero;
    n->dim = stress_dim;
    n->shape = SymMatrix::zero(stress_dim);
    return SusceptibilityModel(std::move(n));
}

SusceptibilityModel SusceptibilityModel::markov(SymMatrix gamma) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Markov;
    n->dim = gamma.dim();
    n->shape = std::move(gamma);
    return SusceptibilityModel(std::move(n));
}

SusceptibilityModel SusceptibilityModel::debye(SymMatrix delta, double tau_d) {
    if (!(tau_d > 0.0)) throw Error("Debye requires tau_d > 0");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Debye;
    n->dim = delta.dim();
    n->shape = std::move(delta);
    n->tau_d = tau_d;
    return SusceptibilityModel(std::move(n));
}

SusceptibilityModel SusceptibilityModel::lorentz(SymMatrix strength, double omega0, double gamma_l) {
    if (!(omega0 > 0.0)) throw Error("Lorentz requires omega0 > 0");
    if (gamma_l < 0.0) throw Error("Lorentz requires gamma_l >= 0");
    if (gamma_l >= 2.0 * omega0) throw Error("Lorentz supported only underdamped (gamma_l < 2 omega0)");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Lorentz;
    n->dim = strength.dim();
    n->shape = std::move(strength);
    n->omega0 = omega0;
    n->gamma_l = gamma_l;
    return SusceptibilityModel(std::move(n));
}

SusceptibilityModel SusceptibilityModel::power_law(double alpha, SymMatrix scale) {
    if (alpha < 0.0 || alpha > 1.0 / 3.0) throw Error("PowerLaw requires alpha in [0, 1/3]");
    auto n = std::make_shared<Node>();
    n->kind = Kind::PowerLaw;
    n->dim = scale.dim();
    n->shape = std::move(scale);
    n->alpha = alpha;
    return SusceptibilityModel(std::move(n));
}

SusceptibilityModel SusceptibilityModel::sum(std::vector<SusceptibilityModel> parts) {
    if (parts.empty()) throw Error("Sum requires at least one part");
    if (parts.size() == 1) return parts.front();
    const Eigen::Index d = parts.front().stress_dim();
    for (const auto& p : parts)
        if (p.stress_dim() != d) throw DimensionMismatch("Sum parts disagree on stress_dim");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Sum;
    n->dim = d;
    n->parts = std::move(parts);
    return SusceptibilityModel(std::move(n));
}

SusceptibilityModel SusceptibilityModel::conjugated(SusceptibilityModel base, Matrix c) {
    if (c.cols() != base.stress_dim()) throw DimensionMismatch("conjugated: C cols != base dim");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Conjugated;
    n->dim = c.rows();
    n->base = std::move(base);
    n->c = std::move(c);
    return SusceptibilityModel(std::move(n));
}

Eigen::Index SusceptibilityModel::stress_dim() const { return node_->dim; }
SusceptibilityModel::Kind SusceptibilityModel::kind() const { return node_->kind; }

SymMatrix SusceptibilityModel::chi_time(double t) const {
    if (t < 0.0) throw NegativeTime("chi_time requires t >= 0");
    switch (node_->kind) {
        case Kind::Sum: {
            SymMatrix acc = SymMatrix::zero(node_->dim);
            for (const auto& p : node_->parts) acc = acc + p.chi_time(t);
            return acc;
        }
        case Kind::Conjugated:
            return node_->base.chi_time(t).congruence(node_->c);
        default:
            return node_->shape * (t == 0.0 ? node_->kernel_zero_plus() : node_->kernel_time(t));
    }
}

SymMatrix SusceptibilityModel::odd_extension(double tau) const {
    if (tau > 0.0) return chi_time(tau);
    if (tau < 0.0) return chi_time(-tau) * (-1.0); // chi symmetric, so -chi(-tau)^T = -chi(-tau)
    SymMatrix z = chi_zero_plus();
    if (z.frobenius() > 0.0) throw UndefinedAtZero("odd extension at 0 with chi(0+) != 0");
    return z;
}

SymMatrix SusceptibilityModel::chi_zero_plus() const {
    switch (node_->kind) {
        case Kind::Sum: {
            SymMatrix acc = SymMatrix::zero(node_->dim);
            for (const auto& p : node_->parts) acc = acc + p.chi_zero_plus();
            return acc;
        }
        case Kind::Conjugated:
            return node_->base.chi_zero_plus().congruence(node_->c);
        default:
            return node_->shape * node_->kernel_zero_plus();
    }
}

SymMatrix SusceptibilityModel::chi_time_derivative(double t) const {
    if (!(t > 0.0)) throw NegativeTime("chi_time_derivative requires t > 0");
    switch (node_->kind) {
        case Kind::Sum: {
            SymMatrix acc = SymMatrix::zero(node_->dim);
            for (const auto& p : node_->parts) acc = acc + p.chi_time_derivative(t);
            return acc;
        }
        case Kind::Conjugated:
            return node_->base.chi_time_derivative(t).congruence(node_->c);
        default:
            return node_->shape * node_->kernel_dt(t);
    }
}

CMatrix SusceptibilityModel::chi_hat(Complex zeta) const {
    if (zeta.imag() < -1e-15) throw Error("chi_hat requires Im zeta >= 0");
    if (zeta.imag() <= 0.0 && pole_on_axis(zeta.real()))
        throw PoleOnAxis("chi_hat at real pole omega = " + std::to_string(zeta.real()));
    switch (node_->kind) {
        case Kind::Sum: {
            CMatrix acc = CMatrix::Zero(node_->dim, node_->dim);
            for (const auto& p : node_->parts) acc += p.chi_hat(zeta);
            return acc;
        }
        case Kind::Conjugated: {
            CMatrix b = node_->base.chi_hat(zeta);
            return node_->c.cast<Complex>() * b * node_->c.transpose().cast<Complex>();
        }
        default:
            return node_->shape.mat().cast<Complex>() * node_->kernel_hat(zeta);
    }
}

SymMatrix SusceptibilityModel::phi_boundary(double omega) const {
    if (phi_singular(omega))
        throw PoleOnAxis("phi_boundary at pole omega = " + std::to_string(omega));
    switch (node_->kind) {
        case Kind::Sum: {
            SymMatrix acc = SymMatrix::zero(node_->dim);
            for (const auto& p : node_->parts) acc = acc + p.phi_boundary(omega);
            return acc;
        }
        case Kind::Conjugated:
            return node_->base.phi_boundary(omega).congruence(node_->c);
        default:
            return node_->shape * node_->kernel_phi(omega);
    }
}

CMatrix SusceptibilityModel::d_omega_omega_chi_hat(double omega) const {
    if (phi_singular(omega)) throw PoleOnAxis("d_omega_omega_chi_hat at pole");
    switch (node_->kind) {
        case Kind::Sum: {
            CMatrix acc = CMatrix::Zero(node_->dim, node_->dim);
            for (const auto& p : node_->parts) acc += p.d_omega_omega_chi_hat(omega);
            return acc;
        }
        case Kind::Conjugated: {
            CMatrix b = node_->base.d_omega_omega_chi_hat(omega);
            return node_->c.cast<Complex>() * b * node_->c.transpose().cast<Complex>();
        }
        default:
            return node_->shape.mat().cast<Complex>() * node_->kernel_d_omega_omega_hat(omega);
    }
}

bool SusceptibilityModel::pole_on_axis(double omega) const {
    switch (node_->kind) {
        case Kind::Sum:
            for (const auto& p : node_->parts)
                if (p.pole_on_axis(omega)) return true;
            return false;
        case Kind::Conjugated:
            return node_->base.pole_on_axis(omega);
        default:
            return node_->kernel_pole_on_axis(omega);
    }
}

bool SusceptibilityModel::phi_singular(double omega) const {
    switch (node_->kind) {
        case Kind::Sum:
            for (const auto& p : node_->parts)
                if (p.phi_singular(omega)) return true;
            return false;
        case Kind::Conjugated:
            return node_->base.phi_singular(omega);
        default:
            return node_->kernel_phi_singular(omega);
    }
}

bool SusceptibilityModel::singular_at_zero() const {
    switch (node_->kind) {
        case Kind::Sum:
            for (const auto& p : node_->parts)
                if (p.singular_at_zero()) return true;
            return false;
        case Kind::Conjugated:
            return node_->base.singular_at_zero();
        case Kind::PowerLaw:
            return node_->alpha > 0.0;
        default:
            return false;
    }
}

SymMatrix SusceptibilityModel::phi_moment(double a, double b) const {
    if (!(0.0 <= a && a < b)) throw Error("phi_moment requires 0 <= a < b");
    switch (node_->kind) {
        case Kind::Sum: {
            SymMatrix acc = SymMatrix::zero(node_->dim);
            for (const auto& p : node_->parts) acc = acc + p.phi_moment(a, b);
            return acc;
        }
        case Kind::Conjugated:
            return node_->base.phi_moment(a, b).congruence(node_->c);
        case Kind::PowerLaw: {
            const double al = node_->alpha;
            const double c0 = gamma_ap1(al) * std::cos(0.5 * M_PI * al);
            const double integral =
                c0 * (std::pow(b, 1.0 - al) - std::pow(a, 1.0 - al)) / (1.0 - al);
            return node_->shape * integral;
        }
        default: {
            // smooth kernels: Simpson on [a,b]
            const double m = 0.5 * (a + b);
            const double fa = node_->kernel_phi(a);
            const double fm = node_->kernel_phi(m);
            const double fb = node_->kernel_phi(b);
            return node_->shape * ((b - a) / 6.0 * (fa + 4.0 * fm + fb));
        }
    }
}

std::optional<SymMatrix> SusceptibilityModel::separable_shape() const {
    switch (node_->kind) {
        case Kind::Sum:
            return std::nullopt;
        case Kind::Conjugated: {
            auto b = node_->base.separable_shape();
            if (!b) return std::nullopt;
            return b->congruence(node_->c);
        }
        default:
            return node_->shape;
    }
}

SusceptibilityModel SusceptibilityModel::scalar_unit() const {
    switch (node_->kind) {
        case Kind::Sum:
            throw Error("scalar_unit: model is not separable");
        case Kind::Conjugated:
            return node_->base.scalar_unit();
        default: {
            auto unit_node = std::make_shared<Node>(*node_);
            unit_node->dim = 1;
            unit_node->shape = SymMatrix::scalar(1.0);
            unit_node->parts.clear();
            return SusceptibilityModel(std::move(unit_node));
        }
    }
}

FrictionFunction friction_function(const SusceptibilityModel& model) {
    FrictionFunction f;
    f.dirac_weight = model.chi_zero_plus();
    f.smooth_part = [model](double t) { return model.chi_time_derivative(t); };
    return f;
}

PdcReport check_pdc(const SusceptibilityModel& model,
                    const std::vector<double>& omega_grid,
                    const std::vector<double>& eta_grid,
                    double pdc_tol) {
    PdcReport rep;
    rep.pdc_tol = pdc_tol;
    rep.min_eig = std::numeric_limits<double>::infinity();
    bool any = false;
    auto consider = [&](double omega, double eta) {
        if (eta == 0.0 && model.phi_singular(omega)) return;
        double me;
        if (eta == 0.0) {
            me = model.phi_boundary(omega).min_eigenvalue();
        } else {
            CMatrix zchat = Complex(omega, eta) * model.chi_hat(Complex(omega, eta));
            // symmetric complex matrix: Im part is the elementwise imaginary part
            SymMatrix im{Matrix(0.5 * (zchat.imag() + zchat.imag().transpose().eval()))};
            me = im.min_eigenvalue();
        }
        rep.grid.push_back({omega, eta});
        if (me < rep.min_eig) {
            rep.min_eig = me;
            rep.worst = {omega, eta};
        }
        any = true;
    };
    for (double w : omega_grid) {
        consider(w, 0.0);
        for (double eta : eta_grid)
            if (eta > 0.0) consider(w, eta);
    }
    if (!any) {
        rep.min_eig = 0.0;
        rep.passed = true;
        return rep;
    }
    rep.passed = rep.min_eig >= -pdc_tol;
    return rep;
}

std::vector<double> pdc_omega_grid(double omega_max, int n) {
    std::vector<double> g;
    g.reserve(n);
    const double dw = 2.0 * omega_max / n;
    for (int i = 0; i < n; ++i) g.push_back(-omega_max + (i + 0.5) * dw);
    return g;
}

} // namespace tdd
