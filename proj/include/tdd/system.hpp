#pragma once

#include <functional>
#include <optional>

#include "tdd/linalg.hpp"

namespace tdd {

struct PqSplit {
    Eigen::Index n_p = 0, n_q = 0; // phase-space block sizes (p first)
    Eigen::Index m_p = 0, m_q = 0; // stress-space block sizes
};

// Finite-dimensional quadratic Hamiltonian system h(u) = |K u|^2 / 2 with
// symplectic J, optionally extended by a nonlinear term h1 through its
// gradient (the dissipation always enters linearly).
struct SystemSpec {
    Matrix J;
    Matrix K;
    std::function<Vector(const Vector&)> grad_h1;
    std::function<double(const Vector&)> h1;
    std::optional<PqSplit> split;

    Eigen::Index dim_V() const { return J.rows(); }
    Eigen::Index dim_H() const { return K.rows(); }
    bool linear() const { return !grad_h1; }

    void validate(double tol = 1e-12) const {
        auto rep = check_symplectic(J, tol);
        if (!rep.ok) throw Error("SystemSpec: J is not symplectic");
        if (K.cols() != J.rows()) throw DimensionMismatch("SystemSpec: K cols != dim V");
        require_finite(K, "SystemSpec K");
        if (split) {
            if (split->n_p + split->n_q != dim_V() || split->m_p + split->m_q != dim_H())
                throw DimensionMismatch("SystemSpec: split sizes");
            if (K.topRightCorner(split->m_p, split->n_q).norm() != 0.0 ||
                K.bottomLeftCorner(split->m_q, split->n_p).norm() != 0.0)
                throw Error("SystemSpec: p/q split requires block-diagonal K");
        }
    }
};

// Compactly supported external force rho(t) in V.
class Drive {
public:
    Drive() = default;

    static Drive zero(Eigen::Index dim_v) {
        Drive d;
        d.dim_ = dim_v;
        return d;
    }

    // amplitude * exp(-(t-t0)^2 / (2 w^2)), hard-zeroed beyond 6 widths
    static Drive gaussian_pulse(double t0, double width, Vector amplitude) {
        Drive d;
        d.dim_ = amplitude.size();
        d.t0_ = t0;
        d.width_ = width;
        d.amp_ = std::move(amplitude);
        d.kind_ = Kind::Gaussian;
        return d;
    }

    // amplitude * cos(omega (t-t0)) * gaussian envelope
    static Drive modulated_carrier(double omega, double t0, double width, Vector amplitude) {
        Drive d = gaussian_pulse(t0, width, std::move(amplitude));
        d.omega_ = omega;
        d.kind_ = Kind::Modulated;
        return d;
    }

    Vector operator()(double t) const {
        if (kind_ == Kind::Zero) return Vector::Zero(dim_);
        const double x = t - t0_;
        if (std::abs(x) > 6.0 * width_) return Vector::Zero(dim_);
        const double env = std::exp(-0.5 * x * x / (width_ * width_));
        if (kind_ == Kind::Gaussian) return env * amp_;
        return (env * std::cos(omega_ * x)) * amp_;
    }

    bool is_zero() const { return kind_ == Kind::Zero; }
    double t_begin() const { return kind_ == Kind::Zero ? 0.0 : t0_ - 6.0 * width_; }
    double t_end() const { return kind_ == Kind::Zero ? 0.0 : t0_ + 6.0 * width_; }
    double carrier() const { return omega_; }
    double width() const { return width_; }
    Eigen::Index dim() const { return dim_; }

private:
    enum class Kind { Zero, Gaussian, Modulated };
    Kind kind_ = Kind::Zero;
    Eigen::Index dim_ = 0;
    double t0_ = 0.0, width_ = 1.0, omega_ = 0.0;
    Vector amp_;
};

} // namespace tdd
