#include "tdd/coupling.hpp"

#include <cmath>
#include <iomanip>

namespace tdd {

SymMatrix coupling_hat(const SusceptibilityModel& model, double kappa) {
    return psd_sqrt(model.phi_boundary(kappa) * 2.0);
}

SymMatrix CouplingFunction::phi_inf() const { return phi_inf_m_; }

SymMatrix CouplingFunction::cell_moment() const {
    if (!singular_) return SymMatrix::zero(dim_);
    if (sep_) return sep_->shape * sep_->cell_moment;
    return cell_moment_m_;
}

SymMatrix CouplingFunction::sigma_hat(int j) const {
    if (sep_) {
        const double phi = sep_->phi[j];
        if (phi < -reg_clamp_ - 1e-15) throw NotPSD("sigma_hat: negative phi sample");
        return SymMatrix(Matrix(std::sqrt(2.0 * std::max(phi, 0.0)) * sep_->sqrt_mat()));
    }
    return psd_sqrt(phi_m_[j] * 2.0, reg_clamp_ > 0 ? 2.0 * reg_clamp_ + 1e-12 : -1.0);
}

SymMatrix CouplingFunction::phi_reg(int j) const {
    if (sep_) return sep_->shape * (sep_->phi[j] - sep_->phi_inf);
    return phi_m_[j] - phi_inf_m_;
}

SymMatrix CouplingFunction::sigma_hat_reg(int j) const {
    if (!reg_psd_)
        throw NotPSD("coupling remainder Phi - Phi_inf is signed; no real string coupling exists "
                     "for the regular part of this model");
    if (sep_) {
        const double p = std::max(sep_->phi[j] - sep_->phi_inf, 0.0);
        return SymMatrix(Matrix(std::sqrt(2.0 * p) * sep_->sqrt_mat()));
    }
    return psd_sqrt(phi_reg(j) * 2.0, 2.0 * reg_clamp_ + 1e-12);
}

std::vector<double> CouplingFunction::spatial_profile(const std::vector<double>& s_grid) const {
    if (!reg_psd_) throw NotPSD("spatial samples need a PSD regular part");
    if (!sep_) throw Error("spatial_profile requires a separable coupling");
    std::vector<double> out;
    out.reserve(s_grid.size());
    for (double s : s_grid) {
        double acc = 0.0;
        for (size_t j = 0; j < kappa_.size(); ++j) {
            const double p = std::max(sep_->phi[j] - sep_->phi_inf, 0.0);
            acc += w_[j] * std::sqrt(2.0 * p) * std::cos(kappa_[j] * std::abs(s));
        }
        if (singular_) {
            // sqrt-weighted central cell; phi ~ c k^-a there, integrate sqrt(2 phi)
            const double pa = std::max(sep_->phi[0] - sep_->phi_inf, 0.0);
            acc += std::sqrt(2.0 * pa) * dkappa_ * std::cos(0.5 * dkappa_ * std::abs(s));
        }
        out.push_back(acc / M_PI);
    }
    return out;
}

std::vector<SymMatrix> CouplingFunction::spatial_samples(const std::vector<double>& s_grid) const {
    if (!reg_psd_) throw NotPSD("spatial samples need a PSD regular part");
    std::vector<SymMatrix> out;
    out.reserve(s_grid.size());
    if (sep_) {
        auto prof = spatial_profile(s_grid);
        const Matrix sq = sep_->sqrt_mat();
        for (size_t i = 0; i < s_grid.size(); ++i)
            out.push_back(SymMatrix(Matrix(prof[i] * sq)));
        return out;
    }
    std::vector<SymMatrix> roots;
    roots.reserve(kappa_.size());
    for (size_t j = 0; j < kappa_.size(); ++j) roots.push_back(sigma_hat_reg(static_cast<int>(j)));
    for (double s : s_grid) {
        Matrix acc = Matrix::Zero(dim_, dim_);
        for (size_t j = 0; j < kappa_.size(); ++j)
            acc += w_[j] * std::cos(kappa_[j] * std::abs(s)) * roots[j].mat();
        out.push_back(SymMatrix(Matrix(acc / M_PI)));
    }
    return out;
}

CouplingFunction build_coupling(const SusceptibilityModel& model, double dkappa,
                                double kappa_max, const CouplingOptions& opts) {
    if (!(dkappa > 0.0) || !(kappa_max > dkappa)) throw Error("build_coupling: bad grid");
    CouplingFunction c;
    c.dim_ = model.stress_dim();
    c.dkappa_ = dkappa;
    c.kappa_max_ = kappa_max;
    c.singular_ = model.singular_at_zero();

    const int n = static_cast<int>(std::lround(kappa_max / dkappa));
    const int j0 = c.singular_ ? 1 : 0;
    for (int j = j0; j <= n; ++j) {
        c.kappa_.push_back(j * dkappa);
        c.w_.push_back(dkappa);
    }
    c.w_.front() *= 0.5;
    c.w_.back() *= 0.5;
    if (c.singular_) c.w_.front() *= 2.0; // cell [0,dk] handled by the moment below

    auto sep_shape = model.separable_shape();
    double max_phi_norm = 0.0;

    if (sep_shape) {
        // PSD gate on the shape (raises NotPSD for e.g. the sign-flipped power law)
        CouplingFunction::SeparableData sd;
        const SusceptibilityModel unit = model.scalar_unit();
        sd.shape = *sep_shape;
        const Matrix& sm = sd.shape.mat();
        double offdiag = 0.0, mindiag = 0.0, maxabs = 0.0;
        for (Eigen::Index j = 0; j < sm.cols(); ++j)
            for (Eigen::Index i = 0; i < sm.rows(); ++i) {
                if (i != j) offdiag = std::max(offdiag, std::abs(sm(i, j)));
                else {
                    mindiag = std::min(mindiag, sm(i, i));
                    maxabs = std::max(maxabs, std::abs(sm(i, i)));
                }
            }
        double shape_norm;
        if (offdiag == 0.0) {
            // diagonal shapes (field grids) skip the dense eigendecomposition
            if (mindiag < -1e-10 * std::max(maxabs, 1.0))
                throw NotPSD("shape has negative diagonal " + std::to_string(mindiag));
            sd.diag = true;
            sd.eigvals = sm.diagonal();
            shape_norm = maxabs;
        } else {
            sd.shape_sqrt = psd_sqrt(sd.shape).mat();
            Eigen::SelfAdjointEigenSolver<Matrix> es(sm);
            sd.eigvals = es.eigenvalues();
            sd.eigvecs = es.eigenvectors();
            shape_norm = sd.shape.spectral_norm();
        }
        for (double k : c.kappa_) {
            const double p = unit.phi_boundary(k)(0, 0);
            if (p < -opts.pdc_tol) throw NotPSD("Phi(kappa) negative at kappa = " + std::to_string(k));
            sd.phi.push_back(std::max(p, 0.0));
            max_phi_norm = std::max(max_phi_norm, std::abs(p) * shape_norm);
        }
        if (c.singular_) sd.cell_moment = unit.phi_moment(0.0, dkappa)(0, 0);

        const double phi_k = sd.phi.back();
        const double phi_09 = unit.phi_boundary(0.9 * kappa_max)(0, 0);
        const double scale = std::max(1.0, max_phi_norm);
        if (std::abs(phi_k) * shape_norm <= opts.tail_tol * scale) {
            sd.phi_inf = 0.0;
        } else if (std::abs(phi_k - phi_09) * shape_norm <= opts.flat_tol * scale) {
            sd.phi_inf = phi_k;
        } else {
            throw TailNotResolved("Phi_reg(kappa_max) = " + std::to_string(phi_k * shape_norm) +
                                  " has not decayed; raise kappa_max");
        }
        double clamp = 0.0;
        for (double p : sd.phi) clamp = std::max(clamp, sd.phi_inf - p);
        c.reg_clamp_ = clamp * shape_norm;
        c.reg_psd_ = c.reg_clamp_ <= 0.05 * scale;
        c.phi_inf_m_ = sd.shape * sd.phi_inf;
        c.sep_ = std::move(sd);
    } else {
        std::vector<SymMatrix> phis;
        phis.reserve(c.kappa_.size());
        for (double k : c.kappa_) {
            SymMatrix p = model.phi_boundary(k);
            const double me = p.min_eigenvalue();
            if (me < -opts.pdc_tol * std::max(1.0, p.spectral_norm()))
                throw NotPSD("Phi(kappa) has eigenvalue " + std::to_string(me) + " at kappa = " +
                             std::to_string(k));
            max_phi_norm = std::max(max_phi_norm, p.spectral_norm());
            phis.push_back(std::move(p));
        }
        const double scale = std::max(1.0, max_phi_norm);
        SymMatrix phi_k = phis.back();
        SymMatrix phi_09 = model.phi_boundary(0.9 * kappa_max);
        if (phi_k.spectral_norm() <= opts.tail_tol * scale) {
            c.phi_inf_m_ = SymMatrix::zero(c.dim_);
        } else if ((phi_k - phi_09).spectral_norm() <= opts.flat_tol * scale) {
            c.phi_inf_m_ = phi_k;
        } else {
            throw TailNotResolved("Phi_reg(kappa_max) has not decayed; raise kappa_max");
        }
        double clamp = 0.0;
        for (const auto& p : phis) clamp = std::max(clamp, -(p - c.phi_inf_m_).min_eigenvalue());
        c.reg_clamp_ = std::max(clamp, 0.0);
        c.reg_psd_ = c.reg_clamp_ <= 0.05 * scale;
        if (c.singular_) c.cell_moment_m_ = model.phi_moment(0.0, dkappa);
        c.phi_m_ = std::move(phis);
    }

    c.has_dirac_ = c.phi_inf_m_.spectral_norm() > 0.0;
    c.dirac_weight_ = psd_sqrt(c.phi_inf_m_ * 2.0);
    return c;
}

double verify_herglotz(const CouplingFunction& c, const SusceptibilityModel& model,
                       const std::vector<Complex>& zeta_probes) {
    double worst = 0.0;
    const auto& kappa = c.kappa_grid();
    const auto& w = c.quad_weights();
    for (Complex zeta : zeta_probes) {
        if (!(zeta.imag() > 0.0)) throw Error("verify_herglotz probes need Im zeta > 0");
        CMatrix quad = CMatrix::Zero(c.stress_dim(), c.stress_dim());
        if (c.separable()) {
            const auto& sd = *c.separable();
            Complex acc = 0.0;
            for (size_t j = 0; j < kappa.size(); ++j)
                acc += w[j] * (sd.phi[j] - sd.phi_inf) / (kappa[j] * kappa[j] - zeta * zeta);
            if (c.singular_cell()) {
                const double kc = 0.5 * c.dkappa();
                acc += (sd.cell_moment - sd.phi_inf * c.dkappa()) / (kc * kc - zeta * zeta);
            }
            quad = (2.0 / M_PI * acc) * sd.shape.mat().cast<Complex>();
            quad += (Complex(0.0, 1.0) / zeta) * (sd.phi_inf * sd.shape.mat()).cast<Complex>();
        } else {
            for (size_t j = 0; j < kappa.size(); ++j)
                quad += (2.0 / M_PI * w[j] / (kappa[j] * kappa[j] - zeta * zeta)) *
                        c.phi_reg(static_cast<int>(j)).mat().cast<Complex>();
            if (c.singular_cell()) {
                const double kc = 0.5 * c.dkappa();
                Matrix cell = c.cell_moment().mat() - c.dkappa() * c.phi_inf().mat();
                quad += (2.0 / M_PI / (kc * kc - zeta * zeta)) * cell.cast<Complex>();
            }
            quad += (Complex(0.0, 1.0) / zeta) * c.phi_inf().mat().cast<Complex>();
        }
        CMatrix exact = model.chi_hat(zeta);
        const double denom = std::max(exact.norm(), 1e-300);
        worst = std::max(worst, (quad - exact).norm() / denom);
    }
    return worst;
}

std::vector<SymMatrix> reconstruct_chi(const CouplingFunction& c,
                                       const std::vector<double>& tau_grid) {
    std::vector<SymMatrix> out;
    out.reserve(tau_grid.size());
    const auto& kappa = c.kappa_grid();
    const auto& w = c.quad_weights();
    auto sinc = [](double k, double tau) { return k == 0.0 ? tau : std::sin(k * tau) / k; };
    for (double tau : tau_grid) {
        if (!(tau > 0.0)) throw Error("reconstruct_chi requires tau > 0");
        if (c.separable()) {
            const auto& sd = *c.separable();
            double acc = 0.0;
            for (size_t j = 0; j < kappa.size(); ++j)
                acc += w[j] * (sd.phi[j] - sd.phi_inf) * sinc(kappa[j], tau);
            if (c.singular_cell())
                acc += (sd.cell_moment - sd.phi_inf * c.dkappa()) * sinc(0.5 * c.dkappa(), tau);
            out.push_back(SymMatrix(
                Matrix((2.0 / M_PI * acc + sd.phi_inf) * sd.shape.mat())));
        } else {
            Matrix acc = Matrix::Zero(c.stress_dim(), c.stress_dim());
            for (size_t j = 0; j < kappa.size(); ++j)
                acc += w[j] * sinc(kappa[j], tau) * c.phi_reg(static_cast<int>(j)).mat();
            if (c.singular_cell()) {
                Matrix cell = c.cell_moment().mat() - c.dkappa() * c.phi_inf().mat();
                acc += sinc(0.5 * c.dkappa(), tau) * cell;
            }
            out.push_back(SymMatrix(Matrix(2.0 / M_PI * acc + c.phi_inf().mat())));
        }
    }
    return out;
}

void CouplingFunction::write_csv(std::ostream& os) const {
    os << "kappa";
    if (dim_ <= 8) {
        for (Eigen::Index a = 0; a < dim_; ++a)
            for (Eigen::Index b = a; b < dim_; ++b) os << ",sigma_hat_" << a << "_" << b;
    } else {
        os << ",sigma_hat_profile";
    }
    os << "\n";
    char buf[32];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    for (size_t j = 0; j < kappa_.size(); ++j) {
        os << num(kappa_[j]);
        if (dim_ <= 8) {
            SymMatrix s = sigma_hat(static_cast<int>(j));
            for (Eigen::Index a = 0; a < dim_; ++a)
                for (Eigen::Index b = a; b < dim_; ++b) os << "," << num(s(a, b));
        } else if (sep_) {
            os << "," << num(std::sqrt(2.0 * std::max(sep_->phi[j], 0.0)));
        }
        os << "\n";
    }
}

} // namespace tdd
