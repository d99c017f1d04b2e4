#include "tdd/reduced.hpp"

#include <cmath>

namespace tdd {

LosslessTrajectory solve_lossless(const SystemSpec& spec, const Vector& u0, double t_final,
                                  double sample_dt) {
    spec.validate();
    if (!spec.linear()) throw Error("solve_lossless handles quadratic Hamiltonians only");
    if (u0.size() != spec.dim_V()) throw DimensionMismatch("solve_lossless u0");
    SkewMatrix a(Matrix(spec.K * spec.J * spec.K.transpose()));
    const Matrix e1 = skew_exp(a, sample_dt);
    const Matrix s1 = skew_exp_integral(a, sample_dt);

    LosslessTrajectory out;
    const long n = std::lround(t_final / sample_dt);
    Vector f = spec.K * u0;
    Vector w = s1 * f;           // e^{t_k A} int_0^{dt} e^{sA} ds K u0
    Vector cum = Vector::Zero(f.size());
    const Matrix jkt = spec.J * spec.K.transpose();
    for (long k = 0; k <= n; ++k) {
        out.t.push_back(k * sample_dt);
        out.u.push_back(u0 + jkt * cum);
        out.f.push_back(f);
        cum += w;
        w = e1 * w;
        f = e1 * f;
    }
    return out;
}

VolterraResult solve_volterra(const SystemSpec& spec, const SusceptibilityModel& model,
                              const Drive& drive, double dt, double t_final,
                              const VolterraOptions& opts) {
    spec.validate();
    if (!spec.linear()) throw Error("solve_volterra handles linear systems only");
    if (model.stress_dim() != spec.dim_H())
        throw DimensionMismatch("solve_volterra: model stress_dim != spec dim_H");
    const long n_steps = std::lround(t_final / dt);
    const Eigen::Index dh = spec.dim_H();

    VolterraResult res;
    res.dt = dt;
    res.t.reserve(n_steps + 1);
    res.u.reserve(n_steps + 1);
    res.f.reserve(n_steps + 1);

    Vector u = opts.u0 ? *opts.u0 : Vector::Zero(spec.dim_V());
    Vector f = opts.u0 ? Vector(spec.K * u) : Vector::Zero(dh);

    const Matrix kjkt = spec.K * spec.J * spec.K.transpose();
    const SymMatrix chi0 = model.chi_zero_plus();
    Eigen::PartialPivLU<Matrix> lhs(
        Matrix(Matrix::Identity(dh, dh) + 0.5 * dt * chi0.mat() - 0.5 * dt * kjkt));
    if (std::abs(lhs.determinant()) < 1e-300)
        throw SingularStep("Volterra step matrix is singular");

    // lag kernels chi(k dt); separable models project the history onto the
    // shape eigenchannels and run contiguous scalar dot products
    auto sep_shape = model.separable_shape();
    const bool zero_kind = model.kind() == SusceptibilityModel::Kind::Zero;
    std::vector<double> revker; // revker[M - k] = ker(k dt), M = n_steps + 1
    std::vector<Matrix> ker_m;
    const long m_end = n_steps + 1;
    Eigen::SelfAdjointEigenSolver<Matrix> shape_es;
    std::vector<std::vector<double>> chan_hist;
    std::vector<int> chan_idx;
    if (sep_shape && !zero_kind) {
        const SusceptibilityModel unit = model.scalar_unit();
        revker.assign(m_end + 1, 0.0);
        for (long k = 1; k <= m_end; ++k) revker[m_end - k] = unit.chi_time(k * dt)(0, 0);
        shape_es.compute(sep_shape->mat());
        for (Eigen::Index r = 0; r < shape_es.eigenvalues().size(); ++r)
            if (std::abs(shape_es.eigenvalues()(r)) > 1e-300)
                chan_idx.push_back(static_cast<int>(r));
        chan_hist.assign(chan_idx.size(), {});
        for (size_t rr = 0; rr < chan_idx.size(); ++rr) {
            chan_hist[rr].reserve(n_steps + 1);
            chan_hist[rr].push_back(shape_es.eigenvectors().col(chan_idx[rr]).dot(f));
        }
    } else if (!zero_kind) {
        ker_m.resize(n_steps + 2);
        for (long k = 1; k <= n_steps + 1; ++k) ker_m[k] = model.chi_time(k * dt).mat();
    }

    std::vector<Vector> fs;
    fs.reserve(n_steps + 1);
    fs.push_back(f);
    res.t.push_back(0.0);
    res.u.push_back(u);
    res.f.push_back(f);
    res.work_ext.push_back(0.0);

    double work = 0.0;
    Vector rho_n = drive.is_zero() ? Vector::Zero(spec.dim_V()) : drive(0.0);
    for (long n = 0; n < n_steps; ++n) {
        const double t1 = (n + 1) * dt;
        Vector rho_n1 = drive.is_zero() ? Vector::Zero(spec.dim_V()) : drive(t1);

        // trapezoid history sum over tau = dt ... t1 (the tau = 0 node sits on the LHS)
        Vector conv = Vector::Zero(dh);
        if (zero_kind) {
            // dispersionless: no history
        } else if (sep_shape) {
            // sum_{k=1..n} ker[k] a[n+1-k] = <revker[M-n .. M-1], a[1 .. n]>
            for (size_t rr = 0; rr < chan_idx.size(); ++rr) {
                const auto& h = chan_hist[rr];
                double s = 0.0;
                if (n > 0)
                    s = Eigen::Map<const Vector>(revker.data() + (m_end - n), n)
                            .dot(Eigen::Map<const Vector>(h.data() + 1, n));
                s = dt * s + 0.5 * dt * revker[m_end - (n + 1)] * h[0];
                conv += (shape_es.eigenvalues()(chan_idx[rr]) * s) *
                        shape_es.eigenvectors().col(chan_idx[rr]);
            }
        } else {
            for (long k = 1; k <= n; ++k) conv += dt * (ker_m[k] * fs[n + 1 - k]);
            conv += 0.5 * dt * (ker_m[n + 1] * fs[0]);
        }

        Vector rhs = spec.K * u + 0.5 * dt * (kjkt * f) +
                     0.5 * dt * (spec.K * (rho_n + rho_n1)) - conv;
        Vector f1 = lhs.solve(rhs);
        if (!f1.allFinite()) throw SingularStep("non-finite Volterra step");

        u += 0.5 * dt * (spec.J * (spec.K.transpose() * (f + f1)) + rho_n + rho_n1);
        work += 0.5 * dt * (f.dot(spec.K * rho_n) + f1.dot(spec.K * rho_n1));
        f = std::move(f1);
        fs.push_back(f);
        for (size_t rr = 0; rr < chan_idx.size(); ++rr)
            chan_hist[rr].push_back(shape_es.eigenvectors().col(chan_idx[rr]).dot(f));
        rho_n = std::move(rho_n1);

        res.t.push_back(t1);
        res.u.push_back(u);
        res.f.push_back(f);
        res.work_ext.push_back(work);
    }
    return res;
}

double friction_work(const SusceptibilityModel& model, const std::vector<Vector>& f_samples,
                     double dt) {
    if (f_samples.empty()) return 0.0;
    const size_t n = f_samples.size();
    const Eigen::Index dh = model.stress_dim();
    if (f_samples.front().size() != dh) throw DimensionMismatch("friction_work samples");

    std::vector<double> tw(n, dt);
    tw.front() = 0.5 * dt;
    tw.back() = 0.5 * dt;

    auto sep_shape = model.separable_shape();
    const bool singular = model.singular_at_zero();

    if (sep_shape) {
        const SusceptibilityModel unit = model.scalar_unit();
        Eigen::SelfAdjointEigenSolver<Matrix> es(sep_shape->mat());
        const double k0p = unit.chi_zero_plus()(0, 0);
        std::vector<double> dchi(n, 0.0);
        for (size_t l = 1; l < n; ++l) dchi[l] = unit.chi_time_derivative(l * dt)(0, 0);
        dchi[0] = singular
                      ? 2.0 / dt * (unit.chi_time(0.5 * dt)(0, 0) - k0p)
                      : (model.kind() == SusceptibilityModel::Kind::Markov ||
                                 model.kind() == SusceptibilityModel::Kind::Zero
                             ? 0.0
                             : unit.chi_time_derivative(1e-14)(0, 0));

        double w_total = 0.0;
        for (Eigen::Index r = 0; r < es.eigenvalues().size(); ++r) {
            const double lam = es.eigenvalues()(r);
            if (lam == 0.0) continue;
            Vector a(n);
            for (size_t k = 0; k < n; ++k)
                a(k) = tw[k] * es.eigenvectors().col(r).dot(f_samples[k]);
            // Dirac diagonal: -sum tw <f, chi0 f> (note a already carries one tw)
            double dirac = 0.0;
            for (size_t k = 0; k < n; ++k) dirac += a(k) * a(k) / tw[k];
            // lag sums
            double smooth = 0.0;
            for (size_t l = 0; l < n; ++l) {
                double corr = 0.0;
                for (size_t k = 0; k + l < n; ++k) corr += a(k) * a(k + l);
                smooth += (l == 0 ? 1.0 : 2.0) * dchi[l] * corr;
            }
            w_total += lam * (-k0p * dirac - 0.5 * smooth);
        }
        return w_total;
    }

    const SymMatrix chi0 = model.chi_zero_plus();
    std::vector<Matrix> dchi(n);
    for (size_t l = 1; l < n; ++l) dchi[l] = model.chi_time_derivative(l * dt).mat();
    if (singular)
        dchi[0] = 2.0 / dt * (model.chi_time(0.5 * dt).mat() - chi0.mat());
    else {
        bool zero0 = true;
        try {
            dchi[0] = model.chi_time_derivative(1e-14).mat();
            zero0 = false;
        } catch (const Error&) {
        }
        if (zero0) dchi[0] = Matrix::Zero(dh, dh);
    }

    double dirac = 0.0, smooth = 0.0;
    for (size_t k = 0; k < n; ++k) dirac += tw[k] * f_samples[k].dot(chi0.mat() * f_samples[k]);
    for (size_t k = 0; k < n; ++k)
        for (size_t m = 0; m < n; ++m)
            smooth += tw[k] * tw[m] *
                      f_samples[k].dot(dchi[k >= m ? k - m : m - k] * f_samples[m]);
    return -dirac - 0.5 * smooth;
}

} // namespace tdd
