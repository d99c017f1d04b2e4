#include "tdd/analysis.hpp"

#include <cmath>

namespace tdd {

void fft_radix2(std::vector<Complex>& a, bool inverse) {
    const size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0) throw Error("fft size must be a power of two");
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * M_PI / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        const Complex wl(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            Complex w(1.0, 0.0);
            for (size_t k = 0; k < len / 2; ++k) {
                Complex u = a[i + k];
                Complex v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse)
        for (auto& x : a) x /= static_cast<double>(n);
}

namespace {

std::vector<double> blackman_sinc(double cutoff, double dt, int half) {
    // cutoff in rad/s; kernel length 2*half+1
    std::vector<double> h(2 * half + 1);
    const double fc = cutoff * dt / (2.0 * M_PI); // cycles per sample
    double sum = 0.0;
    for (int i = -half; i <= half; ++i) {
        const double x = 2.0 * M_PI * fc * i;
        const double sinc = i == 0 ? 2.0 * fc : std::sin(x) / (M_PI * i);
        const double u = (i + half) / static_cast<double>(2 * half);
        const double win = 0.42 - 0.5 * std::cos(2.0 * M_PI * u) + 0.08 * std::cos(4.0 * M_PI * u);
        h[i + half] = sinc * win;
        sum += h[i + half];
    }
    for (auto& v : h) v /= sum; // unit DC gain
    return h;
}

} // namespace

Envelope demodulate(const std::vector<Vector>& signal, double dt, double omega,
                    double lowpass_cut) {
    if (signal.empty()) throw Error("demodulate: empty signal");
    if (!(omega > 0.0)) throw Error("demodulate: omega must be positive");
    const double samples_per_period = 2.0 * M_PI / (omega * dt);
    if (samples_per_period < 20.0)
        throw UnderSampled("need >= 20 samples per carrier period, have " +
                           std::to_string(samples_per_period));
    if (lowpass_cut <= 0.0) lowpass_cut = 0.25 * omega;

    const Eigen::Index dim = signal.front().size();
    const size_t n = signal.size();

    // transition width ~ lowpass_cut/2 sets the kernel length
    int half = static_cast<int>(std::ceil(2.0 * M_PI * 5.98 / (0.5 * lowpass_cut * dt) / 2.0));
    half = std::min<int>(half, static_cast<int>(n / 2) - 1);
    if (half < 4) throw UnderSampled("signal too short for the demodulation filter");
    auto h = blackman_sinc(lowpass_cut, dt, half);

    // mix up and filter (zero-phase: symmetric kernel)
    std::vector<CVector> mixed(n, CVector(dim));
    for (size_t k = 0; k < n; ++k)
        mixed[k] = 2.0 * std::exp(Complex(0.0, omega * (k * dt))) * signal[k].cast<Complex>();

    Envelope env;
    env.omega = omega;
    env.dt = dt;
    env.edge_guard = half;
    env.f0.assign(n, CVector::Zero(dim));
    for (size_t k = 0; k < n; ++k) {
        CVector acc = CVector::Zero(dim);
        const int lo = std::max<long>(0, static_cast<long>(k) - half);
        const int hi = std::min<long>(n - 1, static_cast<long>(k) + half);
        for (long m = lo; m <= hi; ++m)
            acc += h[m - static_cast<long>(k) + half] * mixed[m];
        env.f0[k] = acc;
    }

    // spectral 99% half-width of the envelope (Hann-windowed against the
    // finite-record boxcar leakage)
    size_t nfft = 1;
    while (nfft < n) nfft <<= 1;
    double total = 0.0;
    std::vector<double> power(nfft / 2 + 1, 0.0);
    for (Eigen::Index c = 0; c < dim; ++c) {
        std::vector<Complex> buf(nfft, Complex(0.0, 0.0));
        for (size_t k = 0; k < n; ++k) {
            const double hann =
                0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(k) / (n - 1));
            buf[k] = hann * env.f0[k](c);
        }
        fft_radix2(buf, false);
        for (size_t k = 0; k < nfft; ++k) {
            const size_t fold = k <= nfft / 2 ? k : nfft - k;
            power[fold] += std::norm(buf[k]);
        }
    }
    for (double p : power) total += p;
    double acc = 0.0;
    size_t k99 = 0;
    for (size_t k = 0; k < power.size(); ++k) {
        acc += power[k];
        if (acc >= 0.99 * total) {
            k99 = k;
            break;
        }
    }
    env.bandwidth = 2.0 * M_PI * static_cast<double>(k99) / (static_cast<double>(nfft) * dt);
    env.delta = env.bandwidth / omega;
    env.valid = env.delta < 0.2 && total > 0.0;
    return env;
}

Averaged time_average(const std::vector<double>& signal, double dt, double sigma,
                      double omega_ref) {
    if (!(sigma > 0.0)) throw Error("time_average: sigma must be positive");
    if (sigma * omega_ref < 10.0)
        throw WindowTooShort("sigma * omega = " + std::to_string(sigma * omega_ref) + " < 10");
    const int half = static_cast<int>(std::ceil(6.0 * sigma / dt));
    std::vector<double> h(2 * half + 1);
    double sum = 0.0;
    for (int i = -half; i <= half; ++i) {
        h[i + half] = std::exp(-0.5 * (i * dt) * (i * dt) / (sigma * sigma));
        sum += h[i + half];
    }
    for (auto& v : h) v /= sum;

    Averaged out;
    out.edge_guard = half;
    const long n = static_cast<long>(signal.size());
    out.values.assign(n, 0.0);
    for (long k = 0; k < n; ++k) {
        double acc = 0.0;
        for (int i = -half; i <= half; ++i) {
            long m = k + i;
            if (m < 0) m = 0;
            if (m >= n) m = n - 1;
            acc += h[i + half] * signal[m];
        }
        out.values[k] = acc;
    }
    return out;
}

namespace {

// quadratic forms <a, M b> with the complex inner product (conjugate-linear
// in the first slot)
Complex qform(const CVector& a, const CMatrix& m, const CVector& b) {
    return a.dot(m * b); // Eigen's dot conjugates the first argument
}

struct OmegaDerivs {
    CMatrix zchat;      // omega chi_hat(omega)
    CMatrix d_zchat;    // d/domega [omega chi_hat]
    Matrix im_chi;      // Im chi_hat(omega)
    Matrix re_chi;      // Re chi_hat(omega)
    Matrix d_im;        // d/domega [omega Im chi_hat]
    Matrix d_re;        // d/domega [omega Re chi_hat]
};

OmegaDerivs omega_derivs(const SusceptibilityModel& model, double omega) {
    OmegaDerivs d;
    CMatrix chat = model.chi_hat(Complex(omega, 0.0));
    d.zchat = omega * chat;
    d.d_zchat = model.d_omega_omega_chi_hat(omega);
    d.im_chi = chat.imag();
    d.re_chi = chat.real();
    d.d_im = d.d_zchat.imag();
    d.d_re = d.d_zchat.real();
    return d;
}

} // namespace

BrillouinPower brillouin_power(const Envelope& env, const SusceptibilityModel& model,
                               double omega) {
    auto der = omega_derivs(model, omega);
    const Matrix phi = omega * der.im_chi; // omega Im chi_hat
    const size_t n = env.f0.size();
    BrillouinPower out;
    out.full.assign(n, 0.0);
    out.leading.assign(n, 0.0);
    for (size_t k = 0; k < n; ++k) {
        const CVector& f0 = env.f0[k];
        // centered difference for d_t f0
        const size_t kp = std::min(k + 1, n - 1), km = k > 0 ? k - 1 : 0;
        const CVector df0 = (env.f0[kp] - env.f0[km]) / ((kp - km) * env.dt);

        const double lead = 0.5 * qform(f0, phi.cast<Complex>(), f0).real();
        const double mid = 0.5 * qform(df0, der.d_im.cast<Complex>(), f0).imag();
        // (1/4) d_t <f0, d_re f0>
        const CVector fp = env.f0[kp], fm = env.f0[km];
        const double qp = qform(fp, der.d_re.cast<Complex>(), fp).real();
        const double qm = qform(fm, der.d_re.cast<Complex>(), fm).real();
        const double third = 0.25 * (qp - qm) / ((kp - km) * env.dt);
        out.leading[k] = lead;
        out.full[k] = lead + mid + third;
    }
    return out;
}

std::vector<double> brillouin_energy_lossless(const Envelope& env,
                                              const SusceptibilityModel& model, double omega,
                                              double pdc_tol) {
    auto der = omega_derivs(model, omega);
    const double im_norm = der.im_chi.norm();
    if (im_norm > pdc_tol * std::max(1.0, der.re_chi.norm()))
        throw NotLossless("Im chi_hat(omega) norm = " + std::to_string(im_norm));
    const Matrix m = Matrix::Identity(der.d_re.rows(), der.d_re.cols()) + der.d_re;
    std::vector<double> out(env.f0.size());
    for (size_t k = 0; k < env.f0.size(); ++k)
        out[k] = 0.25 * qform(env.f0[k], m.cast<Complex>(), env.f0[k]).real();
    return out;
}

std::vector<double> brillouin_lagrangian(const Envelope& env, const SusceptibilityModel& model,
                                         double omega) {
    auto der = omega_derivs(model, omega);
    std::vector<double> out(env.f0.size());
    for (size_t k = 0; k < env.f0.size(); ++k)
        out[k] = -0.25 * qform(env.f0[k], der.re_chi.cast<Complex>(), env.f0[k]).real();
    return out;
}

} // namespace tdd
