#pragma once

#include <vector>

#include "tdd/susceptibility.hpp"

namespace tdd {

// Complex envelope of an almost-monochromatic signal: signal(t) ~
// Re{ e^{-i omega t} f0(t) } with f0 slowly varying.
struct Envelope {
    double omega = 0.0;
    double dt = 0.0;
    std::vector<CVector> f0;
    double bandwidth = 0.0; // spectral 99% half-width of f0
    double delta = 0.0;     // bandwidth / omega
    bool valid = false;     // delta < 0.2
    int edge_guard = 0;     // samples at each end polluted by the filter
};

// f0(t) = 2 lowpass(e^{+i omega t} signal(t)) with a zero-phase windowed-sinc
// FIR (Blackman window, stopband < -70 dB).  lowpass_cut <= 0 selects the
// default omega / 4.  UnderSampled below 20 samples per carrier period.
Envelope demodulate(const std::vector<Vector>& signal, double dt, double omega,
                    double lowpass_cut = 0.0);

// Convolution with a normalized symmetric Gaussian kernel (truncated at six
// sigma); first moment vanishes by symmetry so linear trends pass through.
// Throws WindowTooShort when sigma * omega_ref < 10.
struct Averaged {
    std::vector<double> values;
    int edge_guard = 0; // samples at each end inside the kernel support
};
Averaged time_average(const std::vector<double>& signal, double dt, double sigma,
                      double omega_ref);

// Three-term prediction for the time averaged power density absorbed by the
// strings; `leading` carries the first (dissipative) term alone.
struct BrillouinPower {
    std::vector<double> full;
    std::vector<double> leading;
};
BrillouinPower brillouin_power(const Envelope& env, const SusceptibilityModel& model,
                               double omega);

// Time averaged total energy density prediction at a lossless frequency;
// NotLossless if ||Im chi_hat(omega)|| exceeds the tolerance.
std::vector<double> brillouin_energy_lossless(const Envelope& env,
                                              const SusceptibilityModel& model, double omega,
                                              double pdc_tol = 1e-9);

// Time averaged string Lagrangian density prediction.
std::vector<double> brillouin_lagrangian(const Envelope& env, const SusceptibilityModel& model,
                                         double omega);

// radix-2 complex FFT (in place, size must be a power of two)
void fft_radix2(std::vector<Complex>& a, bool inverse);

} // namespace tdd
