#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "tdd/coupling.hpp"

using namespace tdd;

namespace {

std::vector<Complex> probes() {
    std::vector<Complex> p;
    for (int k = 0; k < 8; ++k) p.emplace_back(0.0, 0.5 + k * (4.5 / 7.0));
    p.emplace_back(1.0, 1.0);
    p.emplace_back(2.0, 0.5);
    return p;
}

} // namespace

TEST_CASE("coupling_hat pointwise") {
    auto mk = SusceptibilityModel::markov(SymMatrix::scalar(0.5));
    CHECK(coupling_hat(mk, 3.7)(0, 0) == doctest::Approx(1.0).epsilon(1e-14));

    CHECK(coupling_hat(SusceptibilityModel::zero(2), 1.0).frobenius() == 0.0);

    auto pl = SusceptibilityModel::power_law(0.2, SymMatrix::scalar(1.0));
    const double expect = std::sqrt(2.0 * std::tgamma(1.2) * std::cos(0.1 * M_PI));
    CHECK(coupling_hat(pl, 1.0)(0, 0) == doctest::Approx(expect).epsilon(1e-14));

    auto flipped = SusceptibilityModel::power_law(0.2, SymMatrix::scalar(-1.0));
    CHECK_THROWS_AS(coupling_hat(flipped, 1.0), NotPSD);
}

TEST_CASE("markov coupling is fully concentrated in the Dirac channel") {
    auto mk = SusceptibilityModel::markov(SymMatrix::scalar(0.5));
    auto c = build_coupling(mk, 0.05, 50.0);
    CHECK(c.has_dirac());
    CHECK(c.dirac_weight()(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
    // regular part identically zero
    for (int j = 0; j < 5; ++j) CHECK(c.phi_reg(j).frobenius() == 0.0);
    std::vector<double> s{-3.0, -1.0, 0.0, 1.0, 3.0};
    for (const auto& v : c.spatial_samples(s)) CHECK(v.frobenius() < 1e-14);

    // exact Herglotz identity through the Dirac term alone
    CHECK(verify_herglotz(c, mk, probes()) <= 1e-12);
    // reconstruction reproduces the step kernel exactly
    auto rec = reconstruct_chi(c, {0.5, 1.0, 7.0});
    for (const auto& r : rec) CHECK(r(0, 0) == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("zero coupling") {
    auto c = build_coupling(SusceptibilityModel::zero(2), 0.1, 30.0);
    CHECK_FALSE(c.has_dirac());
    CHECK(verify_herglotz(c, SusceptibilityModel::zero(2), probes()) == 0.0);
    for (const auto& r : reconstruct_chi(c, {1.0, 2.0})) CHECK(r.frobenius() == 0.0);
}

TEST_CASE("lorentz round trip") {
    auto lo = SusceptibilityModel::lorentz(SymMatrix::scalar(1.0), 1.0, 0.1);
    auto c = build_coupling(lo, 0.01, 100.0);
    CHECK_FALSE(c.has_dirac());

    // PSD closure per grid point: sigma_hat^2 / 2 = Phi
    const auto& kappa = c.kappa_grid();
    for (size_t j = 1; j < kappa.size(); j += 997) {
        SymMatrix sh = c.sigma_hat(static_cast<int>(j));
        const double phi = lo.phi_boundary(kappa[j])(0, 0);
        CHECK(0.5 * sh(0, 0) * sh(0, 0) == doctest::Approx(phi).epsilon(1e-10));
    }

    CHECK(verify_herglotz(c, lo, probes()) <= 1e-3);

    std::vector<double> taus;
    for (double t = 0.1; t <= 20.0; t += 0.1) taus.push_back(t);
    auto rec = reconstruct_chi(c, taus);
    double err = 0.0;
    for (size_t i = 0; i < taus.size(); ++i)
        err = std::max(err, std::abs(rec[i](0, 0) - lo.chi_time(taus[i])(0, 0)));
    CHECK(err <= 1e-3);
}

TEST_CASE("debye: flat tail becomes the Dirac part, signed remainder works") {
    auto db = SusceptibilityModel::debye(SymMatrix::scalar(1.0), 1.0);
    auto c = build_coupling(db, 0.01, 200.0);
    CHECK(c.has_dirac());
    // Phi_inf ~ Delta / tau = 1 up to the 1/K^2 flatness bias
    CHECK(c.dirac_weight()(0, 0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-4));
    CHECK_FALSE(c.reg_is_psd()); // e^{-t} minus the step is a signed kernel
    CHECK_THROWS_AS(c.sigma_hat_reg(0), NotPSD);
    CHECK_THROWS_AS(c.spatial_samples({0.0, 1.0}), NotPSD);

    CHECK(verify_herglotz(c, db, {Complex(0.0, 2.0)}) <= 1e-3);
    CHECK(verify_herglotz(c, db, probes()) <= 1e-3);

    std::vector<double> taus{0.3, 1.0, 2.5, 6.0};
    auto rec = reconstruct_chi(c, taus);
    for (size_t i = 0; i < taus.size(); ++i)
        CHECK(rec[i](0, 0) == doctest::Approx(std::exp(-taus[i])).scale(1.0).epsilon(2e-3));
}

TEST_CASE("herglotz residual decreases with resolution on Debye") {
    auto db = SusceptibilityModel::debye(SymMatrix::scalar(1.0), 1.0);
    auto p = probes();
    const double r0 = verify_herglotz(build_coupling(db, 0.04, 100.0), db, p);
    const double r1 = verify_herglotz(build_coupling(db, 0.02, 200.0), db, p);
    const double r2 = verify_herglotz(build_coupling(db, 0.01, 400.0), db, p);
    CHECK(r1 < r0);
    CHECK(r2 < r1);
    CHECK(r2 < 0.6 * r0); // at least first order overall
}

TEST_CASE("pdc failure surfaces as NotPSD from build_coupling") {
    auto flipped = SusceptibilityModel::power_law(0.2, SymMatrix::scalar(-1.0));
    CHECK_THROWS_AS(build_coupling(flipped, 0.05, 50.0), NotPSD);
}

TEST_CASE("slowly decaying power-law tail is rejected honestly") {
    auto pl = SusceptibilityModel::power_law(0.2, SymMatrix::scalar(1.0));
    CHECK_THROWS_AS(build_coupling(pl, 0.05, 100.0), TailNotResolved);
}

TEST_CASE("spatial samples are even and decay for lorentz") {
    auto lo = SusceptibilityModel::lorentz(SymMatrix::scalar(1.0), 1.0, 0.1);
    auto c = build_coupling(lo, 0.02, 60.0);
    std::vector<double> s;
    for (double x = -40.0; x <= 40.0; x += 0.5) s.push_back(x);
    auto samples = c.spatial_samples(s);
    double near = 0.0, far = 0.0;
    for (size_t i = 0; i < s.size(); ++i) {
        const size_t mirror = s.size() - 1 - i;
        CHECK(samples[i](0, 0) == samples[mirror](0, 0)); // exact evenness
        if (std::abs(s[i]) < 5.0) near = std::max(near, std::abs(samples[i](0, 0)));
        if (std::abs(s[i]) > 35.0) far = std::max(far, std::abs(samples[i](0, 0)));
    }
    CHECK(far < 0.25 * near);
}

TEST_CASE("markov plus lorentz sum splits with a small clamp") {
    std::vector<SusceptibilityModel> parts{
        SusceptibilityModel::markov(SymMatrix::scalar(0.3)),
        SusceptibilityModel::lorentz(SymMatrix::scalar(1.0), 1.0, 0.1)};
    auto sum = SusceptibilityModel::sum(parts);
    auto c = build_coupling(sum, 0.02, 100.0);
    CHECK(c.has_dirac());
    CHECK(c.dirac_weight()(0, 0) == doctest::Approx(std::sqrt(0.6)).epsilon(1e-3));
    CHECK(c.reg_is_psd());
    CHECK(c.reg_clamp() < 1e-3);
    CHECK(verify_herglotz(c, sum, probes()) < 2e-3);

    std::vector<double> taus{0.5, 2.0, 8.0};
    auto rec = reconstruct_chi(c, taus);
    for (size_t i = 0; i < taus.size(); ++i)
        CHECK(rec[i](0, 0) ==
              doctest::Approx(sum.chi_time(taus[i])(0, 0)).scale(1.0).epsilon(3e-3));
}

TEST_CASE("csv serialization") {
    auto lo = SusceptibilityModel::lorentz(SymMatrix::scalar(1.0), 1.0, 0.1);
    auto c = build_coupling(lo, 0.5, 20.0);
    std::ostringstream os;
    c.write_csv(os);
    const std::string s = os.str();
    CHECK(s.rfind("kappa,sigma_hat_0_0", 0) == 0);
    CHECK(std::count(s.begin(), s.end(), '\n') == 42); // header + 41 grid rows
}

TEST_CASE("conjugated lorentz exercises a non-diagonal separable shape") {
    auto base = SusceptibilityModel::lorentz(SymMatrix::identity(2), 1.0, 0.1);
    Matrix cmat(2, 2);
    cmat << 0.8, 0.3, 0.0, 1.1;
    auto model = SusceptibilityModel::conjugated(base, cmat);
    REQUIRE(model.separable_shape().has_value());
    CHECK(model.separable_shape()->mat().cwiseAbs().sum() > 0.0);
    auto c = build_coupling(model, 0.02, 100.0);
    std::vector<Complex> probes{{0.0, 1.0}, {1.0, 1.0}, {0.0, 3.0}};
    CHECK(verify_herglotz(c, model, probes) <= 2e-3);
    auto rec = reconstruct_chi(c, {0.5, 2.0, 8.0});
    for (size_t i = 0; i < rec.size(); ++i) {
        const double tau = std::vector<double>{0.5, 2.0, 8.0}[i];
        CHECK((rec[i] - model.chi_time(tau)).frobenius() <= 3e-3);
    }
}
