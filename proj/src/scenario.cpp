#include "tdd/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <set>

#include "tdd/csv.hpp"

namespace tdd {

namespace {

void check_keys(const Config& cfg, const std::string& section,
                const std::set<std::string>& allowed) {
    for (const auto& k : cfg.keys(section))
        if (!allowed.count(k))
            throw ConfigInvalid("unknown key [" + section + "] " + k);
}

SymMatrix channel_shape(const std::string& channel, double value, Eigen::Index dim_h) {
    Vector d = Vector::Zero(dim_h);
    if (channel == "p")
        d(0) = value;
    else if (channel == "q")
        d(dim_h - 1) = value;
    else if (channel == "all")
        d.setConstant(value);
    else
        throw ConfigInvalid("key [susceptibility] channel: expected p, q or all");
    return SymMatrix::diagonal(d);
}

SusceptibilityModel build_model(const Config& cfg, const Scenario& sc) {
    const std::string sect = "susceptibility";
    check_keys(cfg, sect,
               {"kind", "channel", "gamma", "delta", "tau", "strength", "omega0", "gamma_l",
                "alpha", "scale", "sign"});
    const std::string kind = cfg.get_string(sect, "kind", "zero");
    const Eigen::Index dh = sc.spec.dim_H();
    const std::string channel = cfg.get_string(sect, "channel", "p");
    const double sign = cfg.get_double(sect, "sign", 1.0);

    auto shape = [&](double v) {
        if (sc.system_kind == Scenario::SystemKind::Maxwell) {
            Vector strength = Vector::Zero(sc.maxwell->n_nodes);
            for (int i = sc.maxwell->slab_begin; i < sc.maxwell->slab_end; ++i) strength(i) = v;
            return sc.maxwell->stress_shape(strength);
        }
        if (dh == 1) return SymMatrix::scalar(v);
        return channel_shape(channel, v, dh);
    };

    if (kind == "zero") return SusceptibilityModel::zero(dh);
    if (kind == "markov")
        return SusceptibilityModel::markov(shape(sign * cfg.get_double(sect, "gamma")));
    if (kind == "debye")
        return SusceptibilityModel::debye(shape(sign * cfg.get_double(sect, "delta")),
                                          cfg.get_double(sect, "tau"));
    if (kind == "lorentz")
        return SusceptibilityModel::lorentz(shape(sign * cfg.get_double(sect, "strength")),
                                            cfg.get_double(sect, "omega0"),
                                            cfg.get_double(sect, "gamma_l", 0.0));
    if (kind == "power_law")
        return SusceptibilityModel::power_law(cfg.get_double(sect, "alpha"),
                                              shape(sign * cfg.get_double(sect, "scale", 1.0)));
    throw ConfigInvalid("key [susceptibility] kind: unknown kind '" + kind + "'");
}

Drive build_drive(const Config& cfg, const Scenario& sc) {
    const std::string sect = "drive";
    check_keys(cfg, sect, {"kind", "t0", "width", "amplitude", "omega", "j0", "x0", "xwidth"});
    const std::string kind = cfg.get_string(sect, "kind", "zero");
    if (kind == "zero") return Drive::zero(sc.spec.dim_V());

    Vector amp;
    if (sc.system_kind == Scenario::SystemKind::Maxwell) {
        const double j0 = cfg.get_double(sect, "j0");
        const double x0 = cfg.get_double(sect, "x0");
        const double xw = cfg.get_double(sect, "xwidth");
        Vector prof(sc.maxwell->n_nodes);
        for (int i = 0; i < sc.maxwell->n_nodes; ++i) {
            const double x = i * sc.maxwell->dx - x0;
            prof(i) = std::abs(x) > 6.0 * xw ? 0.0 : j0 * std::exp(-0.5 * x * x / (xw * xw));
        }
        amp = sc.maxwell->current_amplitude(prof);
    } else {
        auto v = cfg.get_vector(sect, "amplitude");
        if (static_cast<Eigen::Index>(v.size()) != sc.spec.dim_V())
            throw ConfigInvalid("key [drive] amplitude: expected " +
                                std::to_string(sc.spec.dim_V()) + " entries");
        amp = Eigen::Map<Vector>(v.data(), v.size());
    }
    const double t0 = cfg.get_double(sect, "t0");
    const double width = cfg.get_double(sect, "width");
    if (kind == "gaussian_pulse") return Drive::gaussian_pulse(t0, width, amp);
    if (kind == "modulated_carrier")
        return Drive::modulated_carrier(cfg.get_double(sect, "omega"), t0, width, amp);
    throw ConfigInvalid("key [drive] kind: unknown kind '" + kind + "'");
}

} // namespace

Scenario build_scenario(const Config& cfg) {
    Scenario sc;
    const std::string sect = "system";
    check_keys(cfg, sect,
               {"kind", "m", "k", "gamma", "a4", "n_nodes", "dx", "eps_background", "eps_slab",
                "mu", "slab_begin", "slab_end"});
    const std::string kind = cfg.get_string(sect, "kind");

    if (kind == "oscillator") {
        sc.system_kind = Scenario::SystemKind::Oscillator;
        const double m = cfg.get_double(sect, "m", 1.0);
        const double k = cfg.get_double(sect, "k", 1.0);
        sc.spec = oscillator_spec(m, k);
        sc.damped = damped_oscillator(m, k, cfg.get_double(sect, "gamma", 0.0));
    } else if (kind == "nonlinear_oscillator") {
        sc.system_kind = Scenario::SystemKind::Nonlinear;
        const double m = cfg.get_double(sect, "m", 1.0);
        const double k = cfg.get_double(sect, "k", 0.0);
        const double a4 = cfg.get_double(sect, "a4", 0.0);
        const double gamma = cfg.get_double(sect, "gamma", 0.0);
        auto pot = [k, a4](double q) { return 0.5 * k * q * q + 0.25 * a4 * q * q * q * q; };
        auto dpot = [k, a4](double q) { return k * q + a4 * q * q * q; };
        sc.nonlinear = nonlinear_oscillator(m, gamma, pot, dpot);
        sc.spec = sc.nonlinear->spec;
    } else if (kind == "maxwell1d") {
        sc.system_kind = Scenario::SystemKind::Maxwell;
        const int n = static_cast<int>(cfg.get_int(sect, "n_nodes", 0));
        const double dx = cfg.get_double(sect, "dx");
        if (n < 3) throw ConfigInvalid("key [system] n_nodes: need at least 3");
        const double eps_bg = cfg.get_double(sect, "eps_background", 1.0);
        const double eps_slab = cfg.get_double(sect, "eps_slab", eps_bg);
        const double mu = cfg.get_double(sect, "mu", 1.0);
        const int sb = static_cast<int>(cfg.get_int(sect, "slab_begin", 0));
        const int se = static_cast<int>(cfg.get_int(sect, "slab_end", 0));
        if (sb < 0 || se > n || sb > se) throw ConfigInvalid("key [system] slab range");
        Vector eps = Vector::Constant(n, eps_bg);
        for (int i = sb; i < se; ++i) eps(i) = eps_slab;
        sc.maxwell = maxwell1d(n, dx, eps, Vector::Constant(n - 1, mu), sb, se);
        sc.spec = sc.maxwell->spec;
    } else {
        throw ConfigInvalid("key [system] kind: unknown kind '" + kind + "'");
    }

    sc.model = build_model(cfg, sc);
    if (sc.system_kind == Scenario::SystemKind::Oscillator &&
        cfg.get_string("susceptibility", "kind", "zero") == "markov" &&
        cfg.get_double("system", "gamma", 0.0) == 0.0) {
        // keep the damped fixture's analytic solution in sync with the model
        sc.damped = damped_oscillator(cfg.get_double(sect, "m", 1.0),
                                      cfg.get_double(sect, "k", 1.0),
                                      cfg.get_double("susceptibility", "gamma"));
    }
    sc.drive = build_drive(cfg, sc);

    check_keys(cfg, "initial", {"q0", "v0", "u0"});
    if (cfg.has("initial", "u0")) {
        auto v = cfg.get_vector("initial", "u0");
        if (static_cast<Eigen::Index>(v.size()) != sc.spec.dim_V())
            throw ConfigInvalid("key [initial] u0: wrong size");
        sc.u0 = Eigen::Map<Vector>(v.data(), v.size());
    } else if (cfg.has("initial", "q0") || cfg.has("initial", "v0")) {
        if (sc.system_kind == Scenario::SystemKind::Maxwell)
            throw ConfigInvalid("key [initial] q0: not supported for maxwell1d");
        const double q0 = cfg.get_double("initial", "q0", 0.0);
        const double v0 = cfg.get_double("initial", "v0", 0.0);
        const double m = cfg.get_double(sect, "m", 1.0);
        Vector u0(2);
        u0 << m * v0, q0;
        sc.u0 = u0;
    }

    check_keys(cfg, "integration",
               {"dt", "t_final", "sample_stride", "representation", "integrator", "ds",
                "s_extent"});
    sc.dt = cfg.get_double("integration", "dt", 1e-3);
    sc.t_final = cfg.get_double("integration", "t_final", 10.0);
    sc.sample_stride = static_cast<int>(cfg.get_int("integration", "sample_stride", 1));
    const std::string rep = cfg.get_string("integration", "representation", "spectral");
    if (rep == "spectral")
        sc.representation = StringRep::Spectral;
    else if (rep == "spatial")
        sc.representation = StringRep::Spatial;
    else
        throw ConfigInvalid("key [integration] representation: expected spectral or spatial");
    const std::string integ = cfg.get_string("integration", "integrator", "implicit_midpoint");
    if (integ == "implicit_midpoint")
        sc.integrator = IntegratorKind::ImplicitMidpoint;
    else if (integ == "exp_midpoint")
        sc.integrator = IntegratorKind::ExponentialMidpoint;
    else
        throw ConfigInvalid("key [integration] integrator: unknown integrator");
    sc.ds = cfg.get_double("integration", "ds", 0.0);
    sc.s_extent = cfg.get_double("integration", "s_extent", 0.0);

    check_keys(cfg, "coupling", {"dkappa", "kappa_max", "tail_tol", "flat_tol"});
    sc.dkappa = cfg.get_double("coupling", "dkappa", 0.05);
    sc.kappa_max = cfg.get_double("coupling", "kappa_max", 100.0);
    sc.coupling_opts.tail_tol = cfg.get_double("coupling", "tail_tol", 1e-4);
    sc.coupling_opts.flat_tol = cfg.get_double("coupling", "flat_tol", 1e-4);

    check_keys(cfg, "diagnostics", {"carrier", "sigma", "lowpass"});
    sc.carrier = cfg.get_double("diagnostics", "carrier", 0.0);
    sc.sigma = cfg.get_double("diagnostics", "sigma", 0.0);
    sc.lowpass = cfg.get_double("diagnostics", "lowpass", 0.0);

    check_keys(cfg, "pdc", {"omega_max", "n_omega", "eta"});
    return sc;
}

void export_summary(const std::string& out_dir, const Summary& kv) {
    namespace fs = std::filesystem;
    bool any_csv = false;
    if (fs::exists(out_dir))
        for (const auto& e : fs::directory_iterator(out_dir))
            if (e.path().extension() == ".csv") any_csv = true;
    if (!any_csv) throw NoArtifacts("no csv artifacts in " + out_dir);
    SummaryWriter sw(out_dir + "/summary.txt");
    for (const auto& [k, v] : kv) sw.put(k, v);
}

namespace {

void ensure_dir(const std::string& d) { std::filesystem::create_directories(d); }

ExtendedSystem build_scenario_extension(const Scenario& sc, const CouplingFunction& coupling) {
    Discretization disc;
    disc.rep = sc.representation;
    disc.ds = sc.ds;
    disc.s_extent = sc.s_extent;
    disc.t_max = sc.t_final;
    return build_extension(sc.spec, coupling, disc);
}

SimOptions sim_options(const Scenario& sc, int threads) {
    SimOptions o;
    o.sample_stride = sc.sample_stride;
    o.step.integrator = sc.integrator;
    o.step.threads = threads;
    if (sc.u0.size() > 0) o.u0 = sc.u0;
    return o;
}

std::vector<Complex> standard_probes() {
    std::vector<Complex> p;
    for (int k = 1; k <= 8; ++k) p.emplace_back(0.0, 0.5 + (k - 1) * (4.5 / 7.0));
    p.emplace_back(1.0, 1.0);
    p.emplace_back(2.0, 0.5);
    return p;
}

double drive_end(const Scenario& sc) { return sc.drive.is_zero() ? 0.0 : sc.drive.t_end(); }

} // namespace

Summary run_pdc_check(const Scenario& sc, const Config& cfg, const std::string& out_dir) {
    ensure_dir(out_dir);
    const double omega_max = cfg.get_double("pdc", "omega_max", 20.0);
    const int n_omega = static_cast<int>(cfg.get_int("pdc", "n_omega", 801));
    std::vector<double> etas{0.1, 1.0};
    if (cfg.has("pdc", "eta")) etas = cfg.get_vector("pdc", "eta");
    auto omegas = pdc_omega_grid(omega_max, n_omega);
    PdcReport rep = check_pdc(sc.model, omegas, etas);

    CsvWriter csv(out_dir + "/pdc.csv");
    csv.header({"omega", "min_eig_boundary"});
    for (double w : omegas) {
        if (sc.model.pole_on_axis(w)) continue;
        try {
            csv.row({w, sc.model.phi_boundary(w).min_eigenvalue()});
        } catch (const PoleOnAxis&) {
        }
    }
    Summary s;
    s["pdc_min_eig"] = rep.min_eig;
    s["pdc_passed"] = rep.passed ? 1.0 : 0.0;
    s["pdc_worst_omega"] = rep.worst.omega;
    s["pdc_worst_eta"] = rep.worst.eta;
    export_summary(out_dir, s);
    if (!rep.passed)
        throw PdcFailed("min eigenvalue " + std::to_string(rep.min_eig) + " at omega = " +
                        std::to_string(rep.worst.omega));
    return s;
}

Summary run_coupling(const Scenario& sc, const std::string& out_dir) {
    ensure_dir(out_dir);
    CouplingFunction coupling =
        build_coupling(sc.model, sc.dkappa, sc.kappa_max, sc.coupling_opts);
    {
        std::ofstream os(out_dir + "/coupling.csv", std::ios::binary);
        coupling.write_csv(os);
    }
    const double herg = verify_herglotz(coupling, sc.model, standard_probes());
    std::vector<double> taus;
    for (int i = 1; i <= 100; ++i) taus.push_back(0.2 * i);
    auto rec = reconstruct_chi(coupling, taus);
    double rec_err = 0.0;
    for (size_t i = 0; i < taus.size(); ++i)
        rec_err = std::max(rec_err, (rec[i] - sc.model.chi_time(taus[i])).frobenius());
    Summary s;
    s["herglotz_residual"] = herg;
    s["reconstruct_linf"] = rec_err;
    s["dirac_weight_norm"] = coupling.dirac_weight().frobenius();
    export_summary(out_dir, s);
    return s;
}

namespace {

void write_trajectory_csv(const std::string& path, const SimResult& res, Eigen::Index dim_v,
                          Eigen::Index dim_h) {
    CsvWriter csv(path);
    std::vector<std::string> cols{"t"};
    const bool full = dim_v <= 64;
    if (full) {
        for (Eigen::Index i = 0; i < dim_v; ++i) cols.push_back("u" + std::to_string(i));
        for (Eigen::Index i = 0; i < dim_h; ++i) cols.push_back("f" + std::to_string(i));
    }
    cols.insert(cols.end(), {"H_sys", "H_str", "H_total", "work_ext", "work_fr"});
    csv.header(cols);
    for (size_t k = 0; k < res.traj.t.size(); ++k) {
        std::vector<double> row{res.traj.t[k]};
        if (full) {
            for (Eigen::Index i = 0; i < dim_v; ++i) row.push_back(res.traj.u[k](i));
            for (Eigen::Index i = 0; i < dim_h; ++i) row.push_back(res.traj.f[k](i));
        }
        row.insert(row.end(), {res.ledger.h_sys[k], res.ledger.h_str[k], res.ledger.h_total[k],
                               res.ledger.work_ext[k], res.ledger.work_fr[k]});
        csv.row(row);
    }
}

double post_drive_drift(const EnergyLedger& led, double t_end_drive) {
    double href = -1.0, drift = 0.0;
    for (size_t k = 0; k < led.t.size(); ++k) {
        if (led.t[k] < t_end_drive) continue;
        if (href < 0.0) href = led.h_total[k];
        drift = std::max(drift, std::abs(led.h_total[k] - href));
    }
    const double scale = std::max(std::abs(href), 1e-300);
    return href < 0.0 ? 0.0 : drift / scale;
}

} // namespace

Summary run_simulate(const Scenario& sc, const std::string& out_dir, int threads) {
    ensure_dir(out_dir);
    CouplingFunction coupling =
        build_coupling(sc.model, sc.dkappa, sc.kappa_max, sc.coupling_opts);
    ExtendedSystem sys = build_scenario_extension(sc, coupling);
    SimResult res = simulate(sys, sc.drive, sc.t_final, sc.dt, sim_options(sc, threads));
    write_trajectory_csv(out_dir + "/trajectory.csv", res, sc.spec.dim_V(), sc.spec.dim_H());

    Summary s;
    s["energy_drift_rel"] = post_drive_drift(res.ledger, drive_end(sc));
    s["h_total_end"] = res.ledger.h_total.back();
    s["work_ext_end"] = res.ledger.work_ext.back();
    s["work_balance_rel"] =
        std::abs(res.ledger.h_total.back() - res.ledger.work_ext.back()) /
        std::max(std::abs(res.ledger.work_ext.back()), 1e-300);
    export_summary(out_dir, s);
    return s;
}

Summary run_compare(const Scenario& sc, const std::string& out_dir, int threads) {
    ensure_dir(out_dir);
    if (sc.system_kind == Scenario::SystemKind::Maxwell)
        throw ConfigInvalid("compare supports oscillator scenarios");

    CouplingFunction coupling =
        build_coupling(sc.model, sc.dkappa, sc.kappa_max, sc.coupling_opts);
    ExtendedSystem sys = build_scenario_extension(sc, coupling);
    SimResult ext = simulate(sys, sc.drive, sc.t_final, sc.dt, sim_options(sc, threads));

    Summary s;
    CsvWriter csv(out_dir + "/compare.csv");

    if (sc.system_kind == Scenario::SystemKind::Nonlinear) {
        // reference: fine-step RK4 of the reduced ODE
        const double q0 = sc.u0.size() ? sc.u0(1) : 0.0;
        const double v0 = sc.u0.size() ? sc.u0(0) / sc.nonlinear->m : 0.0;
        if (!sc.drive.is_zero()) throw ConfigInvalid("nonlinear compare expects zero drive");
        auto qref = reference_damped_ode(sc.nonlinear->m, sc.nonlinear->gamma,
                                         sc.nonlinear->dpotential, q0, v0,
                                         sc.dt * sc.sample_stride, sc.t_final, 100);
        csv.header({"t", "q_ext", "q_ref", "abs_err"});
        double linf = 0.0;
        for (size_t k = 0; k < ext.traj.t.size() && k < qref.size(); ++k) {
            const double qe = ext.traj.u[k](1);
            const double err = std::abs(qe - qref[k]);
            linf = std::max(linf, err);
            csv.row({ext.traj.t[k], qe, qref[k], err});
        }
        s["oracle_linf"] = linf;
        export_summary(out_dir, s);
        return s;
    }

    VolterraOptions vopts;
    if (sc.u0.size()) vopts.u0 = sc.u0;
    VolterraResult vol = solve_volterra(sc.spec, sc.model, sc.drive, sc.dt, sc.t_final, vopts);

    const bool markov = sc.model.kind() == SusceptibilityModel::Kind::Markov;
    csv.header(markov ? std::vector<std::string>{"t", "q_ext", "q_volterra", "q_analytic",
                                                 "abs_err"}
                      : std::vector<std::string>{"t", "q_ext", "q_volterra", "abs_err"});

    double f_linf = 0.0, f_max = 0.0, q_analytic_linf = 0.0;
    const double q0 = sc.u0.size() ? sc.u0(1) : 0.0;
    const double v0 = sc.u0.size() && sc.damped ? sc.u0(0) / sc.damped->m : 0.0;
    for (size_t k = 0; k < ext.traj.t.size(); ++k) {
        const double t = ext.traj.t[k];
        const size_t kv = static_cast<size_t>(std::lround(t / sc.dt));
        if (kv >= vol.f.size()) break;
        f_linf = std::max(f_linf, (ext.traj.f[k] - vol.f[kv]).norm());
        f_max = std::max(f_max, vol.f[kv].norm());
        const double qe = ext.traj.u[k](1);
        const double qv = vol.u[kv](1);
        if (markov && sc.damped && sc.drive.is_zero()) {
            const double qa = sc.damped->analytic_q(t, q0, v0);
            q_analytic_linf = std::max(q_analytic_linf, std::abs(qe - qa));
            csv.row({t, qe, qv, qa, std::abs(qe - qv)});
        } else {
            csv.row({t, qe, qv, std::abs(qe - qv)});
        }
    }
    s["oracle_linf_rel"] = f_linf / std::max(f_max, 1e-300);
    if (markov && sc.damped && sc.drive.is_zero()) s["analytic_linf"] = q_analytic_linf;

    // Lamb string profile against sqrt(gamma m / 2) q(t - |s|) on driven runs
    if (markov && sc.damped && !sc.drive.is_zero() && sys.has_markov()) {
        const double t_prof = 0.75 * sc.t_final;
        const double ds_prof = std::max(4.0 * sc.dt, 0.05);
        std::vector<double> sgrid;
        for (double x = -(t_prof - 1.0); x <= t_prof - 1.0; x += ds_prof) sgrid.push_back(x);
        const double dt_samp = sc.dt * sc.sample_stride;
        auto prof = sys.markov_string_profile(ext.traj.f_dirac, dt_samp, sgrid, t_prof);
        double perr = 0.0;
        const double cfac = std::sqrt(0.5 * sc.damped->gamma * sc.damped->m);
        for (size_t i = 0; i < sgrid.size(); ++i) {
            const double targ = t_prof - std::abs(sgrid[i]);
            const size_t kv = std::min(vol.u.size() - 1,
                                       static_cast<size_t>(std::lround(targ / sc.dt)));
            // profile lives on the p channel of stress space
            perr = std::max(perr, std::abs(prof[i](0) - cfac * vol.u[kv](1)));
        }
        s["string_profile_linf"] = perr;
    }
    s["energy_drift_rel"] = post_drive_drift(ext.ledger, drive_end(sc));
    export_summary(out_dir, s);
    return s;
}

Summary run_brillouin(const Scenario& sc, const std::string& out_dir, int threads) {
    ensure_dir(out_dir);
    if (sc.system_kind == Scenario::SystemKind::Maxwell)
        throw ConfigInvalid("brillouin supports oscillator scenarios");
    const double omega = sc.carrier > 0.0 ? sc.carrier : sc.drive.carrier();
    if (!(omega > 0.0)) throw ConfigInvalid("key [diagnostics] carrier: carrier required");

    CouplingFunction coupling =
        build_coupling(sc.model, sc.dkappa, sc.kappa_max, sc.coupling_opts);
    ExtendedSystem sys = build_scenario_extension(sc, coupling);
    SimResult res = simulate(sys, sc.drive, sc.t_final, sc.dt, sim_options(sc, threads));

    const double dt_s = sc.dt * sc.sample_stride;
    Envelope env = demodulate(res.traj.f, dt_s, omega, sc.lowpass);
    const double delta_drive = sc.drive.width() > 0.0 ? 1.0 / (omega * sc.drive.width()) : 0.0;
    const double delta = delta_drive > 0.0 ? delta_drive : env.delta;

    double sigma = sc.sigma;
    if (sigma <= 0.0) sigma = std::max(std::pow(delta, -0.25) / omega, 10.5 / omega);

    // measured: centered difference of the ledger's H_str, then time averaged
    const size_t n = res.ledger.h_str.size();
    std::vector<double> dh(n, 0.0);
    for (size_t k = 1; k + 1 < n; ++k)
        dh[k] = (res.ledger.h_str[k + 1] - res.ledger.h_str[k - 1]) / (2.0 * dt_s);
    auto meas = time_average(dh, dt_s, sigma, omega);

    auto pred = brillouin_power(env, sc.model, omega);
    auto pred_full_avg = time_average(pred.full, dt_s, sigma, omega);
    auto pred_lead_avg = time_average(pred.leading, dt_s, sigma, omega);

    // interior window: away from filter and kernel edges, envelope above 30 %
    double pmax = 0.0;
    for (double v : pred_full_avg.values) pmax = std::max(pmax, std::abs(v));
    const int guard = std::max({env.edge_guard, meas.edge_guard, 1});
    double err_full = 0.0, err_lead = 0.0;
    CsvWriter csv(out_dir + "/brillouin.csv");
    csv.header({"t", "measured_avg", "pred_full", "pred_leading", "in_window"});
    for (size_t k = 0; k < n; ++k) {
        const bool interior = k > static_cast<size_t>(guard) && k + guard < n &&
                              std::abs(pred_full_avg.values[k]) >= 0.3 * pmax;
        if (interior) {
            err_full = std::max(err_full, std::abs(meas.values[k] - pred_full_avg.values[k]));
            err_lead = std::max(err_lead, std::abs(meas.values[k] - pred_lead_avg.values[k]));
        }
        csv.row({res.ledger.t[k], meas.values[k], pred_full_avg.values[k],
                 pred_lead_avg.values[k], interior ? 1.0 : 0.0});
    }
    Summary s;
    s["brillouin_rel_err_full"] = err_full / std::max(pmax, 1e-300);
    s["brillouin_rel_err_leading"] = err_lead / std::max(pmax, 1e-300);
    s["delta"] = delta;
    s["sigma"] = sigma;
    s["envelope_delta"] = env.delta;
    s["envelope_valid"] = env.valid ? 1.0 : 0.0;
    export_summary(out_dir, s);
    return s;
}

Summary run_maxwell(const Scenario& sc, const std::string& out_dir, int threads) {
    ensure_dir(out_dir);
    if (sc.system_kind != Scenario::SystemKind::Maxwell)
        throw ConfigInvalid("maxwell1d command requires [system] kind = maxwell1d");
    const Maxwell1D& mx = *sc.maxwell;

    // resolution gate: >= 20 points per shortest driven wavelength
    if (!sc.drive.is_zero()) {
        const double bw = sc.drive.width() > 0.0 ? 3.0 / sc.drive.width() : 0.0;
        const double omega_max = std::max(sc.drive.carrier() + bw, bw);
        const double n_index = std::sqrt(mx.eps.maxCoeff() * mx.mu.maxCoeff());
        if (omega_max > 0.0) {
            const double lambda_min = 2.0 * M_PI / (omega_max * n_index);
            if (mx.dx > lambda_min / 20.0)
                throw GridTooCoarse("dx = " + std::to_string(mx.dx) + " exceeds " +
                                    std::to_string(lambda_min / 20.0) +
                                    " (20 points per shortest wavelength)");
        }
    }

    CouplingFunction coupling =
        build_coupling(sc.model, sc.dkappa, sc.kappa_max, sc.coupling_opts);
    ExtendedSystem sys = build_scenario_extension(sc, coupling);
    SimOptions so = sim_options(sc, threads);
    so.record_channel_energies = sys.n_channels() > 0;
    SimResult res = simulate(sys, sc.drive, sc.t_final, sc.dt, so);

    // map channels to E nodes (diagonal shape: each direction is one node)
    std::vector<int> chan_node(sys.n_channels(), -1);
    for (Eigen::Index r = 0; r < sys.n_channels(); ++r) {
        Vector d = sys.channel_direction(r);
        Eigen::Index idx;
        d.cwiseAbs().maxCoeff(&idx);
        chan_node[r] = static_cast<int>(idx);
    }

    auto string_node_energy = [&](const Vector& chan_e) {
        Vector en = Vector::Zero(mx.n_nodes);
        for (Eigen::Index r = 0; r < chan_e.size(); ++r)
            if (chan_node[r] >= 0 && chan_node[r] < mx.n_nodes) en(chan_node[r]) += chan_e(r);
        return en;
    };

    // final snapshot
    {
        const Vector& u = res.traj.u.back();
        const Vector& f = res.traj.f.back();
        Vector e = mx.efield(f), hf = mx.hfield(f), d = mx.dfield(u), b = mx.bfield(u);
        Vector esys = mx.node_energy(f);
        Vector estr = res.channel_energy.empty() ? Vector::Zero(mx.n_nodes)
                                                 : string_node_energy(res.channel_energy.back());
        CsvWriter csv(out_dir + "/fields.csv");
        csv.header({"x", "E", "H", "D", "B", "Hsys_density", "Hstr_density"});
        for (int i = 0; i < mx.n_nodes; ++i) {
            const double hmid = i + 1 < mx.n_nodes && i > 0 ? 0.5 * (hf(i - 1) + hf(i))
                               : i + 1 < mx.n_nodes         ? hf(i)
                                                            : hf(i - 1);
            const double bmid = i + 1 < mx.n_nodes && i > 0 ? 0.5 * (b(i - 1) + b(i))
                               : i + 1 < mx.n_nodes         ? b(i)
                                                            : b(i - 1);
            csv.row({i * mx.dx, e(i), hmid, d(i), bmid, esys(i) / mx.dx, estr(i) / mx.dx});
        }
    }

    // energy audit: injected work integrated independently from -int E.j dx dt
    double injected = 0.0;
    {
        const double dt_s = sc.dt * sc.sample_stride;
        double prev_p = 0.0;
        for (size_t k = 0; k < res.traj.t.size(); ++k) {
            Vector e = mx.efield(res.traj.f[k]);
            Vector rho = sc.drive(res.traj.t[k]); // scaled (4 pi j, 0)
            double p = 0.0;
            for (int i = 0; i < mx.n_nodes; ++i) {
                const double j_phys = rho(i) / (mx.scale * 4.0 * M_PI);
                p += -e(i) * j_phys * mx.dx;
            }
            if (k > 0) injected += 0.5 * dt_s * (prev_p + p);
            prev_p = p;
        }
    }

    const Vector& f_end = res.traj.f.back();
    Vector esys = mx.node_energy(f_end);
    double transmitted = 0.0, reflected = 0.0, stored_sys = 0.0;
    for (int i = 0; i < mx.n_nodes; ++i) {
        if (i < mx.slab_begin)
            reflected += esys(i);
        else if (i >= mx.slab_end)
            transmitted += esys(i);
        else
            stored_sys += esys(i);
    }
    const double stored_str = res.ledger.h_str.back();
    const double total_out = transmitted + reflected + stored_sys + stored_str;

    // Poynting continuity residual over a mid-run window (physical densities)
    double poynting_resid = 0.0;
    {
        const double dt_s = sc.dt * sc.sample_stride;
        const size_t n = res.traj.t.size();
        const size_t k0 = n / 4, k1 = (3 * n) / 4;
        for (size_t k = std::max<size_t>(k0, 1); k < std::min(k1, n - 1); k += 4) {
            Vector hd_p = mx.node_energy(res.traj.f[k + 1]);
            Vector hd_m = mx.node_energy(res.traj.f[k - 1]);
            if (!res.channel_energy.empty()) {
                hd_p += string_node_energy(res.channel_energy[k + 1]);
                hd_m += string_node_energy(res.channel_energy[k - 1]);
            }
            Vector spx = mx.poynting(res.traj.f[k]);
            Vector e = mx.efield(res.traj.f[k]);
            Vector rho = sc.drive(res.traj.t[k]);
            for (int i = 2; i + 2 < mx.n_nodes; ++i) {
                const double dhdt = (hd_p(i) - hd_m(i)) / (2.0 * dt_s * mx.dx);
                const double div_s = (spx(i) - spx(i - 1)) / mx.dx;
                const double j_phys = rho(i) / (mx.scale * 4.0 * M_PI);
                const double power = -e(i) * j_phys;
                poynting_resid = std::max(poynting_resid, std::abs(dhdt + div_s - power));
            }
        }
    }

    Summary s;
    s["injected"] = injected;
    s["transmitted"] = transmitted;
    s["reflected"] = reflected;
    s["stored_sys_slab"] = stored_sys;
    s["stored_str"] = stored_str;
    s["audit_rel_err"] = std::abs(injected - total_out) / std::max(std::abs(injected), 1e-300);
    s["poynting_residual"] = poynting_resid;
    s["energy_drift_rel"] = post_drive_drift(res.ledger, drive_end(sc));
    export_summary(out_dir, s);
    return s;
}

int run_scenario(const std::string& config_path, const std::string& command,
                 const std::string& out_dir, int threads) {
    try {
        Config cfg = Config::parse_file(config_path);
        Scenario sc = build_scenario(cfg);
        if (command == "pdc-check")
            run_pdc_check(sc, cfg, out_dir);
        else if (command == "coupling")
            run_coupling(sc, out_dir);
        else if (command == "simulate")
            run_simulate(sc, out_dir, threads);
        else if (command == "compare")
            run_compare(sc, out_dir, threads);
        else if (command == "brillouin")
            run_brillouin(sc, out_dir, threads);
        else if (command == "maxwell1d")
            run_maxwell(sc, out_dir, threads);
        else {
            std::cerr << "unknown command: " << command << "\n";
            return 2;
        }
        return 0;
    } catch (const ConfigInvalid& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const PdcFailed& e) {
        std::cerr << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace tdd
