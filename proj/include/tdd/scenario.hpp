#pragma once

#include <map>
#include <optional>
#include <string>

#include "tdd/analysis.hpp"
#include "tdd/config.hpp"
#include "tdd/extension.hpp"
#include "tdd/models.hpp"
#include "tdd/reduced.hpp"

namespace tdd {

// Assembled run description; built from a Config and consumed by the
// command drivers below.
struct Scenario {
    enum class SystemKind { Oscillator, Nonlinear, Maxwell } system_kind;

    SystemSpec spec;
    SusceptibilityModel model;
    Drive drive;

    // fixtures (filled per kind)
    std::optional<DampedOscillator> damped;
    std::optional<NonlinearOscillator> nonlinear;
    std::optional<Maxwell1D> maxwell;

    // initial data
    Vector u0; // empty = rest

    // integration
    double dt = 1e-3, t_final = 10.0;
    int sample_stride = 1;
    StringRep representation = StringRep::Spectral;
    IntegratorKind integrator = IntegratorKind::ImplicitMidpoint;
    double ds = 0.0, s_extent = 0.0;

    // coupling grid
    double dkappa = 0.05, kappa_max = 100.0;
    CouplingOptions coupling_opts;

    // diagnostics
    double carrier = 0.0;
    double sigma = 0.0;   // 0 = auto
    double lowpass = 0.0; // 0 = auto
};

Scenario build_scenario(const Config& cfg);

using Summary = std::map<std::string, double>;

// Writes summary.txt from the collected key/value pairs; NoArtifacts if the
// directory holds no csv artifacts.
void export_summary(const std::string& out_dir, const Summary& kv);

// Command drivers.  Each writes its CSV artifacts plus summary.txt into
// out_dir and returns the summary map.
Summary run_pdc_check(const Scenario& sc, const Config& cfg, const std::string& out_dir);
Summary run_coupling(const Scenario& sc, const std::string& out_dir);
Summary run_simulate(const Scenario& sc, const std::string& out_dir, int threads);
Summary run_compare(const Scenario& sc, const std::string& out_dir, int threads);
Summary run_brillouin(const Scenario& sc, const std::string& out_dir, int threads);
Summary run_maxwell(const Scenario& sc, const std::string& out_dir, int threads);

// Dispatch by command name; returns the process exit status (0 success,
// 2 config errors, 3 PDC failure, 4 construction/validation failures).
int run_scenario(const std::string& config_path, const std::string& command,
                 const std::string& out_dir, int threads);

} // namespace tdd
