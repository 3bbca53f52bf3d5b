#pragma once
// Run configuration: a four-section INI file (model, grid, scheme, output).
// Parsing is strict: unknown sections or keys, duplicate keys, and malformed
// values are ConfigErrors carrying the line number. serialize_config emits
// the canonical form; parse(serialize(c)) reproduces c exactly (doubles are
// printed with 17 significant digits).
//
//   [model]  kind M alpha0 eps beta nu ic forcing ic_alpha ic_r0 ic_eps
//            ic_phi_bar ic_c1 ic_c2 ic_rho ic_perturb ic_amp
//            (a manufactured ic starts at scheme.t0)
//   [grid]   dim modes extents            (comma lists, one entry per axis)
//   [scheme] name k dt T t0 C C0 eta exponent_override dealias startup
//            startup_substeps sav_denominator
//   [output] dir csv snapshot_times snapshot_format plot_scripts seed
//
// Lines whose first non-blank character is '#' or ';' are comments.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "savflow/model.hpp"
#include "savflow/scheme.hpp"

namespace savflow {

struct RunConfig {
    // [model]
    ModelKind model = ModelKind::allen_cahn;
    ModelParams params;
    IcTag ic = IcTag::manufactured;
    IcParams ic_params;
    std::string forcing = "auto"; // auto | none | manufactured

    // [grid]
    int dim = 2;
    std::vector<int> modes = {64, 64};
    std::vector<double> extents = {2.0, 2.0};

    // [scheme]
    SchemeKind scheme = SchemeKind::eop_gsav;
    int k = 2;
    double dt = 1e-2;
    double T = 0.5;
    double t0 = 0.0;
    std::optional<double> C;  // unset: model default
    std::optional<double> C0; // unset: auto max(0, 1 - E(phi0))
    double eta = 0.95;
    int exponent_override = 0;
    DealiasRule dealias = DealiasRule::none;
    StartupMethod startup = StartupMethod::cold_bdf1_substeps;
    int startup_substeps = 0;
    SavDenominator sav_denominator = SavDenominator::extrapolated;

    // [output]
    std::string out_dir = "out";
    std::string csv = "energy.csv";
    std::vector<double> snapshot_times;
    std::string snapshot_format = "savf1";
    bool plot_scripts = false;
    std::uint64_t seed = 0;
};

// Canonical names used by the config format and the CLI.
std::string to_string(ModelKind k);
std::string to_string(SchemeKind k);
std::string to_string(IcTag t);
std::string to_string(DealiasRule r);
std::string to_string(StartupMethod s);
std::string to_string(SavDenominator d);
ModelKind model_from_name(const std::string& s);
SchemeKind scheme_from_name(const std::string& s);
IcTag ic_from_name(const std::string& s);

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

// "section.key=value", same value syntax as the file. Revalidates.
void apply_override(RunConfig& cfg, const std::string& spec);

void validate_config(const RunConfig& cfg);
std::string serialize_config(const RunConfig& cfg);

// "auto" resolves to manufactured exactly when ic = manufactured.
ForcingKind resolved_forcing(const RunConfig& cfg);
// Number of steps implied by T/dt; ConfigError unless T is an integer
// multiple of dt to 1e-9 relative.
long total_steps(const RunConfig& cfg);

} // namespace savflow
