#pragma once
// Run assembly and study drivers. prepare_run turns a validated RunConfig
// into a model plus seeded scheme state; run_config advances it to t0 + T,
// auditing every step and optionally writing the effective config, energy
// CSV, snapshots, and plot scripts under cfg.out_dir. run_convergence sweeps
// a decreasing dt ladder (rungs run in parallel, capped by SAVFLOW_THREADS)
// and fits the observed order. Scenario presets bundle the example problems
// at desk scale.

#include <string>
#include <vector>

#include "savflow/audit.hpp"
#include "savflow/config.hpp"
#include "savflow/io.hpp"

namespace savflow {

// SAVFLOW_THREADS when set (>= 1), else the hardware concurrency.
int thread_cap();

Model model_from_config(const RunConfig& cfg);
SchemeConfig scheme_from_config(const RunConfig& cfg);

struct PreparedRun {
    Model model; // C0 resolved
    SchemeState state;
};
PreparedRun prepare_run(const RunConfig& cfg);

struct RunArtifacts {
    std::vector<EnergyRecord> records;
    std::vector<std::string> snapshot_paths;
    std::string csv_path;       // empty when outputs were not written
    long disc_fallbacks = 0;    // rsav_cn steps that hit the lambda = 1 fallback
};
RunArtifacts run_config(const RunConfig& cfg, bool write_outputs = true);

enum class ConvergenceReference { manufactured, fine_dt_self_reference };

struct OrderEstimate {
    std::vector<double> dt;
    std::vector<double> error;    // discrete L2 error at t0 + T
    std::vector<double> pairwise; // log(e_{i-1}/e_i) / log(dt_{i-1}/dt_i)
    double fitted = 0.0;          // least-squares slope of log e vs log dt
};

// Ladder must be strictly decreasing; T must divide every rung. The
// self-reference variant compares against the same scheme run at
// ladder.back()/self_refine. With write_outputs the table lands in
// cfg.out_dir/convergence_<scheme>.csv (plus a plot script if enabled).
OrderEstimate run_convergence(const RunConfig& cfg, const std::vector<double>& ladder,
                              ConvergenceReference ref = ConvergenceReference::manufactured,
                              int self_refine = 8, bool write_outputs = false);

std::vector<std::string> scenario_names();
// Desk-scale defaults for: ac_caseA, ac_caseB, ch_caseA, ch_caseB, pfc_2d,
// pfc_3d, ns_caseA, ns_shear. Throws ConfigError for unknown names.
RunConfig scenario_config(const std::string& name);

} // namespace savflow
