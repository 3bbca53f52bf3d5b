#pragma once
// On-disk formats.
//
// Energy CSV: header
//   step,t,E_original,E_modified,R,diagnostic_tag,diagnostic_value,dissipation_residual
// one row per record, doubles printed with %.17g, LF line endings. The writer
// is deterministic: identical records produce byte-identical files.
//
// Snapshot (format "savf1", little-endian):
//   bytes  "SAVF1"
//   u32    field-name length, then the name bytes
//   u32    dim
//   u32[dim]  modes per axis
//   f64[dim]  extents per axis
//   f64    time
//   u32    components
//   f64[components * prod(modes)] payload, component-major, row-major within
//   each component (last axis fastest, matching the in-memory layout).
//
// Plot scripts are self-contained matplotlib programs referencing their
// inputs by the paths given at emission time; the field script embeds its own
// savf1 reader.

#include <string>
#include <vector>

#include "savflow/audit.hpp"
#include "savflow/field.hpp"

namespace savflow {

void write_energy_csv(const std::vector<EnergyRecord>& recs, const std::string& path);
std::vector<EnergyRecord> read_energy_csv(const std::string& path);

void write_snapshot(const std::string& path, const std::string& field_name,
                    const ScalarField& f, double time);
void write_snapshot(const std::string& path, const std::string& field_name,
                    const VectorField& u, double time);

struct Snapshot {
    std::string field_name;
    PeriodicGrid grid;
    double time = 0.0;
    int components = 1;
    std::vector<double> payload; // component-major
};
Snapshot read_snapshot(const std::string& path);

void write_comparison_csv(const ComparisonTable& tab, const std::string& path);
// dt ladder results; pairwise has one entry per adjacent rung pair (nan-padded
// to align with the rows).
void write_convergence_csv(const std::vector<double>& dt,
                           const std::vector<double>& error,
                           const std::vector<double>& pairwise_order,
                           const std::string& path);

void write_text_file(const std::string& path, const std::string& content);

// Scripts: energy (dual-axis E_original/E_modified traces, one figure),
// convergence (one loglog figure per input CSV with reference slopes 1..4),
// field (one figure per snapshot; magnitude for vector fields).
void emit_energy_plot(const std::string& script_path,
                      const std::vector<std::string>& csv_paths,
                      const std::string& image_path);
void emit_convergence_plot(const std::string& script_path,
                           const std::vector<std::string>& csv_paths);
void emit_field_plot(const std::string& script_path,
                     const std::vector<std::string>& snapshot_paths);

} // namespace savflow
