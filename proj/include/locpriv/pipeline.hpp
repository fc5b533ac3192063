#pragma once

#include <string>
#include <vector>

#include "locpriv/config.hpp"
#include "locpriv/eval.hpp"
#include "locpriv/profiling.hpp"
#include "locpriv/variogram.hpp"

namespace locpriv {

struct IngestCounts {
    std::size_t checkins_parsed = 0;
    std::size_t malformed_lines = 0;
    std::size_t dropped_labels = 0;
    std::size_t removed_repeats = 0;
    double removed_fraction = 0.0;
    std::size_t samples = 0;
    std::size_t users = 0;
    std::size_t pois = 0;
};

// parse -> map -> merge -> group; writes the canonical samples/POI CSVs.
// Throws when no check-ins survive parsing.
IngestCounts run_ingest(const ExperimentConfig& config);

struct SweepRow {
    std::string scenario;
    std::string mode;      // "fixed" | "context_aware" | "none"
    double radius_m = 0.0; // fixed radius, or mean r_used for context-aware
    int m = 0;             // context-aware only
    double accuracy = 0.0;
    double profiling_error = 0.0;  // soft profiles, mean over users
    double hit_at_5 = 0.0;
    double median_privacy_loss = 0.0;
};

struct SweepFailure {
    std::string point;
    std::string message;
};

struct SweepOutcome {
    std::vector<SweepRow> rows;
    std::vector<SweepFailure> failures;
};

// One (scenario x sweep point) grid: obfuscate -> featurize -> CV ->
// metrics -> profiling -> privacy loss. Writes a JSON + CSV bundle per
// point, sweep_summary.csv and manifest.json under config.output_dir.
// Failures are recorded per point and do not stop the sweep.
SweepOutcome run_sweep(const ExperimentConfig& config);

VariogramResult run_variogram(const ExperimentConfig& config);

// Generates the synthetic city and writes the canonical CSVs.
IngestCounts run_synth(const ExperimentConfig& config);

// Reads a sweep summary CSV and fits the decay curve to (x_col, y_col),
// optionally restricted to one scenario.
DecayFit fit_from_summary(const std::filesystem::path& summary_csv,
                          const std::string& scenario,
                          const std::string& x_col, const std::string& y_col);
void write_decay_fit_json(const std::filesystem::path& path, const DecayFit& fit);

// Macro-averages matching (scenario, mode, radius, m) rows across several
// run directories; with one directory this is just its summary.
std::vector<SweepRow> aggregate_summaries(
    const std::vector<std::filesystem::path>& run_dirs);
std::string format_summary_table(const std::vector<SweepRow>& rows);

void write_sweep_summary_csv(const std::filesystem::path& path,
                             const std::vector<SweepRow>& rows);

}  // namespace locpriv
