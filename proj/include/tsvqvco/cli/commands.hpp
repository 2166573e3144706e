#pragma once

// Subcommand bodies. Each writes its JSON report to `out` and, when an output
// directory is given, the same report plus any tables to fixed file names:
//   extract   extract.json, extract.txt
//   design    design.json
//   simulate  metrics.json, waveforms.csv
//   sweep     sweep_summary.json, sweep.csv
// `report` reads those names back from a directory.

#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tsvqvco/cli/documents.hpp"

namespace tsvqvco::cli {

enum ExitCode { exit_ok = 0, exit_input = 2, exit_numeric = 3 };

/// Runs `body`, mapping exceptions to exit codes and writing diagnostics to `err`.
int guarded(const std::function<void()>& body, std::ostream& err);

// ---- extract --------------------------------------------------------------

struct ExtractArgs {
    std::string geometry;
    std::optional<double> freq;  // Hz
    std::string out_dir;
    bool table = false;          // human-readable table on stdout instead of JSON
};

Json extract_report(const GeometryDoc& doc, std::optional<double> freq);

std::string extract_table(const Json& report);

void run_extract(const ExtractArgs& a, std::ostream& out);

// ---- design ---------------------------------------------------------------

struct DesignArgs {
    std::string spec;
    std::string transformer;
    std::string out_dir;
};

inline constexpr double noise_offset = 1e6;  // Hz

/// Leeson estimate at 1 MHz for a tank driven to the spec's swing:
/// differential peak = single-ended p-p, P_sig = V²/(2R), no excess noise.
double design_phase_noise(const analysis::TankParams& t, double swing);

Json design_report(const SpecDoc& s, const em::TransformerModel& x);

void run_design(const DesignArgs& a, std::ostream& out);

// ---- simulate -------------------------------------------------------------

struct SimulateArgs {
    std::string topology;  // empty: take it from the config
    std::string config;
    std::string out_dir;
};

struct SimulationResult {
    sim::Waveforms waveforms;
    sim::SimMetrics metrics;
};

SimulationResult simulate(const SimDoc& d);

void run_simulate(const SimulateArgs& a, std::ostream& out);

// ---- sweep ----------------------------------------------------------------

struct SweepArgs {
    std::string param;  // v_c | array_code | gm_margin
    double from = 0.0;
    double to = 0.0;
    int steps = 0;
    std::string config;
    std::string out_dir;
    int jobs = 1;
};

struct SweepRow {
    std::string code;
    double value = 0.0;
    double f_osc = std::numeric_limits<double>::quiet_NaN();   // Hz
    double swing = std::numeric_limits<double>::quiet_NaN();   // V p-p
    double power = std::numeric_limits<double>::quiet_NaN();   // mW
    double slope = std::numeric_limits<double>::quiet_NaN();   // 1/s
    std::string status;
};

struct SweepPoint {
    std::string code;
    double value;
};

std::vector<SweepPoint> sweep_points(const SweepArgs& a, const SimDoc& d);

std::string sweep_csv(const std::string& param, const std::vector<SweepRow>& rows);

inline constexpr double reference_tuning_ratio = 1.7;

Json sweep_summary(const SweepArgs& a, const std::vector<SweepRow>& rows);

void run_sweep(const SweepArgs& a, std::ostream& out);

// ---- report ---------------------------------------------------------------

void run_report(const std::string& dir, std::ostream& out);

}  // namespace tsvqvco::cli
