// tsvqvco: extract, design, simulate, sweep, report.
#include <iostream>

#include <CLI11.hpp>

#include "tsvqvco/cli/commands.hpp"

using namespace tsvqvco::cli;

int main(int argc, char** argv) {
    CLI::App app{"TSV transformer extraction and transformer-coupled QVCO design/simulation"};
    app.require_subcommand(1);

    ExtractArgs ex;
    double freq = 0.0;
    auto* extract = app.add_subcommand("extract", "Extract the lumped 3-coil model of a TSV transformer");
    extract->add_option("--geometry", ex.geometry, "Geometry JSON")->required();
    auto* freq_opt = extract->add_option("--freq", freq, "Evaluation frequency in Hz (default 2.5e9)");
    extract->add_option("--out", ex.out_dir, "Also write extract.json and extract.txt here");
    extract->add_flag("--table", ex.table, "Print the human-readable table instead of JSON");

    DesignArgs de;
    auto* design = app.add_subcommand("design", "Size the tank from a spec and a transformer model");
    design->add_option("--spec", de.spec, "Design spec JSON")->required();
    design->add_option("--transformer", de.transformer, "Transformer model JSON (extract output or bare model)")
        ->required();
    design->add_option("--out", de.out_dir, "Also write design.json here");

    SimulateArgs si;
    auto* simulate = app.add_subcommand("simulate", "Transient simulation of one oscillator");
    simulate->add_option("--topology", si.topology, "lc-vco, tf-vco, cr-vco or tc-qvco");
    simulate->add_option("--config", si.config, "Simulation config JSON")->required();
    simulate->add_option("--out", si.out_dir, "Directory for metrics.json and waveforms.csv");

    SweepArgs sw;
    auto* sweep = app.add_subcommand("sweep", "Tuning or start-up sweep");
    sweep->add_option("--param", sw.param, "v_c, array_code or gm_margin")->required();
    sweep->add_option("--from", sw.from, "First value")->required();
    sweep->add_option("--to", sw.to, "Last value")->required();
    sweep->add_option("--steps", sw.steps, "Number of points, at least 2")->required();
    sweep->add_option("--config", sw.config, "Simulation config JSON")->required();
    sweep->add_option("--out", sw.out_dir, "Directory for sweep.csv and sweep_summary.json");
    sweep->add_option("--jobs", sw.jobs, "Worker threads (default 1)");

    std::string report_dir;
    auto* report = app.add_subcommand("report", "Merge the outputs found in a directory");
    report->add_option("--dir", report_dir, "Results directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_input;
    }

    return guarded(
        [&] {
            if (*extract) {
                if (*freq_opt) ex.freq = freq;
                run_extract(ex, std::cout);
            } else if (*design) {
                run_design(de, std::cout);
            } else if (*simulate) {
                run_simulate(si, std::cout);
            } else if (*sweep) {
                run_sweep(sw, std::cout);
            } else {
                run_report(report_dir, std::cout);
            }
        },
        std::cerr);
}
