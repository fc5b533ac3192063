#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "locpriv/parallel.hpp"
#include "locpriv/pipeline.hpp"

namespace {

void apply_thread_cap() {
    if (const char* env = std::getenv("LOCPRIV_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) locpriv::set_max_threads(n);
    }
}

void print_ingest_counts(const locpriv::IngestCounts& counts) {
    std::cout << "check-ins parsed:   " << counts.checkins_parsed << "\n"
              << "malformed lines:    " << counts.malformed_lines << "\n"
              << "dropped labels:     " << counts.dropped_labels << "\n"
              << "removed repeats:    " << counts.removed_repeats << " ("
              << counts.removed_fraction * 100.0 << "%)\n"
              << "samples:            " << counts.samples << "\n"
              << "users:              " << counts.users << "\n"
              << "POIs:               " << counts.pois << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    apply_thread_cap();

    CLI::App app{"Semantic location-privacy attack simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string input_path;
    std::string output_path;
    std::string scenario;
    std::string x_col = "radius_m";
    std::string y_col = "accuracy";
    std::vector<std::string> run_dirs;

    auto* ingest = app.add_subcommand("ingest", "Parse and clean a check-in dataset");
    ingest->add_option("--config", config_path, "experiment config JSON")->required();

    auto* synth = app.add_subcommand("synth", "Generate a synthetic city dataset");
    synth->add_option("--config", config_path, "experiment config JSON")->required();

    auto* run = app.add_subcommand("run", "Run the attack-scenario sweep");
    run->add_option("--config", config_path, "experiment config JSON")->required();

    auto* vario = app.add_subcommand("variogram", "Category semivariogram of the POIs");
    vario->add_option("--config", config_path, "experiment config JSON")->required();

    auto* fit = app.add_subcommand("fit", "Fit a + c*exp(-lambda*x) to a sweep summary");
    fit->add_option("--input", input_path, "sweep_summary.csv")->required();
    fit->add_option("--scenario", scenario, "restrict to one scenario");
    fit->add_option("--x-col", x_col, "x column (default radius_m)");
    fit->add_option("--y-col", y_col, "y column (default accuracy)");
    fit->add_option("--output", output_path, "output JSON path");

    auto* report = app.add_subcommand("report", "Print (and macro-average) sweep summaries");
    report->add_option("dirs", run_dirs, "run output directories")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ingest) {
            const auto config = locpriv::ExperimentConfig::load(config_path);
            print_ingest_counts(locpriv::run_ingest(config));
        } else if (*synth) {
            const auto config = locpriv::ExperimentConfig::load(config_path);
            print_ingest_counts(locpriv::run_synth(config));
        } else if (*run) {
            const auto config = locpriv::ExperimentConfig::load(config_path);
            const auto outcome = locpriv::run_sweep(config);
            std::cout << locpriv::format_summary_table(outcome.rows);
            if (!outcome.failures.empty()) {
                for (const auto& f : outcome.failures)
                    std::cerr << "FAILED " << f.point << ": " << f.message << "\n";
                return 1;
            }
        } else if (*vario) {
            const auto config = locpriv::ExperimentConfig::load(config_path);
            const auto result = locpriv::run_variogram(config);
            for (std::size_t t = 0; t + 1 < result.bin_edges.size(); ++t) {
                std::cout << "(" << result.bin_edges[t] << ", "
                          << result.bin_edges[t + 1] << "]: ";
                if (result.gamma[t])
                    std::cout << *result.gamma[t];
                else
                    std::cout << "-";
                std::cout << "  (" << result.pair_counts[t] << " pairs)\n";
            }
        } else if (*fit) {
            const auto decay =
                locpriv::fit_from_summary(input_path, scenario, x_col, y_col);
            std::cout << "a=" << decay.a << " c=" << decay.c
                      << " lambda=" << decay.lambda << " rss=" << decay.rss << "\n";
            if (!output_path.empty())
                locpriv::write_decay_fit_json(output_path, decay);
        } else if (*report) {
            std::vector<std::filesystem::path> dirs(run_dirs.begin(), run_dirs.end());
            std::cout << locpriv::format_summary_table(
                locpriv::aggregate_summaries(dirs));
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}
