#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "locpriv/gbdt.hpp"
#include "locpriv/synth.hpp"

namespace locpriv {

struct IngestConfig {
    std::filesystem::path checkins_tsv;
    std::filesystem::path category_mapping;
    std::string poi_source = "foursquare";  // "foursquare" | "osm"
    std::filesystem::path osm_pois_csv;
    std::filesystem::path osm_mapping;
};

struct ExperimentSection {
    std::vector<std::string> scenarios;
    std::vector<double> radii_m;       // fixed-radius sweep points
    std::vector<int> context_aware_m;  // context-aware sweep points
    double poi_fraction = 1.0;
    std::string split = "user_cv";  // "user_cv" | "spatial_grid"
    int cv_folds = 10;
    int knn_k = 20;
    double feature_radius_m = 200.0;
    std::string profile_weighting = "visits";  // "visits" | "locations"
    std::vector<double> density_bin_edges = {0, 10, 25, 50, 100, 200, 500};
    double density_radius_m = 200.0;
    GbdtParams model;
    bool dump_features = false;  // write features.csv per sweep point
    bool dump_models = false;    // train on all samples and save model.json
};

struct VariogramSection {
    double subregion_km = 20.0;
    std::size_t n_pairs = 1000000;
    std::vector<double> bin_edges_m;  // default doubling edges when empty
};

struct ExperimentConfig {
    std::string name = "run";
    std::uint64_t seed = 0;
    std::filesystem::path output_dir;
    std::filesystem::path samples_csv;
    std::filesystem::path pois_csv;
    std::optional<IngestConfig> ingest;
    ExperimentSection experiment;
    VariogramSection variogram;
    std::optional<SynthSpec> synth;

    // Parses and validates value ranges; file existence is checked by the
    // commands that need the files.
    static ExperimentConfig load(const std::filesystem::path& path);
    static ExperimentConfig from_json_string(const std::string& text);
    std::string to_json_string() const;  // canonical (sorted keys)
};

std::uint64_t fnv1a64(const std::string& text);

inline constexpr const char* kVersion = "0.1.0";

// manifest.json with everything needed to reproduce a run byte-for-byte.
void write_manifest(const std::filesystem::path& output_dir,
                    const ExperimentConfig& config);

}  // namespace locpriv
