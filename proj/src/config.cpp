#include "locpriv/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "locpriv/eval.hpp"

namespace locpriv {

using nlohmann::json;

namespace {

template <typename T>
void read_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void read_path(const json& j, const char* key, std::filesystem::path& out) {
    if (j.contains(key)) out = j.at(key).get<std::string>();
}

GbdtParams parse_model(const json& j) {
    GbdtParams p;
    read_if(j, "learning_rate", p.learning_rate);
    read_if(j, "n_rounds", p.n_rounds);
    read_if(j, "max_depth", p.max_depth);
    read_if(j, "min_samples_leaf", p.min_samples_leaf);
    read_if(j, "reg_lambda", p.reg_lambda);
    read_if(j, "n_threads", p.n_threads);
    if (p.learning_rate <= 0 || p.n_rounds < 0 || p.max_depth < 1 ||
        p.min_samples_leaf < 1 || p.reg_lambda < 0)
        throw std::invalid_argument("invalid model parameters");
    return p;
}

SynthSpec parse_synth(const json& j) {
    int n_categories = 4;
    read_if(j, "n_categories", n_categories);
    std::uint64_t seed = 1;
    read_if(j, "seed", seed);
    SynthSpec spec = SynthSpec::basic(n_categories, seed);
    read_if(j, "region_km", spec.region_km);
    read_if(j, "categories", spec.categories);
    read_if(j, "shares", spec.shares);
    read_if(j, "clusters_per_category", spec.clusters_per_category);
    read_if(j, "cluster_radius_m", spec.cluster_radius_m);
    read_if(j, "n_pois", spec.n_pois);
    read_if(j, "n_users", spec.n_users);
    read_if(j, "min_locations_per_user", spec.min_locations_per_user);
    read_if(j, "max_locations_per_user", spec.max_locations_per_user);
    read_if(j, "min_visits_per_location", spec.min_visits_per_location);
    read_if(j, "max_visits_per_location", spec.max_visits_per_location);
    read_if(j, "peak_hour", spec.peak_hour);
    read_if(j, "hour_sd", spec.hour_sd);
    read_if(j, "temporal_signal", spec.temporal_signal);
    if (j.contains("anchor_lat")) spec.anchor.lat = j.at("anchor_lat").get<double>();
    if (j.contains("anchor_lon")) spec.anchor.lon = j.at("anchor_lon").get<double>();
    // Re-derive defaults that depend on the category count when only
    // categories/shares were overridden.
    if (spec.peak_hour.size() != spec.categories.size()) {
        spec.peak_hour.clear();
        for (std::size_t c = 0; c < spec.categories.size(); ++c)
            spec.peak_hour.push_back(
                std::fmod(8.0 + 24.0 * c / spec.categories.size(), 24.0));
    }
    if (spec.shares.size() != spec.categories.size())
        spec.shares.assign(spec.categories.size(),
                           1.0 / spec.categories.size());
    spec.validate();
    return spec;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_string(const std::string& text) {
    const json j = json::parse(text);
    ExperimentConfig cfg;
    read_if(j, "name", cfg.name);
    read_if(j, "seed", cfg.seed);
    read_path(j, "output_dir", cfg.output_dir);
    if (j.contains("dataset")) {
        read_path(j.at("dataset"), "samples_csv", cfg.samples_csv);
        read_path(j.at("dataset"), "pois_csv", cfg.pois_csv);
    }
    if (j.contains("ingest")) {
        IngestConfig ing;
        const auto& ij = j.at("ingest");
        read_path(ij, "checkins_tsv", ing.checkins_tsv);
        read_path(ij, "category_mapping", ing.category_mapping);
        read_if(ij, "poi_source", ing.poi_source);
        read_path(ij, "osm_pois_csv", ing.osm_pois_csv);
        read_path(ij, "osm_mapping", ing.osm_mapping);
        if (ing.poi_source != "foursquare" && ing.poi_source != "osm")
            throw std::invalid_argument("poi_source must be foursquare or osm");
        cfg.ingest = std::move(ing);
    }
    if (j.contains("experiment")) {
        const auto& ej = j.at("experiment");
        auto& e = cfg.experiment;
        read_if(ej, "scenarios", e.scenarios);
        read_if(ej, "radii_m", e.radii_m);
        read_if(ej, "context_aware_m", e.context_aware_m);
        read_if(ej, "poi_fraction", e.poi_fraction);
        read_if(ej, "split", e.split);
        read_if(ej, "cv_folds", e.cv_folds);
        read_if(ej, "knn_k", e.knn_k);
        read_if(ej, "feature_radius_m", e.feature_radius_m);
        read_if(ej, "profile_weighting", e.profile_weighting);
        read_if(ej, "density_bin_edges", e.density_bin_edges);
        read_if(ej, "density_radius_m", e.density_radius_m);
        read_if(ej, "dump_features", e.dump_features);
        read_if(ej, "dump_models", e.dump_models);
        if (ej.contains("model")) e.model = parse_model(ej.at("model"));

        for (const auto& s : e.scenarios) (void)scenario_from_name(s);
        for (double r : e.radii_m)
            if (r < 0) throw std::invalid_argument("obfuscation radius must be >= 0");
        for (int m : e.context_aware_m)
            if (m < 1) throw std::invalid_argument("context-aware m must be >= 1");
        if (!(e.poi_fraction > 0.0) || e.poi_fraction > 1.0)
            throw std::invalid_argument("poi_fraction must be in (0, 1]");
        if (e.split != "user_cv" && e.split != "spatial_grid")
            throw std::invalid_argument("split must be user_cv or spatial_grid");
        if (e.profile_weighting != "visits" && e.profile_weighting != "locations")
            throw std::invalid_argument("profile_weighting must be visits or locations");
        if (e.cv_folds < 2 || e.knn_k < 1 || !(e.feature_radius_m > 0))
            throw std::invalid_argument("invalid experiment parameters");
    }
    if (j.contains("variogram")) {
        const auto& vj = j.at("variogram");
        read_if(vj, "subregion_km", cfg.variogram.subregion_km);
        read_if(vj, "n_pairs", cfg.variogram.n_pairs);
        read_if(vj, "bin_edges_m", cfg.variogram.bin_edges_m);
    }
    if (j.contains("synth")) cfg.synth = parse_synth(j.at("synth"));
    return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return from_json_string(text);
}

std::string ExperimentConfig::to_json_string() const {
    json j;
    j["name"] = name;
    j["seed"] = seed;
    j["output_dir"] = output_dir.string();
    j["dataset"] = {{"samples_csv", samples_csv.string()},
                    {"pois_csv", pois_csv.string()}};
    if (ingest) {
        j["ingest"] = {{"checkins_tsv", ingest->checkins_tsv.string()},
                       {"category_mapping", ingest->category_mapping.string()},
                       {"poi_source", ingest->poi_source},
                       {"osm_pois_csv", ingest->osm_pois_csv.string()},
                       {"osm_mapping", ingest->osm_mapping.string()}};
    }
    const auto& e = experiment;
    j["experiment"] = {{"scenarios", e.scenarios},
                       {"radii_m", e.radii_m},
                       {"context_aware_m", e.context_aware_m},
                       {"poi_fraction", e.poi_fraction},
                       {"split", e.split},
                       {"cv_folds", e.cv_folds},
                       {"knn_k", e.knn_k},
                       {"feature_radius_m", e.feature_radius_m},
                       {"profile_weighting", e.profile_weighting},
                       {"density_bin_edges", e.density_bin_edges},
                       {"density_radius_m", e.density_radius_m},
                       {"dump_features", e.dump_features},
                       {"dump_models", e.dump_models},
                       {"model",
                        {{"learning_rate", e.model.learning_rate},
                         {"n_rounds", e.model.n_rounds},
                         {"max_depth", e.model.max_depth},
                         {"min_samples_leaf", e.model.min_samples_leaf},
                         {"reg_lambda", e.model.reg_lambda}}}};
    j["variogram"] = {{"subregion_km", variogram.subregion_km},
                      {"n_pairs", variogram.n_pairs},
                      {"bin_edges_m", variogram.bin_edges_m}};
    if (synth) {
        j["synth"] = {{"region_km", synth->region_km},
                      {"categories", synth->categories},
                      {"shares", synth->shares},
                      {"clusters_per_category", synth->clusters_per_category},
                      {"cluster_radius_m", synth->cluster_radius_m},
                      {"n_pois", synth->n_pois},
                      {"n_users", synth->n_users},
                      {"min_locations_per_user", synth->min_locations_per_user},
                      {"max_locations_per_user", synth->max_locations_per_user},
                      {"min_visits_per_location", synth->min_visits_per_location},
                      {"max_visits_per_location", synth->max_visits_per_location},
                      {"peak_hour", synth->peak_hour},
                      {"hour_sd", synth->hour_sd},
                      {"temporal_signal", synth->temporal_signal},
                      {"anchor_lat", synth->anchor.lat},
                      {"anchor_lon", synth->anchor.lon},
                      {"seed", synth->seed}};
    }
    return j.dump(2);
}

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void write_manifest(const std::filesystem::path& output_dir,
                    const ExperimentConfig& config) {
    std::filesystem::create_directories(output_dir);
    const std::string canonical = config.to_json_string();
    char hash[20];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(canonical)));
    json j;
    j["version"] = kVersion;
    j["config_hash"] = hash;
    j["seed"] = config.seed;
    j["config"] = json::parse(canonical);
    std::ofstream out(output_dir / "manifest.json");
    if (!out) throw std::runtime_error("cannot write manifest");
    out << j.dump(2) << '\n';
}

}  // namespace locpriv
