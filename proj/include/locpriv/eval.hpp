#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "locpriv/features.hpp"
#include "locpriv/gbdt.hpp"
#include "locpriv/ingest.hpp"
#include "locpriv/obfuscate.hpp"

namespace locpriv {

enum class Scenario {
    uninformed,
    spatial_join,
    gbdt_temporal,
    gbdt_spatial,
    gbdt_spatiotemporal,
};

std::string scenario_name(Scenario s);
Scenario scenario_from_name(const std::string& name);
FeatureMode scenario_feature_mode(Scenario s);

struct SplitPlan {
    enum class Mode { user_cv, spatial_grid };
    Mode mode = Mode::user_cv;
    int n_folds = 0;
    std::vector<int> fold_of;  // per sample index
    std::uint64_t seed = 0;
    double fold_size_ratio = 0.0;  // largest / smallest fold
};

// Users shuffled deterministically by seed and dealt into k near-equal
// groups; all samples of a user share a fold.
SplitPlan make_user_folds(const std::vector<UserLocationSample>& samples, int k,
                          std::uint64_t seed);

// 3x3 grid at the empirical terciles of the true x and y coordinates.
SplitPlan make_spatial_folds(const std::vector<UserLocationSample>& samples,
                             const std::vector<LocalPoint>& true_points);

struct SampleOutcome {
    int predicted = -1;
    std::vector<double> proba;  // per class
    bool correct = false;
};

struct EvaluationReport {
    std::string scenario;
    std::string obfuscation;  // e.g. "fixed r=100" or "context m=16"
    double accuracy = 0.0;
    std::vector<std::vector<std::int64_t>> confusion;  // [true][pred]
    std::vector<std::optional<double>> sensitivity;    // diag / row support
    std::vector<SampleOutcome> outcomes;               // per sample index
    std::vector<int> fold_of;                          // copied from the plan
    double mean_r_used = 0.0;                          // context-aware only

    static EvaluationReport from_outcomes(const std::vector<int>& labels,
                                          std::vector<SampleOutcome> outcomes,
                                          int n_classes);
};

struct RunScenarioInputs {
    const Dataset& data;
    const std::vector<LocalPoint>& true_points;  // projected, unobfuscated
    const PoiContext* pois = nullptr;            // required unless temporal-only
    int knn_k = kDefaultKnnK;
    double feature_radius_m = kDefaultFeatureRadiusM;
    GbdtParams model_params;
    std::uint64_t seed = 0;
};

// Obfuscates once per policy, featurizes, then trains/predicts per fold and
// pools every test fold into one report.
EvaluationReport run_scenario(const RunScenarioInputs& in, Scenario scenario,
                              const ObfuscationPolicy& policy,
                              const SplitPlan& plan);

struct DensityBin {
    double lo = 0.0;                 // inclusive
    std::optional<double> hi;        // exclusive; nullopt = open-ended
    std::size_t n_samples = 0;
    double accuracy = 0.0;
    double mean_density = 0.0;
};

struct DensityReport {
    std::vector<DensityBin> bins;  // empty bins omitted
    double mean_density_correct = 0.0;
    double mean_density_incorrect = 0.0;
};

// POI counts are measured at the true (non-obfuscated) coordinates.
DensityReport density_stratified_accuracy(const EvaluationReport& report,
                                          const std::vector<LocalPoint>& true_points,
                                          const PoiContext& pois,
                                          double radius_m,
                                          const std::vector<double>& bin_edges);

}  // namespace locpriv
