#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "locpriv/geo.hpp"
#include "locpriv/ingest.hpp"
#include "locpriv/spatial_index.hpp"

namespace locpriv {

enum class FeatureMode { temporal, spatial, spatiotemporal };

struct TemporalFeatures {
    double log_visit_count = 0.0;
    double rel_visit_frequency = 0.0;
    double mean_log_duration_hours = 0.0;
    double frac_weekend = 0.0;
    double frac_morning = 0.0;
    double frac_afternoon = 0.0;
    double frac_evening = 0.0;
    double frac_night = 0.0;
    double mean_sin_hour = 0.0;
    double mean_cos_hour = 0.0;

    static constexpr int kCount = 10;
};

struct SpatialFeatures {
    std::vector<int> knn_category_counts;      // length |categories|
    double knn_mean_distance = 0.0;            // meters
    std::vector<int> radius_category_counts;   // length |categories|
    std::vector<double> radius_min_distance;   // fill value r_f when absent
};

// Row-major matrix with a stable named-column schema.
struct FeatureMatrix {
    std::vector<std::string> columns;
    std::vector<double> values;
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;

    double at(std::size_t r, std::size_t c) const { return values[r * n_cols + c]; }
    const double* row(std::size_t r) const { return values.data() + r * n_cols; }
    int column_index(const std::string& name) const;
};

struct FeaturizedData {
    FeatureMatrix X;
    std::vector<int> labels;
};

// POIs projected into local coordinates plus their spatial index; shared
// read-only by all featurization workers.
struct PoiContext {
    std::vector<LocalPoint> points;
    std::vector<int> categories;  // parallel to points, indices into taxonomy
    SpatialIndex index;

    static PoiContext build(const std::vector<Poi>& pois, const Projection& proj);
};

inline constexpr int kDefaultKnnK = 20;
inline constexpr double kDefaultFeatureRadiusM = 200.0;

// Per-user stream context needed by the duration and frequency features.
struct UserStream {
    std::size_t total_checkins = 0;
    std::vector<std::int64_t> all_times;  // sorted, all venues of the user
};

// Visit durations are the time until the user's next check-in anywhere; a
// visit with no successor is skipped, and ln(24) stands in when every visit
// lacks one. Daytime bins: morning [0,12), afternoon [12,17), evening
// [17,22), night [22,24), computed in the visit's local time.
TemporalFeatures temporal_features(const UserLocationSample& sample,
                                   const UserStream& user);

// Category counts among the k nearest POIs plus their mean distance, and
// per-category count / min distance within r_f (min distance r_f when the
// category is absent inside the radius).
SpatialFeatures spatial_features(LocalPoint p, const PoiContext& pois,
                                 int n_categories, int k = kDefaultKnnK,
                                 double r_f = kDefaultFeatureRadiusM);

// Spatial features are computed on the (obfuscated) coordinates given in
// `points`; temporal features always come from the raw visit times.
FeaturizedData featurize(const Dataset& data,
                         const std::vector<LocalPoint>& points,
                         FeatureMode mode, const PoiContext* pois,
                         int k = kDefaultKnnK,
                         double r_f = kDefaultFeatureRadiusM);
FeaturizedData featurize_serial(const Dataset& data,
                                const std::vector<LocalPoint>& points,
                                FeatureMode mode, const PoiContext* pois,
                                int k = kDefaultKnnK,
                                double r_f = kDefaultFeatureRadiusM);

std::vector<std::string> feature_schema(FeatureMode mode,
                                        const std::vector<std::string>& categories);

void write_feature_csv(const std::filesystem::path& path,
                       const FeaturizedData& data,
                       const std::vector<std::string>& class_names);

}  // namespace locpriv
