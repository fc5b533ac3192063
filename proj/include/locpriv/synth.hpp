#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "locpriv/geo.hpp"
#include "locpriv/ingest.hpp"

namespace locpriv {

// Synthetic city with known ground truth: POIs placed in per-category
// Gaussian clusters, users checking in at POI coordinates with
// category-specific time-of-day preferences.
struct SynthSpec {
    double region_km = 10.0;
    std::vector<std::string> categories;
    std::vector<double> shares;          // per category, sums to 1
    int clusters_per_category = 5;
    double cluster_radius_m = 100.0;
    int n_pois = 2000;
    int n_users = 200;
    int min_locations_per_user = 4;
    int max_locations_per_user = 12;
    int min_visits_per_location = 1;
    int max_visits_per_location = 5;
    // Peak check-in hour per category; spacing across categories is what
    // gives temporal features their signal.
    std::vector<double> peak_hour;
    double hour_sd = 1.5;
    double temporal_signal = 1.0;  // probability of drawing from the peak
    GeoPoint anchor{40.0, -74.0};
    std::uint64_t seed = 1;

    void validate() const;

    static SynthSpec basic(int n_categories, std::uint64_t seed);
};

struct SynthCity {
    CategoryTaxonomy taxonomy;
    std::vector<Poi> pois;
    std::vector<CheckIn> checkins;  // sorted by (user, time)
};

SynthCity generate(const SynthSpec& spec);

// group_to_samples over the generated check-ins (the canonical pipeline
// input form).
Dataset to_dataset(const SynthCity& city);

}  // namespace locpriv
