#include "locpriv/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "locpriv/rng.hpp"

namespace locpriv {

void SynthSpec::validate() const {
    if (categories.empty() || categories.size() != shares.size())
        throw std::invalid_argument("categories and shares must align");
    double sum = 0.0;
    for (double s : shares) {
        if (s < 0.0) throw std::invalid_argument("negative category share");
        sum += s;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("category shares must sum to 1");
    if (peak_hour.size() != categories.size())
        throw std::invalid_argument("peak_hour must align with categories");
    if (region_km <= 0 || clusters_per_category < 1 || n_pois < 1 || n_users < 1)
        throw std::invalid_argument("all synth counts must be positive");
    if (min_locations_per_user < 1 ||
        max_locations_per_user < min_locations_per_user ||
        min_visits_per_location < 1 ||
        max_visits_per_location < min_visits_per_location)
        throw std::invalid_argument("bad per-user ranges");
}

SynthSpec SynthSpec::basic(int n_categories, std::uint64_t seed) {
    SynthSpec spec;
    spec.seed = seed;
    for (int c = 0; c < n_categories; ++c) {
        spec.categories.push_back("Cat" + std::string(1, static_cast<char>('A' + c)));
        spec.shares.push_back(1.0 / n_categories);
        spec.peak_hour.push_back(std::fmod(8.0 + 24.0 * c / n_categories, 24.0));
    }
    return spec;
}

SynthCity generate(const SynthSpec& spec) {
    spec.validate();
    SynthCity city;
    city.taxonomy = CategoryTaxonomy(spec.categories);
    const int n_cats = static_cast<int>(spec.categories.size());
    const double region_m = spec.region_km * 1000.0;
    const Projection proj(spec.anchor);

    // Cluster centers per category.
    Rng rng = substream(spec.seed, {0x5c17ULL});
    std::vector<std::vector<LocalPoint>> centers(n_cats);
    for (int c = 0; c < n_cats; ++c)
        for (int k = 0; k < spec.clusters_per_category; ++k)
            centers[c].push_back({rng.uniform(-region_m / 2, region_m / 2),
                                  rng.uniform(-region_m / 2, region_m / 2)});

    // POIs drawn by category share, position = cluster center + Gaussian.
    for (int i = 0; i < spec.n_pois; ++i) {
        const double u = rng.uniform();
        int cat = n_cats - 1;
        double acc = 0.0;
        for (int c = 0; c < n_cats; ++c) {
            acc += spec.shares[c];
            if (u < acc) {
                cat = c;
                break;
            }
        }
        const auto& center = centers[cat][rng.below(centers[cat].size())];
        LocalPoint p{center.x + spec.cluster_radius_m * rng.normal(),
                     center.y + spec.cluster_radius_m * rng.normal()};
        p.x = std::clamp(p.x, -region_m / 2, region_m / 2);
        p.y = std::clamp(p.y, -region_m / 2, region_m / 2);
        Poi poi;
        poi.poi_id = "p" + std::to_string(i);
        poi.geo = proj.to_geo(p);
        poi.category = cat;
        poi.subcategory = spec.categories[cat];
        city.pois.push_back(std::move(poi));
    }

    // Users pick distinct POIs and visit them at category-typical hours.
    // Check-ins happen exactly at the POI coordinates.
    const std::int64_t horizon_days = 300;
    const std::int64_t t0 = 1330000000;  // arbitrary fixed origin
    for (int u = 0; u < spec.n_users; ++u) {
        Rng user_rng = substream(spec.seed, {0x05e7ULL, static_cast<std::uint64_t>(u)});
        const int n_loc = spec.min_locations_per_user +
                          static_cast<int>(user_rng.below(
                              spec.max_locations_per_user -
                              spec.min_locations_per_user + 1));
        std::vector<std::size_t> chosen;
        for (int l = 0; l < n_loc; ++l) {
            std::size_t poi;
            do {
                poi = user_rng.below(city.pois.size());
            } while (std::find(chosen.begin(), chosen.end(), poi) != chosen.end());
            chosen.push_back(poi);
        }
        const std::string user_id = "u" + std::to_string(u);
        for (std::size_t poi_idx : chosen) {
            const Poi& poi = city.pois[poi_idx];
            const int n_visits = spec.min_visits_per_location +
                                 static_cast<int>(user_rng.below(
                                     spec.max_visits_per_location -
                                     spec.min_visits_per_location + 1));
            for (int v = 0; v < n_visits; ++v) {
                const std::int64_t day = user_rng.below(horizon_days);
                double hour;
                if (user_rng.uniform() < spec.temporal_signal) {
                    hour = spec.peak_hour[poi.category] + spec.hour_sd * user_rng.normal();
                    hour = std::fmod(std::fmod(hour, 24.0) + 24.0, 24.0);
                } else {
                    hour = user_rng.uniform(0.0, 24.0);
                }
                CheckIn c;
                c.user_id = user_id;
                c.venue_id = poi.poi_id;
                c.raw_category = spec.categories[poi.category];
                c.geo = poi.geo;
                c.utc_time = t0 + day * 86400 +
                             static_cast<std::int64_t>(hour * 3600.0);
                c.tz_offset_min = 0;
                c.category = poi.category;
                city.checkins.push_back(std::move(c));
            }
        }
    }

    std::stable_sort(city.checkins.begin(), city.checkins.end(),
                     [](const CheckIn& a, const CheckIn& b) {
                         if (a.user_id != b.user_id) return a.user_id < b.user_id;
                         return a.utc_time < b.utc_time;
                     });
    return city;
}

Dataset to_dataset(const SynthCity& city) {
    Dataset data;
    data.taxonomy = city.taxonomy;
    data.samples = group_to_samples(city.checkins);
    return data;
}

}  // namespace locpriv
