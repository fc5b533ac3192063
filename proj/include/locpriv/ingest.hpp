#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "locpriv/geo.hpp"

namespace locpriv {

// One timestamped visit of a user to a venue. `category` is filled in by
// map_categories (-1 until then).
struct CheckIn {
    std::string user_id;
    std::string venue_id;
    std::string raw_category;
    GeoPoint geo;
    std::int64_t utc_time = 0;  // epoch seconds
    int tz_offset_min = 0;
    int category = -1;
};

struct Poi {
    std::string poi_id;
    GeoPoint geo;
    int category = -1;
    std::string subcategory;
};

// Level-1 category set plus the raw-label mapping and drop-list. Category
// order is the sorted order of the mapped target names, so it is stable
// across runs regardless of mapping-file line order.
class CategoryTaxonomy {
public:
    CategoryTaxonomy() = default;
    explicit CategoryTaxonomy(std::vector<std::string> categories);

    // Mapping file format: one record per line, `raw_label<TAB>target`,
    // where target is a category name or the literal DROP. '#' starts a
    // comment line.
    static CategoryTaxonomy load(const std::filesystem::path& mapping_file);

    const std::vector<std::string>& categories() const { return categories_; }
    int count() const { return static_cast<int>(categories_.size()); }
    const std::string& name(int id) const { return categories_.at(id); }
    int index_of(const std::string& category_name) const;  // -1 when absent

    // -1 => on the drop-list; throws std::runtime_error naming the label
    // when it is neither mapped nor dropped.
    int map_raw_label(const std::string& raw_label) const;
    bool is_dropped(const std::string& raw_label) const;

private:
    std::vector<std::string> categories_;
    std::unordered_map<std::string, int> by_name_;
    std::unordered_map<std::string, int> raw_to_category_;
    std::unordered_set<std::string> drop_;
};

// The classification unit: one (user, venue) pair with its visit times.
struct UserLocationSample {
    std::string user_id;
    std::string location_id;
    GeoPoint geo;
    std::vector<std::int64_t> visit_times;  // ascending UTC epoch seconds
    std::vector<int> tz_offsets_min;        // parallel to visit_times
    int true_category = -1;
};

struct Dataset {
    CategoryTaxonomy taxonomy;
    std::vector<UserLocationSample> samples;  // sorted by (user_id, location_id)
};

// "Tue Apr 03 18:00:09 +0000 2012" -> epoch seconds. Throws on malformed
// input.
std::int64_t parse_foursquare_time(const std::string& text);

struct ParseReport {
    std::vector<CheckIn> checkins;
    std::size_t malformed = 0;
    std::vector<std::size_t> malformed_lines;  // 1-based line numbers
};

// Tab-separated, 8 fields, no header:
// user_id venue_id category_id category_name lat lon tz_offset_min time.
// Malformed lines are counted and skipped; more than 1% malformed is a hard
// error listing the offending line numbers.
ParseReport parse_checkins(const std::filesystem::path& path);

struct MapResult {
    std::vector<CheckIn> checkins;
    std::size_t dropped = 0;
};
MapResult map_categories(std::vector<CheckIn> checkins,
                         const CategoryTaxonomy& taxonomy);

struct MergeResult {
    std::vector<CheckIn> checkins;
    std::size_t removed = 0;
};
// Removes any check-in within one hour (inclusive) after the previous
// *retained* check-in of the same user at the same venue.
MergeResult merge_repeat_checkins(std::vector<CheckIn> checkins);

std::vector<UserLocationSample> group_to_samples(
    const std::vector<CheckIn>& checkins);

// Foursquare mode: the POI set is the distinct venues of the check-in data.
std::vector<Poi> pois_from_checkins(const std::vector<CheckIn>& checkins);

// OSM mode: CSV with header poi_id,lat,lon,source_label; every source label
// must be mapped or dropped by the taxonomy.
std::vector<Poi> parse_osm_pois(const std::filesystem::path& path,
                                const CategoryTaxonomy& taxonomy);

std::vector<Poi> subsample_pois(const std::vector<Poi>& pois, double fraction,
                                std::uint64_t seed);

// Canonical dataset schemas shared by ingest, synth and the experiment
// pipeline.
void write_samples_csv(const std::filesystem::path& path, const Dataset& data);
Dataset read_samples_csv(const std::filesystem::path& path);
Dataset read_samples_csv(const std::filesystem::path& path,
                         const CategoryTaxonomy& taxonomy);
void write_pois_csv(const std::filesystem::path& path,
                    const std::vector<Poi>& pois,
                    const CategoryTaxonomy& taxonomy);
std::vector<Poi> read_pois_csv(const std::filesystem::path& path,
                               const CategoryTaxonomy& taxonomy);

struct LoadedExperiment {
    Dataset data;
    std::vector<Poi> pois;
};

// Loads both canonical files under one taxonomy: the sorted union of the
// category names appearing in either file, so a category present only among
// the POIs still gets a feature column.
LoadedExperiment load_canonical(const std::filesystem::path& samples_csv,
                                const std::filesystem::path& pois_csv);

}  // namespace locpriv
