#include "locpriv/ingest.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "locpriv/csv.hpp"
#include "locpriv/rng.hpp"

namespace locpriv {

namespace {

// Days since 1970-01-01 for a civil date (Howard Hinnant's algorithm).
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return static_cast<std::int64_t>(era) * 146097 +
           static_cast<std::int64_t>(doe) - 719468;
}

int month_index(const std::string& mon) {
    static const char* names[] = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                  "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
    for (int i = 0; i < 12; ++i)
        if (mon == names[i]) return i + 1;
    return -1;
}

bool parse_double(const std::string& s, double& out) {
    try {
        std::size_t pos = 0;
        out = std::stod(s, &pos);
        return pos == s.size();
    } catch (...) {
        return false;
    }
}

bool parse_int(const std::string& s, int& out) {
    try {
        std::size_t pos = 0;
        out = std::stoi(s, &pos);
        return pos == s.size();
    } catch (...) {
        return false;
    }
}

}  // namespace

std::int64_t parse_foursquare_time(const std::string& text) {
    // Tue Apr 03 18:00:09 +0000 2012
    std::istringstream in(text);
    std::string dow, mon, clock, zone;
    int day = 0, year = 0;
    if (!(in >> dow >> mon >> day >> clock >> zone >> year))
        throw std::runtime_error("malformed timestamp: " + text);
    const int m = month_index(mon);
    int hh, mm, ss;
    if (m < 0 || day < 1 || day > 31 ||
        std::sscanf(clock.c_str(), "%d:%d:%d", &hh, &mm, &ss) != 3 ||
        hh < 0 || hh > 23 || mm < 0 || mm > 59 || ss < 0 || ss > 60 ||
        zone.size() != 5 || (zone[0] != '+' && zone[0] != '-'))
        throw std::runtime_error("malformed timestamp: " + text);
    int zh, zm;
    if (std::sscanf(zone.c_str() + 1, "%2d%2d", &zh, &zm) != 2)
        throw std::runtime_error("malformed timestamp: " + text);
    const int zone_min = (zone[0] == '-' ? -1 : 1) * (zh * 60 + zm);
    const std::int64_t civil =
        days_from_civil(year, m, day) * 86400 + hh * 3600 + mm * 60 + ss;
    return civil - static_cast<std::int64_t>(zone_min) * 60;
}

CategoryTaxonomy::CategoryTaxonomy(std::vector<std::string> categories)
    : categories_(std::move(categories)) {
    for (std::size_t i = 0; i < categories_.size(); ++i)
        by_name_[categories_[i]] = static_cast<int>(i);
}

CategoryTaxonomy CategoryTaxonomy::load(const std::filesystem::path& mapping_file) {
    std::ifstream in(mapping_file);
    if (!in)
        throw std::runtime_error("cannot open mapping file " + mapping_file.string());
    std::vector<std::pair<std::string, std::string>> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto fields = split(line, '\t');
        if (fields.size() != 2 || fields[0].empty() || fields[1].empty())
            throw std::runtime_error("bad mapping record at " +
                                     mapping_file.string() + ":" +
                                     std::to_string(lineno));
        records.emplace_back(fields[0], fields[1]);
    }

    std::vector<std::string> names;
    for (const auto& [raw, target] : records)
        if (target != "DROP") names.push_back(target);
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());

    CategoryTaxonomy tax(names);
    for (const auto& [raw, target] : records) {
        if (target == "DROP")
            tax.drop_.insert(raw);
        else
            tax.raw_to_category_[raw] = tax.by_name_.at(target);
    }
    return tax;
}

int CategoryTaxonomy::index_of(const std::string& category_name) const {
    auto it = by_name_.find(category_name);
    return it == by_name_.end() ? -1 : it->second;
}

int CategoryTaxonomy::map_raw_label(const std::string& raw_label) const {
    if (auto it = raw_to_category_.find(raw_label); it != raw_to_category_.end())
        return it->second;
    if (drop_.count(raw_label)) return -1;
    throw std::runtime_error("raw label neither mapped nor dropped: \"" +
                             raw_label + "\"");
}

bool CategoryTaxonomy::is_dropped(const std::string& raw_label) const {
    return drop_.count(raw_label) > 0;
}

ParseReport parse_checkins(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open check-in file " + path.string());
    ParseReport report;
    std::string line;
    std::size_t lineno = 0;
    std::size_t total = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++total;
        auto f = split(line, '\t');
        CheckIn c;
        bool ok = f.size() == 8;
        if (ok) {
            c.user_id = f[0];
            c.venue_id = f[1];
            c.raw_category = f[3];
            ok = !c.user_id.empty() && !c.venue_id.empty() &&
                 parse_double(f[4], c.geo.lat) && parse_double(f[5], c.geo.lon) &&
                 parse_int(f[6], c.tz_offset_min) && c.geo.lat >= -90.0 &&
                 c.geo.lat <= 90.0 && c.geo.lon >= -180.0 && c.geo.lon <= 180.0 &&
                 c.tz_offset_min >= -720 && c.tz_offset_min <= 840;
        }
        if (ok) {
            try {
                c.utc_time = parse_foursquare_time(f[7]);
            } catch (const std::exception&) {
                ok = false;
            }
        }
        if (ok) {
            report.checkins.push_back(std::move(c));
        } else {
            ++report.malformed;
            report.malformed_lines.push_back(lineno);
        }
    }
    if (total > 0 &&
        static_cast<double>(report.malformed) > 0.01 * static_cast<double>(total)) {
        std::string lines;
        const std::size_t show = std::min<std::size_t>(report.malformed_lines.size(), 20);
        for (std::size_t i = 0; i < show; ++i) {
            if (i) lines += ", ";
            lines += std::to_string(report.malformed_lines[i]);
        }
        if (report.malformed_lines.size() > show) lines += ", ...";
        throw std::runtime_error(
            "more than 1% malformed lines in " + path.string() + " (" +
            std::to_string(report.malformed) + "/" + std::to_string(total) +
            "), line numbers: " + lines);
    }
    return report;
}

MapResult map_categories(std::vector<CheckIn> checkins,
                         const CategoryTaxonomy& taxonomy) {
    MapResult result;
    result.checkins.reserve(checkins.size());
    for (auto& c : checkins) {
        const int cat = taxonomy.map_raw_label(c.raw_category);
        if (cat < 0) {
            ++result.dropped;
            continue;
        }
        c.category = cat;
        result.checkins.push_back(std::move(c));
    }
    return result;
}

MergeResult merge_repeat_checkins(std::vector<CheckIn> checkins) {
    // Stable sort by (user, venue, time) so equal timestamps keep file order.
    std::stable_sort(checkins.begin(), checkins.end(),
                     [](const CheckIn& a, const CheckIn& b) {
                         if (a.user_id != b.user_id) return a.user_id < b.user_id;
                         if (a.venue_id != b.venue_id) return a.venue_id < b.venue_id;
                         return a.utc_time < b.utc_time;
                     });
    MergeResult result;
    result.checkins.reserve(checkins.size());
    for (auto& c : checkins) {
        // The anchor is the last *retained* check-in: a removed one does not
        // extend the suppression window.
        const CheckIn* anchor =
            result.checkins.empty() ? nullptr : &result.checkins.back();
        const bool same_venue = anchor && anchor->user_id == c.user_id &&
                                anchor->venue_id == c.venue_id;
        if (same_venue && c.utc_time - anchor->utc_time <= 3600) {
            ++result.removed;
            continue;
        }
        result.checkins.push_back(std::move(c));
    }
    return result;
}

std::vector<UserLocationSample> group_to_samples(
    const std::vector<CheckIn>& checkins) {
    std::map<std::pair<std::string, std::string>, UserLocationSample> groups;
    for (const auto& c : checkins) {
        auto& s = groups[{c.user_id, c.venue_id}];
        if (s.visit_times.empty()) {
            s.user_id = c.user_id;
            s.location_id = c.venue_id;
            s.geo = c.geo;
            s.true_category = c.category;
        }
        s.visit_times.push_back(c.utc_time);
        s.tz_offsets_min.push_back(c.tz_offset_min);
    }
    std::vector<UserLocationSample> samples;
    samples.reserve(groups.size());
    for (auto& [key, s] : groups) {
        // Sort visits by time, offsets staying attached.
        std::vector<std::size_t> order(s.visit_times.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return s.visit_times[a] < s.visit_times[b];
        });
        std::vector<std::int64_t> t(order.size());
        std::vector<int> z(order.size());
        for (std::size_t i = 0; i < order.size(); ++i) {
            t[i] = s.visit_times[order[i]];
            z[i] = s.tz_offsets_min[order[i]];
        }
        s.visit_times = std::move(t);
        s.tz_offsets_min = std::move(z);
        samples.push_back(std::move(s));
    }
    return samples;  // std::map iteration => sorted by (user_id, location_id)
}

std::vector<Poi> pois_from_checkins(const std::vector<CheckIn>& checkins) {
    std::map<std::string, Poi> venues;
    for (const auto& c : checkins) {
        auto it = venues.find(c.venue_id);
        if (it == venues.end())
            venues[c.venue_id] = Poi{c.venue_id, c.geo, c.category, c.raw_category};
    }
    std::vector<Poi> pois;
    pois.reserve(venues.size());
    for (auto& [id, p] : venues) pois.push_back(std::move(p));
    return pois;
}

std::vector<Poi> parse_osm_pois(const std::filesystem::path& path,
                                const CategoryTaxonomy& taxonomy) {
    Table t = read_table(path, ',', true);
    const int c_id = t.column("poi_id");
    const int c_lat = t.column("lat");
    const int c_lon = t.column("lon");
    const int c_label = t.column("source_label");
    if (c_id < 0 || c_lat < 0 || c_lon < 0 || c_label < 0)
        throw std::runtime_error(
            "POI CSV must have header poi_id,lat,lon,source_label: " +
            path.string());
    std::vector<Poi> pois;
    for (const auto& row : t.rows) {
        Poi p;
        p.poi_id = row.at(c_id);
        if (!parse_double(row.at(c_lat), p.geo.lat) ||
            !parse_double(row.at(c_lon), p.geo.lon))
            throw std::runtime_error("bad coordinates in POI CSV for id " + p.poi_id);
        p.subcategory = row.at(c_label);
        const int cat = taxonomy.map_raw_label(p.subcategory);
        if (cat < 0) continue;  // dropped label, e.g. parking space
        p.category = cat;
        pois.push_back(std::move(p));
    }
    return pois;
}

std::vector<Poi> subsample_pois(const std::vector<Poi>& pois, double fraction,
                                std::uint64_t seed) {
    if (!(fraction > 0.0) || fraction > 1.0)
        throw std::invalid_argument("poi fraction must be in (0, 1]");
    if (fraction == 1.0) return pois;
    const std::size_t keep =
        static_cast<std::size_t>(fraction * static_cast<double>(pois.size()));
    std::vector<std::size_t> order(pois.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng = substream(seed, {0x70695ULL});  // "poi"
    // Fisher-Yates prefix: the first `keep` entries are a uniform sample.
    for (std::size_t i = 0; i < keep && i + 1 < order.size(); ++i) {
        const std::size_t j = i + rng.below(order.size() - i);
        std::swap(order[i], order[j]);
    }
    std::vector<std::size_t> chosen(order.begin(), order.begin() + keep);
    std::sort(chosen.begin(), chosen.end());
    std::vector<Poi> out;
    out.reserve(keep);
    for (std::size_t i : chosen) out.push_back(pois[i]);
    return out;
}

void write_samples_csv(const std::filesystem::path& path, const Dataset& data) {
    TableWriter w(path);
    w.write_row({"user_id", "location_id", "lat", "lon", "category",
                 "visit_times", "tz_offsets"});
    for (const auto& s : data.samples) {
        w.write_row({s.user_id, s.location_id, fmt_double(s.geo.lat),
                     fmt_double(s.geo.lon), data.taxonomy.name(s.true_category),
                     join_int64(s.visit_times, ';'),
                     join_int(s.tz_offsets_min, ';')});
    }
}

namespace {

Table read_samples_table(const std::filesystem::path& path) {
    Table t = read_table(path, ',', true);
    const std::vector<std::string> expect = {"user_id",  "location_id", "lat",
                                             "lon",      "category",
                                             "visit_times", "tz_offsets"};
    if (t.header != expect)
        throw std::runtime_error("unexpected samples CSV header in " + path.string());
    return t;
}

std::vector<std::string> category_names(const Table& t, int column) {
    std::vector<std::string> names;
    for (const auto& row : t.rows) names.push_back(row.at(column));
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    return names;
}

Dataset samples_from_table(const Table& t, const CategoryTaxonomy& taxonomy) {
    Dataset data;
    data.taxonomy = taxonomy;
    for (const auto& row : t.rows) {
        UserLocationSample s;
        s.user_id = row.at(0);
        s.location_id = row.at(1);
        s.geo.lat = std::stod(row.at(2));
        s.geo.lon = std::stod(row.at(3));
        s.true_category = taxonomy.index_of(row.at(4));
        if (s.true_category < 0)
            throw std::runtime_error("sample category not in taxonomy: " + row.at(4));
        s.visit_times = parse_int64_list(row.at(5), ';');
        s.tz_offsets_min = parse_int_list(row.at(6), ';');
        if (s.visit_times.empty() || s.visit_times.size() != s.tz_offsets_min.size())
            throw std::runtime_error("bad visit list for sample " + s.user_id +
                                     "/" + s.location_id);
        data.samples.push_back(std::move(s));
    }
    std::sort(data.samples.begin(), data.samples.end(),
              [](const UserLocationSample& a, const UserLocationSample& b) {
                  if (a.user_id != b.user_id) return a.user_id < b.user_id;
                  return a.location_id < b.location_id;
              });
    return data;
}

}  // namespace

Dataset read_samples_csv(const std::filesystem::path& path) {
    const Table t = read_samples_table(path);
    return samples_from_table(t, CategoryTaxonomy(category_names(t, 4)));
}

Dataset read_samples_csv(const std::filesystem::path& path,
                         const CategoryTaxonomy& taxonomy) {
    return samples_from_table(read_samples_table(path), taxonomy);
}

LoadedExperiment load_canonical(const std::filesystem::path& samples_csv,
                                const std::filesystem::path& pois_csv) {
    const Table samples = read_samples_table(samples_csv);
    const Table pois = read_table(pois_csv, ',', true);
    const int poi_cat = pois.column("category");
    if (poi_cat < 0)
        throw std::runtime_error("POI CSV lacks a category column: " +
                                 pois_csv.string());
    auto names = category_names(samples, 4);
    for (const auto& n : category_names(pois, poi_cat)) names.push_back(n);
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    const CategoryTaxonomy taxonomy(names);
    LoadedExperiment loaded;
    loaded.data = samples_from_table(samples, taxonomy);
    loaded.pois = read_pois_csv(pois_csv, taxonomy);
    return loaded;
}

void write_pois_csv(const std::filesystem::path& path,
                    const std::vector<Poi>& pois,
                    const CategoryTaxonomy& taxonomy) {
    TableWriter w(path);
    w.write_row({"poi_id", "lat", "lon", "category"});
    for (const auto& p : pois)
        w.write_row({p.poi_id, fmt_double(p.geo.lat), fmt_double(p.geo.lon),
                     taxonomy.name(p.category)});
}

std::vector<Poi> read_pois_csv(const std::filesystem::path& path,
                               const CategoryTaxonomy& taxonomy) {
    Table t = read_table(path, ',', true);
    const std::vector<std::string> expect = {"poi_id", "lat", "lon", "category"};
    if (t.header != expect)
        throw std::runtime_error("unexpected POI CSV header in " + path.string());
    std::vector<Poi> pois;
    for (const auto& row : t.rows) {
        Poi p;
        p.poi_id = row.at(0);
        p.geo.lat = std::stod(row.at(1));
        p.geo.lon = std::stod(row.at(2));
        p.category = taxonomy.index_of(row.at(3));
        if (p.category < 0)
            throw std::runtime_error("POI category not in taxonomy: " + row.at(3));
        pois.push_back(std::move(p));
    }
    return pois;
}

}  // namespace locpriv
