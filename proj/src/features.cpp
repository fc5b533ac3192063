#include "locpriv/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

#include "locpriv/csv.hpp"
#include "locpriv/parallel.hpp"

namespace locpriv {

int FeatureMatrix::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return static_cast<int>(i);
    return -1;
}

PoiContext PoiContext::build(const std::vector<Poi>& pois, const Projection& proj) {
    if (pois.empty()) throw std::invalid_argument("empty POI set");
    PoiContext ctx;
    ctx.points.reserve(pois.size());
    ctx.categories.reserve(pois.size());
    std::vector<SpatialIndex::Entry> entries;
    entries.reserve(pois.size());
    for (std::size_t i = 0; i < pois.size(); ++i) {
        const LocalPoint p = proj.to_local(pois[i].geo);
        ctx.points.push_back(p);
        ctx.categories.push_back(pois[i].category);
        entries.push_back({static_cast<std::int64_t>(i), p});
    }
    ctx.index = SpatialIndex::build(std::move(entries));
    return ctx;
}

namespace {

// floor division/modulo for possibly-negative epochs
inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}
inline std::int64_t floor_mod(std::int64_t a, std::int64_t b) {
    return a - floor_div(a, b) * b;
}

}  // namespace

TemporalFeatures temporal_features(const UserLocationSample& sample,
                                   const UserStream& user) {
    if (sample.visit_times.empty())
        throw std::invalid_argument("sample has no visits");
    if (user.total_checkins < sample.visit_times.size())
        throw std::invalid_argument("user check-in total below the sample's visits");

    TemporalFeatures f;
    const double n = static_cast<double>(sample.visit_times.size());
    f.log_visit_count = std::log(n);
    f.rel_visit_frequency = n / static_cast<double>(user.total_checkins);

    double log_dur_sum = 0.0;
    int dur_count = 0;
    double weekend = 0, morning = 0, afternoon = 0, evening = 0, night = 0;
    double sin_sum = 0, cos_sum = 0;

    for (std::size_t i = 0; i < sample.visit_times.size(); ++i) {
        const std::int64_t t = sample.visit_times[i];

        auto next = std::upper_bound(user.all_times.begin(), user.all_times.end(), t);
        if (next != user.all_times.end()) {
            const double hours = static_cast<double>(*next - t) / 3600.0;
            log_dur_sum += std::log(hours);
            ++dur_count;
        }

        const std::int64_t local =
            t + static_cast<std::int64_t>(sample.tz_offsets_min[i]) * 60;
        const std::int64_t day = floor_div(local, 86400);
        const int weekday = static_cast<int>(floor_mod(day + 4, 7));  // 0 = Sunday
        if (weekday == 0 || weekday == 6) weekend += 1.0;

        const std::int64_t sec = floor_mod(local, 86400);
        const int hour = static_cast<int>(sec / 3600);
        const int minute = static_cast<int>((sec % 3600) / 60);
        if (hour < 12)
            morning += 1.0;
        else if (hour < 17)
            afternoon += 1.0;
        else if (hour < 22)
            evening += 1.0;
        else
            night += 1.0;

        const double angle = 2.0 * std::numbers::pi *
                             (static_cast<double>(hour) + minute / 60.0) / 24.0;
        sin_sum += std::sin(angle);
        cos_sum += std::cos(angle);
    }

    f.mean_log_duration_hours =
        dur_count > 0 ? log_dur_sum / dur_count : std::log(24.0);
    f.frac_weekend = weekend / n;
    f.frac_morning = morning / n;
    f.frac_afternoon = afternoon / n;
    f.frac_evening = evening / n;
    f.frac_night = night / n;
    f.mean_sin_hour = sin_sum / n;
    f.mean_cos_hour = cos_sum / n;
    return f;
}

SpatialFeatures spatial_features(LocalPoint p, const PoiContext& pois,
                                 int n_categories, int k, double r_f) {
    SpatialFeatures f;
    f.knn_category_counts.assign(n_categories, 0);
    f.radius_category_counts.assign(n_categories, 0);
    f.radius_min_distance.assign(n_categories, r_f);

    const auto nearest = pois.index.knn(p, k);
    double dist_sum = 0.0;
    for (const auto& nb : nearest) {
        f.knn_category_counts[pois.categories[nb.id]] += 1;
        dist_sum += nb.distance;
    }
    f.knn_mean_distance =
        nearest.empty() ? 0.0 : dist_sum / static_cast<double>(nearest.size());

    for (const auto& nb : pois.index.radius_query(p, r_f)) {
        const int cat = pois.categories[nb.id];
        f.radius_category_counts[cat] += 1;
        if (nb.distance < f.radius_min_distance[cat])
            f.radius_min_distance[cat] = nb.distance;
    }
    return f;
}

std::vector<std::string> feature_schema(FeatureMode mode,
                                        const std::vector<std::string>& categories) {
    std::vector<std::string> cols;
    if (mode != FeatureMode::spatial) {
        cols.insert(cols.end(),
                    {"log_visit_count", "rel_visit_frequency",
                     "mean_log_duration_hours", "frac_weekend", "frac_morning",
                     "frac_afternoon", "frac_evening", "frac_night",
                     "mean_sin_hour", "mean_cos_hour"});
    }
    if (mode != FeatureMode::temporal) {
        for (const auto& c : categories) cols.push_back("knn_count_" + c);
        cols.push_back("knn_mean_distance");
        for (const auto& c : categories) cols.push_back("radius_count_" + c);
        for (const auto& c : categories) cols.push_back("radius_min_dist_" + c);
    }
    return cols;
}

namespace {

std::map<std::string, UserStream> build_user_streams(const Dataset& data) {
    std::map<std::string, UserStream> streams;
    for (const auto& s : data.samples) {
        auto& u = streams[s.user_id];
        u.total_checkins += s.visit_times.size();
        u.all_times.insert(u.all_times.end(), s.visit_times.begin(),
                           s.visit_times.end());
    }
    for (auto& [id, u] : streams) std::sort(u.all_times.begin(), u.all_times.end());
    return streams;
}

FeaturizedData featurize_impl(const Dataset& data,
                              const std::vector<LocalPoint>& points,
                              FeatureMode mode, const PoiContext* pois, int k,
                              double r_f, bool parallel) {
    if (mode != FeatureMode::temporal && pois == nullptr)
        throw std::invalid_argument("spatial featurization requires a POI index");
    if (mode != FeatureMode::temporal && points.size() != data.samples.size())
        throw std::invalid_argument("coordinate list does not match samples");

    const int n_categories = data.taxonomy.count();
    FeaturizedData out;
    out.X.columns = feature_schema(mode, data.taxonomy.categories());
    out.X.n_rows = data.samples.size();
    out.X.n_cols = out.X.columns.size();
    out.X.values.assign(out.X.n_rows * out.X.n_cols, 0.0);
    out.labels.resize(data.samples.size());

    const auto streams = build_user_streams(data);
    // Resolve stream pointers and validate up front; a throw inside the
    // parallel loop would terminate instead of propagating.
    std::vector<const UserStream*> stream_of(data.samples.size());
    for (std::size_t i = 0; i < data.samples.size(); ++i) {
        if (data.samples[i].visit_times.empty())
            throw std::invalid_argument("sample has no visits");
        stream_of[i] = &streams.at(data.samples[i].user_id);
    }

    const std::int64_t n = static_cast<std::int64_t>(data.samples.size());
#pragma omp parallel for schedule(static) if (parallel)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto& sample = data.samples[i];
        double* row = out.X.values.data() + i * out.X.n_cols;
        std::size_t col = 0;
        if (mode != FeatureMode::spatial) {
            const TemporalFeatures t = temporal_features(sample, *stream_of[i]);
            row[col++] = t.log_visit_count;
            row[col++] = t.rel_visit_frequency;
            row[col++] = t.mean_log_duration_hours;
            row[col++] = t.frac_weekend;
            row[col++] = t.frac_morning;
            row[col++] = t.frac_afternoon;
            row[col++] = t.frac_evening;
            row[col++] = t.frac_night;
            row[col++] = t.mean_sin_hour;
            row[col++] = t.mean_cos_hour;
        }
        if (mode != FeatureMode::temporal) {
            const SpatialFeatures s =
                spatial_features(points[i], *pois, n_categories, k, r_f);
            for (int c = 0; c < n_categories; ++c)
                row[col++] = static_cast<double>(s.knn_category_counts[c]);
            row[col++] = s.knn_mean_distance;
            for (int c = 0; c < n_categories; ++c)
                row[col++] = static_cast<double>(s.radius_category_counts[c]);
            for (int c = 0; c < n_categories; ++c)
                row[col++] = s.radius_min_distance[c];
        }
        out.labels[i] = sample.true_category;
    }
    return out;
}

}  // namespace

FeaturizedData featurize(const Dataset& data, const std::vector<LocalPoint>& points,
                         FeatureMode mode, const PoiContext* pois, int k,
                         double r_f) {
    return featurize_impl(data, points, mode, pois, k, r_f, true);
}

FeaturizedData featurize_serial(const Dataset& data,
                                const std::vector<LocalPoint>& points,
                                FeatureMode mode, const PoiContext* pois, int k,
                                double r_f) {
    return featurize_impl(data, points, mode, pois, k, r_f, false);
}

void write_feature_csv(const std::filesystem::path& path,
                       const FeaturizedData& data,
                       const std::vector<std::string>& class_names) {
    TableWriter w(path);
    std::vector<std::string> header = data.X.columns;
    header.push_back("label");
    w.write_row(header);
    for (std::size_t r = 0; r < data.X.n_rows; ++r) {
        std::vector<std::string> row;
        row.reserve(data.X.n_cols + 1);
        for (std::size_t c = 0; c < data.X.n_cols; ++c)
            row.push_back(fmt_double(data.X.at(r, c)));
        row.push_back(class_names.at(data.labels[r]));
        w.write_row(row);
    }
}

}  // namespace locpriv
