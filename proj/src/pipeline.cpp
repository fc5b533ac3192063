#include "locpriv/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "locpriv/baselines.hpp"
#include "locpriv/csv.hpp"

namespace locpriv {

using nlohmann::json;

namespace {

std::size_t count_users(const Dataset& data) {
    std::set<std::string> users;
    for (const auto& s : data.samples) users.insert(s.user_id);
    return users.size();
}

}  // namespace

IngestCounts run_ingest(const ExperimentConfig& config) {
    if (!config.ingest) throw std::invalid_argument("config has no ingest section");
    const auto& ing = *config.ingest;

    const CategoryTaxonomy taxonomy = CategoryTaxonomy::load(ing.category_mapping);
    ParseReport parsed = parse_checkins(ing.checkins_tsv);
    if (parsed.checkins.empty()) throw std::runtime_error("no check-ins parsed");

    IngestCounts counts;
    counts.checkins_parsed = parsed.checkins.size();
    counts.malformed_lines = parsed.malformed;

    MapResult mapped = map_categories(std::move(parsed.checkins), taxonomy);
    counts.dropped_labels = mapped.dropped;
    const std::size_t before_merge = mapped.checkins.size();
    MergeResult merged = merge_repeat_checkins(std::move(mapped.checkins));
    counts.removed_repeats = merged.removed;
    counts.removed_fraction =
        before_merge ? static_cast<double>(merged.removed) / before_merge : 0.0;

    Dataset data;
    data.taxonomy = taxonomy;
    data.samples = group_to_samples(merged.checkins);
    counts.samples = data.samples.size();
    counts.users = count_users(data);

    std::vector<Poi> pois;
    if (ing.poi_source == "foursquare") {
        pois = pois_from_checkins(merged.checkins);
    } else {
        const CategoryTaxonomy osm_tax = CategoryTaxonomy::load(ing.osm_mapping);
        pois = parse_osm_pois(ing.osm_pois_csv, osm_tax);
        // Re-key categories onto the check-in taxonomy by name.
        for (auto& p : pois) {
            const int id = taxonomy.index_of(osm_tax.name(p.category));
            if (id < 0)
                throw std::runtime_error("OSM category not in check-in taxonomy: " +
                                         osm_tax.name(p.category));
            p.category = id;
        }
    }
    counts.pois = pois.size();

    if (!config.samples_csv.empty()) {
        std::filesystem::create_directories(config.samples_csv.parent_path());
        write_samples_csv(config.samples_csv, data);
    }
    if (!config.pois_csv.empty()) {
        std::filesystem::create_directories(config.pois_csv.parent_path());
        write_pois_csv(config.pois_csv, pois, taxonomy);
    }
    return counts;
}

IngestCounts run_synth(const ExperimentConfig& config) {
    if (!config.synth) throw std::invalid_argument("config has no synth section");
    const SynthCity city = generate(*config.synth);
    const Dataset data = to_dataset(city);

    IngestCounts counts;
    counts.checkins_parsed = city.checkins.size();
    counts.samples = data.samples.size();
    counts.users = count_users(data);
    counts.pois = city.pois.size();

    if (config.samples_csv.empty() || config.pois_csv.empty())
        throw std::invalid_argument("synth requires dataset.samples_csv and dataset.pois_csv");
    std::filesystem::create_directories(config.samples_csv.parent_path());
    write_samples_csv(config.samples_csv, data);
    std::filesystem::create_directories(config.pois_csv.parent_path());
    write_pois_csv(config.pois_csv, city.pois, city.taxonomy);
    return counts;
}

namespace {

struct SweepPoint {
    ObfuscationPolicy policy;
    std::string tag;  // directory suffix, e.g. "fixed_r100" or "ctx_m16"
};

std::vector<SweepPoint> sweep_points(const ExperimentConfig& config) {
    std::vector<SweepPoint> points;
    for (double r : config.experiment.radii_m) {
        ObfuscationPolicy p;
        p.mode = ObfuscationPolicy::Mode::fixed;
        p.radius_m = r;
        p.seed = derive_seed(config.seed,
                             {0xf1ULL, static_cast<std::uint64_t>(r * 1000.0)});
        points.push_back({p, "fixed_r" + fmt_double(r)});
    }
    for (int m : config.experiment.context_aware_m) {
        ObfuscationPolicy p;
        p.mode = ObfuscationPolicy::Mode::context_aware;
        p.m = m;
        p.seed = derive_seed(config.seed, {0xc7ULL, static_cast<std::uint64_t>(m)});
        points.push_back({p, "ctx_m" + std::to_string(m)});
    }
    if (points.empty()) {
        ObfuscationPolicy p;  // Mode::none
        p.seed = derive_seed(config.seed, {0x00ULL});
        points.push_back({p, "none"});
    }
    return points;
}

void write_report_bundle(const std::filesystem::path& dir, const Dataset& data,
                         const EvaluationReport& report,
                         const DensityReport& density,
                         const std::vector<UserProfile>& soft_profiles,
                         const PrivacyLossReport& pl, double hard_error,
                         double soft_error) {
    std::filesystem::create_directories(dir);
    const auto& cats = data.taxonomy.categories();
    const int n_classes = static_cast<int>(cats.size());

    {
        json j;
        j["scenario"] = report.scenario;
        j["obfuscation"] = report.obfuscation;
        j["accuracy"] = report.accuracy;
        j["mean_r_used"] = report.mean_r_used;
        j["categories"] = cats;
        j["confusion"] = report.confusion;
        json sens = json::array();
        for (const auto& s : report.sensitivity)
            sens.push_back(s ? json(*s) : json(nullptr));
        j["sensitivity"] = std::move(sens);
        j["profiling_error_hard"] = hard_error;
        j["profiling_error_soft"] = soft_error;
        j["hit_at_1"] = pl.hit_at_1;
        j["hit_at_5"] = pl.hit_at_5;
        j["median_privacy_loss"] = pl.median;
        json bins = json::array();
        for (const auto& b : density.bins) {
            json bj{{"lo", b.lo},
                    {"n_samples", b.n_samples},
                    {"accuracy", b.accuracy},
                    {"mean_density", b.mean_density}};
            if (b.hi) bj["hi"] = *b.hi;
            bins.push_back(std::move(bj));
        }
        j["density_bins"] = std::move(bins);
        j["mean_density_correct"] = density.mean_density_correct;
        j["mean_density_incorrect"] = density.mean_density_incorrect;
        std::ofstream out(dir / "report.json");
        out << j.dump(2) << '\n';
    }

    {
        TableWriter w(dir / "confusion_raw.csv");
        std::vector<std::string> header = {"true_category"};
        header.insert(header.end(), cats.begin(), cats.end());
        w.write_row(header);
        for (int c = 0; c < n_classes; ++c) {
            std::vector<std::string> row = {cats[c]};
            for (int p = 0; p < n_classes; ++p)
                row.push_back(fmt_int(report.confusion[c][p]));
            w.write_row(row);
        }
    }
    {
        TableWriter w(dir / "confusion_norm.csv");
        std::vector<std::string> header = {"true_category"};
        header.insert(header.end(), cats.begin(), cats.end());
        w.write_row(header);
        for (int c = 0; c < n_classes; ++c) {
            std::int64_t support = 0;
            for (int p = 0; p < n_classes; ++p) support += report.confusion[c][p];
            std::vector<std::string> row = {cats[c]};
            for (int p = 0; p < n_classes; ++p)
                row.push_back(support ? fmt_double(static_cast<double>(
                                            report.confusion[c][p]) /
                                        support)
                                      : std::string());
            w.write_row(row);
        }
    }
    {
        TableWriter w(dir / "sensitivity.csv");
        w.write_row({"category", "sensitivity"});
        for (int c = 0; c < n_classes; ++c)
            w.write_row({cats[c], report.sensitivity[c]
                                      ? fmt_double(*report.sensitivity[c])
                                      : std::string()});
    }
    {
        TableWriter w(dir / "density_bins.csv");
        w.write_row({"bin_lo", "bin_hi", "n_samples", "accuracy", "mean_density"});
        for (const auto& b : density.bins)
            w.write_row({fmt_double(b.lo), b.hi ? fmt_double(*b.hi) : std::string(),
                         fmt_int(static_cast<std::int64_t>(b.n_samples)),
                         fmt_double(b.accuracy), fmt_double(b.mean_density)});
    }
    {
        TableWriter w(dir / "predictions.csv");
        std::vector<std::string> header = {"user_id", "location_id", "fold",
                                           "true_category", "predicted"};
        for (const auto& c : cats) header.push_back("proba_" + c);
        w.write_row(header);
        for (std::size_t i = 0; i < data.samples.size(); ++i) {
            const auto& s = data.samples[i];
            const auto& o = report.outcomes[i];
            std::vector<std::string> row = {
                s.user_id, s.location_id, fmt_int(report.fold_of[i]),
                cats[s.true_category], cats[o.predicted]};
            for (int c = 0; c < n_classes; ++c) row.push_back(fmt_double(o.proba[c]));
            w.write_row(row);
        }
    }
    {
        // Soft profiles plus the per-user privacy loss.
        TableWriter w(dir / "profiles.csv");
        std::vector<std::string> header = {"user_id"};
        for (const auto& c : cats) header.push_back("p_" + c);
        header.push_back("privacy_loss");
        w.write_row(header);
        for (std::size_t u = 0; u < soft_profiles.size(); ++u) {
            std::vector<std::string> row = {soft_profiles[u].user_id};
            for (double v : soft_profiles[u].p) row.push_back(fmt_double(v));
            row.push_back(fmt_double(pl.per_user[u]));
            w.write_row(row);
        }
    }
    {
        TableWriter w(dir / "pl_cdf.csv");
        w.write_row({"privacy_loss", "cumulative_fraction"});
        for (const auto& [v, f] : pl.cdf)
            w.write_row({fmt_double(v), fmt_double(f)});
    }
}

}  // namespace

void write_sweep_summary_csv(const std::filesystem::path& path,
                             const std::vector<SweepRow>& rows) {
    TableWriter w(path);
    w.write_row({"scenario", "mode", "radius_m", "m", "accuracy",
                 "profiling_error", "hit_at_5", "median_privacy_loss"});
    for (const auto& r : rows)
        w.write_row({r.scenario, r.mode, fmt_double(r.radius_m), fmt_int(r.m),
                     fmt_double(r.accuracy), fmt_double(r.profiling_error),
                     fmt_double(r.hit_at_5), fmt_double(r.median_privacy_loss)});
}

SweepOutcome run_sweep(const ExperimentConfig& config) {
    if (config.samples_csv.empty() || config.pois_csv.empty())
        throw std::invalid_argument("run requires dataset.samples_csv and dataset.pois_csv");
    if (config.output_dir.empty())
        throw std::invalid_argument("run requires output_dir");
    const auto& e = config.experiment;
    if (e.scenarios.empty()) throw std::invalid_argument("no scenarios configured");

    LoadedExperiment loaded = load_canonical(config.samples_csv, config.pois_csv);
    Dataset& data = loaded.data;
    std::vector<Poi>& pois = loaded.pois;
    if (e.poi_fraction < 1.0)
        pois = subsample_pois(pois, e.poi_fraction,
                              derive_seed(config.seed, {0x9019ULL}));

    // Anchor at the sample centroid; POIs share the projection.
    std::vector<GeoPoint> geos;
    geos.reserve(data.samples.size());
    for (const auto& s : data.samples) geos.push_back(s.geo);
    const Projection proj(centroid(geos));
    std::vector<LocalPoint> true_points;
    true_points.reserve(data.samples.size());
    for (const auto& s : data.samples) true_points.push_back(proj.to_local(s.geo));
    const PoiContext poi_ctx = PoiContext::build(pois, proj);

    SplitPlan plan;
    if (e.split == "user_cv")
        plan = make_user_folds(data.samples, e.cv_folds,
                               derive_seed(config.seed, {0xcfULL}));
    else
        plan = make_spatial_folds(data.samples, true_points);

    const ProfileWeighting weighting = e.profile_weighting == "visits"
                                           ? ProfileWeighting::visits
                                           : ProfileWeighting::locations;
    const auto truth = true_profiles(data, weighting);

    write_manifest(config.output_dir, config);

    SweepOutcome outcome;
    for (const auto& point : sweep_points(config)) {
        for (const auto& scenario_str : e.scenarios) {
            const Scenario scenario = scenario_from_name(scenario_str);
            const std::string tag = scenario_str + "__" + point.tag;
            try {
                RunScenarioInputs inputs{data,          true_points, &poi_ctx,
                                         e.knn_k,       e.feature_radius_m,
                                         e.model,       config.seed};
                EvaluationReport report = run_scenario(inputs, scenario,
                                                       point.policy, plan);
                report.obfuscation = point.tag;

                const auto hard = predicted_profiles(data, report.outcomes,
                                                     ProfileMode::hard, weighting);
                const auto soft = predicted_profiles(data, report.outcomes,
                                                     ProfileMode::soft, weighting);
                const double hard_error = mean_profiling_error(hard, truth);
                const double soft_error = mean_profiling_error(soft, truth);
                PrivacyLossReport pl = privacy_loss_report(soft, truth);
                if (scenario == Scenario::uninformed) {
                    // The uninformed attacker picks uniformly from the pool;
                    // its match probability is the ratio's own baseline, so
                    // PL = 1 per user by construction.
                    pl.per_user.assign(pl.per_user.size(), 1.0);
                    pl.median = 1.0;
                    for (auto& [value, fraction] : pl.cdf) value = 1.0;
                }
                const DensityReport density = density_stratified_accuracy(
                    report, true_points, poi_ctx, e.density_radius_m,
                    e.density_bin_edges);

                write_report_bundle(config.output_dir / tag, data, report, density,
                                    soft, pl, hard_error, soft_error);

                const bool is_gbdt = scenario == Scenario::gbdt_temporal ||
                                     scenario == Scenario::gbdt_spatial ||
                                     scenario == Scenario::gbdt_spatiotemporal;
                if ((e.dump_features || e.dump_models) && is_gbdt) {
                    // Re-deriving the obfuscated coordinates is exact: they
                    // are a pure function of (policy, seed).
                    const auto obf =
                        obfuscate_samples(true_points, point.policy, &poi_ctx.index);
                    const auto feat = featurize(data, obf.points,
                                                scenario_feature_mode(scenario),
                                                &poi_ctx, e.knn_k,
                                                e.feature_radius_m);
                    if (e.dump_features)
                        write_feature_csv(config.output_dir / tag / "features.csv",
                                          feat, data.taxonomy.categories());
                    if (e.dump_models) {
                        const auto model = GbdtModel::train(
                            feat.X, feat.labels, data.taxonomy.count(), e.model,
                            data.taxonomy.categories());
                        model.save(config.output_dir / tag / "model.json");
                    }
                }

                SweepRow row;
                row.scenario = scenario_str;
                switch (point.policy.mode) {
                    case ObfuscationPolicy::Mode::fixed:
                        row.mode = "fixed";
                        row.radius_m = point.policy.radius_m;
                        break;
                    case ObfuscationPolicy::Mode::context_aware:
                        row.mode = "context_aware";
                        row.radius_m = report.mean_r_used;
                        row.m = point.policy.m;
                        break;
                    case ObfuscationPolicy::Mode::none:
                        row.mode = "none";
                        break;
                }
                row.accuracy = report.accuracy;
                row.profiling_error = soft_error;
                row.hit_at_5 = pl.hit_at_5;
                row.median_privacy_loss = pl.median;
                outcome.rows.push_back(std::move(row));
            } catch (const std::exception& ex) {
                outcome.failures.push_back({tag, ex.what()});
            }
        }
    }

    write_sweep_summary_csv(config.output_dir / "sweep_summary.csv", outcome.rows);
    if (!outcome.failures.empty()) {
        std::ofstream out(config.output_dir / "failures.txt");
        for (const auto& f : outcome.failures)
            out << f.point << ": " << f.message << '\n';
    }
    return outcome;
}

VariogramResult run_variogram(const ExperimentConfig& config) {
    if (config.pois_csv.empty())
        throw std::invalid_argument("variogram requires dataset.pois_csv");
    // The taxonomy is derived from the POI file itself here: read the raw
    // table once to collect names.
    Table raw = read_table(config.pois_csv, ',', true);
    const int cat_col = raw.column("category");
    if (cat_col < 0) throw std::runtime_error("POI CSV lacks a category column");
    std::vector<std::string> names;
    for (const auto& row : raw.rows) names.push_back(row.at(cat_col));
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    const CategoryTaxonomy taxonomy{names};
    const auto pois = read_pois_csv(config.pois_csv, taxonomy);

    std::vector<GeoPoint> geos;
    geos.reserve(pois.size());
    for (const auto& p : pois) geos.push_back(p.geo);
    const Projection proj(centroid(geos));
    std::vector<LocalPoint> pts;
    std::vector<int> cats;
    pts.reserve(pois.size());
    for (const auto& p : pois) {
        pts.push_back(proj.to_local(p.geo));
        cats.push_back(p.category);
    }

    const auto edges = config.variogram.bin_edges_m.empty()
                           ? default_variogram_edges()
                           : config.variogram.bin_edges_m;
    VariogramResult result = semivariogram(
        pts, cats, config.variogram.subregion_km * 1000.0,
        config.variogram.n_pairs, edges, derive_seed(config.seed, {0x9aULL}));
    if (!config.output_dir.empty()) {
        std::filesystem::create_directories(config.output_dir);
        write_variogram_csv(config.output_dir / "variogram.csv", result);
    }
    return result;
}

DecayFit fit_from_summary(const std::filesystem::path& summary_csv,
                          const std::string& scenario, const std::string& x_col,
                          const std::string& y_col) {
    Table t = read_table(summary_csv, ',', true);
    const int xc = t.column(x_col);
    const int yc = t.column(y_col);
    const int sc = t.column("scenario");
    const int mc = t.column("mode");
    if (xc < 0 || yc < 0)
        throw std::invalid_argument("summary lacks columns " + x_col + "/" + y_col);
    std::vector<double> xs, ys;
    for (const auto& row : t.rows) {
        if (!scenario.empty() && sc >= 0 && row.at(sc) != scenario) continue;
        // The decay curve is over the fixed-radius sweep; context-aware
        // points have a data-dependent radius and are excluded.
        if (mc >= 0 && row.at(mc) == "context_aware") continue;
        xs.push_back(std::stod(row.at(xc)));
        ys.push_back(std::stod(row.at(yc)));
    }
    return fit_decay(xs, ys);
}

void write_decay_fit_json(const std::filesystem::path& path, const DecayFit& fit) {
    json j{{"a", fit.a}, {"c", fit.c}, {"lambda", fit.lambda}, {"rss", fit.rss}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

std::vector<SweepRow> aggregate_summaries(
    const std::vector<std::filesystem::path>& run_dirs) {
    struct Acc {
        SweepRow sum;
        std::size_t n = 0;
    };
    std::map<std::string, Acc> by_key;
    std::vector<std::string> key_order;
    for (const auto& dir : run_dirs) {
        Table t = read_table(dir / "sweep_summary.csv", ',', true);
        const int si = t.column("scenario"), mi = t.column("mode"),
                  ri = t.column("radius_m"), mm = t.column("m"),
                  ai = t.column("accuracy"), pi = t.column("profiling_error"),
                  hi = t.column("hit_at_5"), li = t.column("median_privacy_loss");
        if (si < 0 || mi < 0 || ri < 0 || ai < 0)
            throw std::runtime_error("unexpected summary header in " + dir.string());
        for (const auto& row : t.rows) {
            const std::string key =
                row.at(si) + "|" + row.at(mi) + "|" + row.at(mm) + "|" +
                (row.at(mi) == "context_aware" ? std::string("ctx") : row.at(ri));
            auto [it, inserted] = by_key.try_emplace(key);
            if (inserted) key_order.push_back(key);
            Acc& acc = it->second;
            if (acc.n == 0) {
                acc.sum.scenario = row.at(si);
                acc.sum.mode = row.at(mi);
                acc.sum.m = std::stoi(row.at(mm));
            }
            acc.sum.radius_m += std::stod(row.at(ri));
            acc.sum.accuracy += std::stod(row.at(ai));
            acc.sum.profiling_error += std::stod(row.at(pi));
            acc.sum.hit_at_5 += std::stod(row.at(hi));
            acc.sum.median_privacy_loss += std::stod(row.at(li));
            acc.n += 1;
        }
    }
    std::vector<SweepRow> rows;
    for (const auto& key : key_order) {
        const Acc& acc = by_key.at(key);
        SweepRow r = acc.sum;
        const double n = static_cast<double>(acc.n);
        r.radius_m /= n;
        r.accuracy /= n;
        r.profiling_error /= n;
        r.hit_at_5 /= n;
        r.median_privacy_loss /= n;
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string format_summary_table(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-22s %-14s %9s %4s %9s %10s %8s %10s\n",
                  "scenario", "mode", "radius_m", "m", "accuracy", "prof_err",
                  "hit@5", "median_PL");
    out << buf;
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf),
                      "%-22s %-14s %9.1f %4d %9.4f %10.4f %8.4f %10.3f\n",
                      r.scenario.c_str(), r.mode.c_str(), r.radius_m, r.m,
                      r.accuracy, r.profiling_error, r.hit_at_5,
                      r.median_privacy_loss);
        out << buf;
    }
    return out.str();
}

}  // namespace locpriv
