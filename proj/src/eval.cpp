#include "locpriv/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "locpriv/baselines.hpp"
#include "locpriv/rng.hpp"

namespace locpriv {

std::string scenario_name(Scenario s) {
    switch (s) {
        case Scenario::uninformed: return "uninformed";
        case Scenario::spatial_join: return "spatial_join";
        case Scenario::gbdt_temporal: return "gbdt_temporal";
        case Scenario::gbdt_spatial: return "gbdt_spatial";
        case Scenario::gbdt_spatiotemporal: return "gbdt_spatiotemporal";
    }
    throw std::logic_error("unknown scenario");
}

Scenario scenario_from_name(const std::string& name) {
    if (name == "uninformed") return Scenario::uninformed;
    if (name == "spatial_join") return Scenario::spatial_join;
    if (name == "gbdt_temporal") return Scenario::gbdt_temporal;
    if (name == "gbdt_spatial") return Scenario::gbdt_spatial;
    if (name == "gbdt_spatiotemporal") return Scenario::gbdt_spatiotemporal;
    throw std::invalid_argument("unknown scenario: " + name);
}

FeatureMode scenario_feature_mode(Scenario s) {
    switch (s) {
        case Scenario::gbdt_temporal: return FeatureMode::temporal;
        case Scenario::gbdt_spatial: return FeatureMode::spatial;
        default: return FeatureMode::spatiotemporal;
    }
}

namespace {

// Seeded Fisher-Yates; std::shuffle is implementation-defined.
template <typename T>
void deterministic_shuffle(std::vector<T>& items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::size_t j = rng.below(i);
        std::swap(items[i - 1], items[j]);
    }
}

double size_ratio(const std::vector<int>& fold_of, int n_folds) {
    std::vector<std::size_t> sizes(n_folds, 0);
    for (int f : fold_of) sizes[f] += 1;
    const auto [mn, mx] = std::minmax_element(sizes.begin(), sizes.end());
    return *mn == 0 ? 0.0 : static_cast<double>(*mx) / static_cast<double>(*mn);
}

}  // namespace

SplitPlan make_user_folds(const std::vector<UserLocationSample>& samples, int k,
                          std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("user CV needs k >= 2");
    std::vector<std::string> users;
    for (const auto& s : samples) users.push_back(s.user_id);
    std::sort(users.begin(), users.end());
    users.erase(std::unique(users.begin(), users.end()), users.end());
    if (static_cast<int>(users.size()) < k)
        throw std::invalid_argument("fewer users than folds");

    Rng rng = substream(seed, {0xf01d5ULL});
    deterministic_shuffle(users, rng);

    // Near-equal groups: the first (n % k) folds get one extra user.
    std::map<std::string, int> fold_of_user;
    const std::size_t n = users.size();
    const std::size_t base = n / k, extra = n % k;
    std::size_t pos = 0;
    for (int f = 0; f < k; ++f) {
        const std::size_t take = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
        for (std::size_t i = 0; i < take; ++i) fold_of_user[users[pos++]] = f;
    }

    SplitPlan plan;
    plan.mode = SplitPlan::Mode::user_cv;
    plan.n_folds = k;
    plan.seed = seed;
    plan.fold_of.reserve(samples.size());
    for (const auto& s : samples) plan.fold_of.push_back(fold_of_user.at(s.user_id));
    plan.fold_size_ratio = size_ratio(plan.fold_of, k);
    return plan;
}

SplitPlan make_spatial_folds(const std::vector<UserLocationSample>& samples,
                             const std::vector<LocalPoint>& true_points) {
    if (samples.size() != true_points.size())
        throw std::invalid_argument("coordinate list does not match samples");
    if (samples.size() < 9)
        throw std::invalid_argument("spatial grid needs at least 9 samples");

    auto terciles = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        if (v.front() == v.back())
            throw std::invalid_argument("degenerate coordinates for spatial grid");
        const std::size_t n = v.size();
        return std::pair<double, double>{v[n / 3 - 1], v[2 * n / 3 - 1]};
    };
    std::vector<double> xs, ys;
    xs.reserve(true_points.size());
    ys.reserve(true_points.size());
    for (const auto& p : true_points) {
        xs.push_back(p.x);
        ys.push_back(p.y);
    }
    const auto [x1, x2] = terciles(xs);
    const auto [y1, y2] = terciles(ys);

    auto band = [](double v, double t1, double t2) {
        if (v <= t1) return 0;
        if (v <= t2) return 1;
        return 2;
    };

    SplitPlan plan;
    plan.mode = SplitPlan::Mode::spatial_grid;
    plan.n_folds = 9;
    plan.fold_of.reserve(samples.size());
    for (const auto& p : true_points)
        plan.fold_of.push_back(3 * band(p.x, x1, x2) + band(p.y, y1, y2));
    plan.fold_size_ratio = size_ratio(plan.fold_of, 9);
    return plan;
}

EvaluationReport EvaluationReport::from_outcomes(const std::vector<int>& labels,
                                                 std::vector<SampleOutcome> outcomes,
                                                 int n_classes) {
    if (labels.size() != outcomes.size())
        throw std::invalid_argument("label/outcome count mismatch");
    EvaluationReport report;
    report.confusion.assign(n_classes, std::vector<std::int64_t>(n_classes, 0));
    std::size_t correct = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        outcomes[i].correct = outcomes[i].predicted == labels[i];
        report.confusion[labels[i]][outcomes[i].predicted] += 1;
        if (outcomes[i].correct) ++correct;
    }
    report.accuracy =
        labels.empty() ? 0.0 : static_cast<double>(correct) / labels.size();
    report.sensitivity.resize(n_classes);
    for (int c = 0; c < n_classes; ++c) {
        std::int64_t support = 0;
        for (int p = 0; p < n_classes; ++p) support += report.confusion[c][p];
        if (support > 0)
            report.sensitivity[c] =
                static_cast<double>(report.confusion[c][c]) / support;
    }
    report.outcomes = std::move(outcomes);
    return report;
}

EvaluationReport run_scenario(const RunScenarioInputs& in, Scenario scenario,
                              const ObfuscationPolicy& policy,
                              const SplitPlan& plan) {
    const auto& samples = in.data.samples;
    const int n_classes = in.data.taxonomy.count();
    if (plan.fold_of.size() != samples.size())
        throw std::invalid_argument("split plan does not match the dataset");
    const FeatureMode mode = scenario_feature_mode(scenario);
    const bool needs_pois =
        scenario != Scenario::uninformed && mode != FeatureMode::temporal;
    if (needs_pois && in.pois == nullptr)
        throw std::invalid_argument("scenario requires a POI index");

    // Obfuscate once per policy; folds reuse the same coordinates.
    const SpatialIndex* poi_index = in.pois ? &in.pois->index : nullptr;
    ObfuscationResult obf = obfuscate_samples(in.true_points, policy, poi_index);

    FeaturizedData feat;
    const bool is_gbdt = scenario == Scenario::gbdt_temporal ||
                         scenario == Scenario::gbdt_spatial ||
                         scenario == Scenario::gbdt_spatiotemporal;
    if (is_gbdt)
        feat = featurize(in.data, obf.points, mode, in.pois, in.knn_k,
                         in.feature_radius_m);

    std::vector<int> labels;
    labels.reserve(samples.size());
    for (const auto& s : samples) labels.push_back(s.true_category);

    std::vector<SampleOutcome> outcomes(samples.size());
    for (int fold = 0; fold < plan.n_folds; ++fold) {
        std::vector<std::size_t> train_rows, test_rows;
        for (std::size_t i = 0; i < samples.size(); ++i)
            (plan.fold_of[i] == fold ? test_rows : train_rows).push_back(i);
        if (test_rows.empty()) continue;
        if (train_rows.empty())
            throw std::runtime_error("fold " + std::to_string(fold) +
                                     " has no training data");

        std::vector<int> train_labels;
        train_labels.reserve(train_rows.size());
        for (std::size_t i : train_rows) train_labels.push_back(labels[i]);
        const int distinct =
            static_cast<int>(std::set<int>(train_labels.begin(), train_labels.end()).size());
        if (distinct < 2)
            throw std::runtime_error("fold " + std::to_string(fold) +
                                     " training labels contain a single class");

        switch (scenario) {
            case Scenario::uninformed: {
                const auto baseline = ClassFrequencyBaseline::fit(train_labels, n_classes);
                Rng rng = substream(in.seed, {0x41ULL, static_cast<std::uint64_t>(fold)});
                const auto drawn = baseline.draw(test_rows.size(), rng);
                for (std::size_t t = 0; t < test_rows.size(); ++t) {
                    auto& o = outcomes[test_rows[t]];
                    o.predicted = drawn[t];
                    o.proba = baseline.frequencies();
                }
                break;
            }
            case Scenario::spatial_join: {
                for (std::size_t i : test_rows) {
                    auto& o = outcomes[i];
                    o.predicted = spatial_join_predict(obf.points[i], *in.pois);
                    o.proba.assign(n_classes, 0.0);
                    o.proba[o.predicted] = 1.0;
                }
                break;
            }
            default: {
                FeatureMatrix train_X, test_X;
                train_X.columns = test_X.columns = feat.X.columns;
                train_X.n_cols = test_X.n_cols = feat.X.n_cols;
                train_X.n_rows = train_rows.size();
                test_X.n_rows = test_rows.size();
                train_X.values.reserve(train_X.n_rows * train_X.n_cols);
                for (std::size_t i : train_rows)
                    train_X.values.insert(train_X.values.end(), feat.X.row(i),
                                          feat.X.row(i) + feat.X.n_cols);
                test_X.values.reserve(test_X.n_rows * test_X.n_cols);
                for (std::size_t i : test_rows)
                    test_X.values.insert(test_X.values.end(), feat.X.row(i),
                                         feat.X.row(i) + feat.X.n_cols);

                const GbdtModel model = GbdtModel::train(
                    train_X, train_labels, n_classes, in.model_params,
                    in.data.taxonomy.categories());
                const auto proba = model.predict_proba(test_X);
                for (std::size_t t = 0; t < test_rows.size(); ++t) {
                    auto& o = outcomes[test_rows[t]];
                    o.proba.assign(proba.begin() + t * n_classes,
                                   proba.begin() + (t + 1) * n_classes);
                    int best = 0;
                    for (int c = 1; c < n_classes; ++c)
                        if (o.proba[c] > o.proba[best]) best = c;
                    o.predicted = best;
                }
                break;
            }
        }
    }

    EvaluationReport report =
        EvaluationReport::from_outcomes(labels, std::move(outcomes), n_classes);
    report.scenario = scenario_name(scenario);
    report.fold_of = plan.fold_of;
    report.mean_r_used = obf.mean_r_used;
    return report;
}

DensityReport density_stratified_accuracy(const EvaluationReport& report,
                                          const std::vector<LocalPoint>& true_points,
                                          const PoiContext& pois, double radius_m,
                                          const std::vector<double>& bin_edges) {
    if (report.outcomes.size() != true_points.size())
        throw std::invalid_argument("report does not match the coordinate list");
    if (bin_edges.size() < 2 || !std::is_sorted(bin_edges.begin(), bin_edges.end()))
        throw std::invalid_argument("bin edges must be ascending");
    if (!(radius_m > 0.0))
        throw std::invalid_argument("density radius must be positive");

    std::vector<double> density(true_points.size());
    const std::int64_t n = static_cast<std::int64_t>(true_points.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i)
        density[i] = static_cast<double>(
            pois.index.radius_query(true_points[i], radius_m).size());

    // Final open-ended bin [last_edge, inf).
    const std::size_t n_bins = bin_edges.size();
    std::vector<std::size_t> count(n_bins, 0), correct(n_bins, 0);
    std::vector<double> dsum(n_bins, 0.0);
    double sum_correct = 0.0, sum_incorrect = 0.0;
    std::size_t n_correct = 0, n_incorrect = 0;
    for (std::size_t i = 0; i < true_points.size(); ++i) {
        const auto it =
            std::upper_bound(bin_edges.begin(), bin_edges.end(), density[i]);
        const std::size_t bin = it == bin_edges.begin()
                                    ? 0
                                    : static_cast<std::size_t>(it - bin_edges.begin()) - 1;
        count[bin] += 1;
        dsum[bin] += density[i];
        if (report.outcomes[i].correct) {
            correct[bin] += 1;
            sum_correct += density[i];
            ++n_correct;
        } else {
            sum_incorrect += density[i];
            ++n_incorrect;
        }
    }

    DensityReport out;
    for (std::size_t b = 0; b < n_bins; ++b) {
        if (count[b] == 0) continue;  // empty bins are absent, not zero
        DensityBin bin;
        bin.lo = bin_edges[b];
        if (b + 1 < n_bins) bin.hi = bin_edges[b + 1];
        bin.n_samples = count[b];
        bin.accuracy = static_cast<double>(correct[b]) / count[b];
        bin.mean_density = dsum[b] / count[b];
        out.bins.push_back(bin);
    }
    out.mean_density_correct = n_correct ? sum_correct / n_correct : 0.0;
    out.mean_density_incorrect = n_incorrect ? sum_incorrect / n_incorrect : 0.0;
    return out;
}

}  // namespace locpriv
