#include <set>

#include "doctest.h"
#include "locpriv/eval.hpp"
#include "locpriv/synth.hpp"

using namespace locpriv;

namespace {

std::vector<UserLocationSample> samples_for_users(int n_users,
                                                  int samples_per_user) {
    std::vector<UserLocationSample> samples;
    for (int u = 0; u < n_users; ++u) {
        for (int l = 0; l < samples_per_user; ++l) {
            UserLocationSample s;
            s.user_id = "u" + std::to_string(u);
            s.location_id = "v" + std::to_string(u * 100 + l);
            s.geo = {40.0, -74.0};
            s.visit_times = {1000};
            s.tz_offsets_min = {0};
            s.true_category = 0;
            samples.push_back(s);
        }
    }
    return samples;
}

}  // namespace

TEST_CASE("user folds: one user per fold when users == folds") {
    const auto samples = samples_for_users(10, 3);
    const auto plan = make_user_folds(samples, 10, 1);
    CHECK(plan.n_folds == 10);
    // all samples of a user share a fold
    for (int u = 0; u < 10; ++u) {
        const int fold = plan.fold_of[u * 3];
        CHECK(plan.fold_of[u * 3 + 1] == fold);
        CHECK(plan.fold_of[u * 3 + 2] == fold);
    }
    // every fold holds exactly one user = 3 samples
    std::vector<int> sizes(10, 0);
    for (int f : plan.fold_of) sizes[f] += 1;
    for (int f = 0; f < 10; ++f) CHECK(sizes[f] == 3);
    CHECK(plan.fold_size_ratio == doctest::Approx(1.0));
}

TEST_CASE("user folds partition the samples and are seed-deterministic") {
    const auto samples = samples_for_users(23, 2);
    const auto plan = make_user_folds(samples, 5, 7);
    std::set<int> folds(plan.fold_of.begin(), plan.fold_of.end());
    CHECK(folds.size() == 5);
    for (int f : plan.fold_of) {
        CHECK(f >= 0);
        CHECK(f < 5);
    }
    const auto again = make_user_folds(samples, 5, 7);
    CHECK(plan.fold_of == again.fold_of);
    const auto other = make_user_folds(samples, 5, 8);
    CHECK(plan.fold_of != other.fold_of);

    CHECK_THROWS_AS(make_user_folds(samples_for_users(3, 1), 10, 1),
                    std::invalid_argument);
}

TEST_CASE("spatial folds on a 9x9 lattice give nine folds of nine") {
    std::vector<UserLocationSample> samples;
    std::vector<LocalPoint> pts;
    for (int gx = 0; gx < 9; ++gx) {
        for (int gy = 0; gy < 9; ++gy) {
            UserLocationSample s;
            s.user_id = "u";
            s.location_id = std::to_string(gx) + "_" + std::to_string(gy);
            s.geo = {40.0, -74.0};
            s.visit_times = {0};
            s.tz_offsets_min = {0};
            s.true_category = 0;
            samples.push_back(s);
            pts.push_back({gx * 100.0, gy * 100.0});
        }
    }
    const auto plan = make_spatial_folds(samples, pts);
    CHECK(plan.n_folds == 9);
    std::vector<int> sizes(9, 0);
    for (int f : plan.fold_of) sizes[f] += 1;
    for (int f = 0; f < 9; ++f) CHECK(sizes[f] == 9);
    CHECK(plan.fold_size_ratio == doctest::Approx(1.0));

    SUBCASE("each x band holds a third of the samples") {
        std::vector<int> band(3, 0);
        for (std::size_t i = 0; i < pts.size(); ++i) band[plan.fold_of[i] / 3] += 1;
        for (int b = 0; b < 3; ++b) CHECK(band[b] == 27);
    }
}

TEST_CASE("spatial folds reject degenerate coordinates") {
    auto samples = samples_for_users(3, 4);
    std::vector<LocalPoint> pts(samples.size(), LocalPoint{1.0, 1.0});
    CHECK_THROWS_AS(make_spatial_folds(samples, pts), std::invalid_argument);
}

TEST_CASE("report from injected perfect predictions") {
    std::vector<int> labels = {0, 1, 2, 1, 0};
    std::vector<SampleOutcome> outcomes(5);
    for (int i = 0; i < 5; ++i) {
        outcomes[i].predicted = labels[i];
        outcomes[i].proba.assign(3, 0.0);
        outcomes[i].proba[labels[i]] = 1.0;
    }
    const auto report = EvaluationReport::from_outcomes(labels, outcomes, 3);
    CHECK(report.accuracy == 1.0);
    for (int c = 0; c < 3; ++c) {
        for (int p = 0; p < 3; ++p) {
            if (c == p) continue;
            CHECK(report.confusion[c][p] == 0);
        }
        REQUIRE(report.sensitivity[c].has_value());
        CHECK(*report.sensitivity[c] == 1.0);
    }
    CHECK(report.confusion[0][0] == 2);
    CHECK(report.confusion[1][1] == 2);
    CHECK(report.confusion[2][2] == 1);
}

TEST_CASE("report accuracy equals trace over total and row sums match support") {
    std::vector<int> labels = {0, 0, 1, 1, 1, 2};
    std::vector<SampleOutcome> outcomes(6);
    const std::vector<int> preds = {0, 1, 1, 1, 0, 0};
    for (int i = 0; i < 6; ++i) {
        outcomes[i].predicted = preds[i];
        outcomes[i].proba.assign(3, 0.0);
        outcomes[i].proba[preds[i]] = 1.0;
    }
    const auto report = EvaluationReport::from_outcomes(labels, outcomes, 3);
    std::int64_t trace = 0, total = 0;
    for (int c = 0; c < 3; ++c) {
        std::int64_t row = 0;
        for (int p = 0; p < 3; ++p) {
            row += report.confusion[c][p];
            total += report.confusion[c][p];
        }
        trace += report.confusion[c][c];
        const std::int64_t support =
            std::count(labels.begin(), labels.end(), c);
        CHECK(row == support);
    }
    CHECK(report.accuracy == doctest::Approx(static_cast<double>(trace) / total));
    // zero-support sensitivity would be absent; class 2 has support 1 here
    CHECK(report.sensitivity[2].has_value());
    CHECK(*report.sensitivity[2] == 0.0);
}

namespace {

struct PipelineFixture {
    Dataset data;
    std::vector<LocalPoint> true_points;
    PoiContext pois;
    GbdtParams params;

    explicit PipelineFixture(std::uint64_t seed, int n_users = 60) {
        SynthSpec spec = SynthSpec::basic(4, seed);
        spec.n_pois = 400;
        spec.n_users = n_users;
        spec.region_km = 4.0;
        spec.clusters_per_category = 4;
        spec.cluster_radius_m = 80.0;
        const SynthCity city = generate(spec);
        data = to_dataset(city);
        const Projection proj(spec.anchor);
        for (const auto& s : data.samples)
            true_points.push_back(proj.to_local(s.geo));
        pois = PoiContext::build(city.pois, proj);
        params.n_rounds = 8;
        params.max_depth = 4;
    }
};

}  // namespace

TEST_CASE("spatial join at r = 0 on venue POIs is exact") {
    PipelineFixture fx(21);
    const auto plan = make_user_folds(fx.data.samples, 5, 3);
    ObfuscationPolicy none;  // mode none
    RunScenarioInputs inputs{fx.data, fx.true_points, &fx.pois,
                             20,      200.0,          fx.params, 99};
    const auto report = run_scenario(inputs, Scenario::spatial_join, none, plan);
    CHECK(report.accuracy == 1.0);
}

TEST_CASE("pooled accuracy equals the fold-size weighted mean") {
    PipelineFixture fx(22);
    const auto plan = make_user_folds(fx.data.samples, 4, 5);
    ObfuscationPolicy policy;
    policy.mode = ObfuscationPolicy::Mode::fixed;
    policy.radius_m = 100.0;
    policy.seed = 5;
    RunScenarioInputs inputs{fx.data, fx.true_points, &fx.pois,
                             20,      200.0,          fx.params, 99};
    const auto report = run_scenario(inputs, Scenario::spatial_join, policy, plan);

    double weighted = 0.0;
    for (int f = 0; f < plan.n_folds; ++f) {
        std::size_t n = 0, correct = 0;
        for (std::size_t i = 0; i < fx.data.samples.size(); ++i) {
            if (plan.fold_of[i] != f) continue;
            ++n;
            if (report.outcomes[i].correct) ++correct;
        }
        weighted += static_cast<double>(correct);
    }
    weighted /= static_cast<double>(fx.data.samples.size());
    CHECK(report.accuracy == doctest::Approx(weighted));
}

TEST_CASE("gbdt scenarios run end-to-end and a single-class fold fails loudly") {
    PipelineFixture fx(23);
    const auto plan = make_user_folds(fx.data.samples, 4, 5);
    ObfuscationPolicy policy;
    policy.mode = ObfuscationPolicy::Mode::fixed;
    policy.radius_m = 50.0;
    policy.seed = 5;
    RunScenarioInputs inputs{fx.data, fx.true_points, &fx.pois,
                             10,      200.0,          fx.params, 99};
    const auto report =
        run_scenario(inputs, Scenario::gbdt_spatiotemporal, policy, plan);
    CHECK(report.accuracy > 0.0);
    for (const auto& o : report.outcomes) {
        REQUIRE(o.proba.size() == 4);
        double sum = 0.0;
        for (double p : o.proba) sum += p;
        CHECK(sum == doctest::Approx(1.0));
    }

    SUBCASE("single-class training labels name the fold") {
        Dataset flat = fx.data;
        for (auto& s : flat.samples) s.true_category = 0;
        RunScenarioInputs bad{flat, fx.true_points, &fx.pois,
                              10,   200.0,          fx.params, 99};
        CHECK_THROWS_WITH_AS(
            run_scenario(bad, Scenario::gbdt_spatial, policy, plan),
            doctest::Contains("fold 0"), std::runtime_error);
    }
}

TEST_CASE("user and spatial splits both complete; the gap is reported") {
    PipelineFixture fx(24, 80);
    ObfuscationPolicy policy;
    policy.mode = ObfuscationPolicy::Mode::fixed;
    policy.radius_m = 100.0;
    policy.seed = 3;
    RunScenarioInputs inputs{fx.data, fx.true_points, &fx.pois,
                             10,      200.0,          fx.params, 99};
    const auto user_plan = make_user_folds(fx.data.samples, 5, 11);
    const auto user_report =
        run_scenario(inputs, Scenario::gbdt_spatial, policy, user_plan);
    const auto grid_plan = make_spatial_folds(fx.data.samples, fx.true_points);
    const auto grid_report =
        run_scenario(inputs, Scenario::gbdt_spatial, policy, grid_plan);
    CHECK(user_report.accuracy > 0.0);
    CHECK(grid_report.accuracy > 0.0);
    MESSAGE("user cv minus spatial grid accuracy: ",
            user_report.accuracy - grid_report.accuracy);
}

TEST_CASE("density stratification: single bin equals overall accuracy") {
    PipelineFixture fx(25);
    const auto plan = make_user_folds(fx.data.samples, 4, 5);
    ObfuscationPolicy policy;
    policy.mode = ObfuscationPolicy::Mode::fixed;
    policy.radius_m = 150.0;
    policy.seed = 5;
    RunScenarioInputs inputs{fx.data, fx.true_points, &fx.pois,
                             20,      200.0,          fx.params, 99};
    const auto report = run_scenario(inputs, Scenario::spatial_join, policy, plan);

    SUBCASE("one catch-all bin") {
        const auto density = density_stratified_accuracy(
            report, fx.true_points, fx.pois, 200.0, {0.0, 1e9});
        REQUIRE(density.bins.size() == 1);
        CHECK(density.bins[0].accuracy == doctest::Approx(report.accuracy));
        CHECK(density.bins[0].n_samples == fx.data.samples.size());
    }
    SUBCASE("empty bins are omitted") {
        const auto density = density_stratified_accuracy(
            report, fx.true_points, fx.pois, 200.0, {0.0, 1e6, 2e6});
        CHECK(density.bins.size() == 1);  // nothing has density >= 1e6
    }
}

TEST_CASE("isolated unambiguous POIs are classified almost perfectly") {
    // A city where every POI sits alone: huge spacing, tiny obfuscation.
    std::vector<Poi> pois;
    Dataset data;
    data.taxonomy = CategoryTaxonomy({"A", "B"});
    const Projection proj({40.0, -74.0});
    std::vector<LocalPoint> pts;
    for (int i = 0; i < 40; ++i) {
        const LocalPoint p{i * 5000.0, (i % 2) * 5000.0};
        Poi poi;
        poi.poi_id = "p" + std::to_string(i);
        poi.geo = proj.to_geo(p);
        poi.category = i % 2;
        pois.push_back(poi);

        UserLocationSample s;
        s.user_id = "u" + std::to_string(i % 8);
        s.location_id = poi.poi_id;
        s.geo = poi.geo;
        s.visit_times = {1000 + i * 10000};
        s.tz_offsets_min = {0};
        s.true_category = poi.category;
        data.samples.push_back(s);
        pts.push_back(p);
    }
    PoiContext ctx = PoiContext::build(pois, proj);
    const auto plan = make_user_folds(data.samples, 4, 2);
    ObfuscationPolicy policy;
    policy.mode = ObfuscationPolicy::Mode::fixed;
    policy.radius_m = 100.0;  // far below the 5 km spacing
    policy.seed = 1;
    GbdtParams params;
    RunScenarioInputs inputs{data, pts, &ctx, 5, 200.0, params, 2};
    const auto report = run_scenario(inputs, Scenario::spatial_join, policy, plan);
    CHECK(report.accuracy == 1.0);
    const auto density =
        density_stratified_accuracy(report, pts, ctx, 200.0, {0.0, 10.0, 1e9});
    REQUIRE(density.bins.size() == 1);
    CHECK(density.bins[0].lo == 0.0);
    CHECK(density.bins[0].accuracy == 1.0);
}

TEST_CASE("scenario names round-trip") {
    for (const auto name : {"uninformed", "spatial_join", "gbdt_temporal",
                            "gbdt_spatial", "gbdt_spatiotemporal"})
        CHECK(scenario_name(scenario_from_name(name)) == name);
    CHECK_THROWS_AS(scenario_from_name("bogus"), std::invalid_argument);
}
