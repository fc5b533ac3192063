#include <cmath>

#include "doctest.h"
#include "locpriv/profiling.hpp"
#include "locpriv/rng.hpp"

using namespace locpriv;

namespace {

UserProfile profile(std::string id, std::vector<double> p) {
    return {std::move(id), std::move(p), 1.0};
}

// One user with the given per-sample (true category, visit count).
Dataset dataset_of(const std::vector<std::pair<int, int>>& samples,
                   int n_categories, const std::string& user = "u1") {
    Dataset data;
    std::vector<std::string> names;
    for (int c = 0; c < n_categories; ++c) names.push_back("C" + std::to_string(c));
    data.taxonomy = CategoryTaxonomy(names);
    int loc = 0;
    for (const auto& [cat, visits] : samples) {
        UserLocationSample s;
        s.user_id = user;
        s.location_id = "v" + std::to_string(loc++);
        s.geo = {40.0, -74.0};
        for (int v = 0; v < visits; ++v) {
            s.visit_times.push_back(1000 * loc + v * 7200);
            s.tz_offsets_min.push_back(0);
        }
        s.true_category = cat;
        data.samples.push_back(s);
    }
    return data;
}

}  // namespace

TEST_CASE("true profile counts visits per category") {
    // 1 visit Dining, 2 visits Retail, 1 visit Nightlife -> [0.25, 0.5, 0.25]
    const auto data = dataset_of({{0, 1}, {1, 2}, {2, 1}}, 3);
    const auto profiles = true_profiles(data, ProfileWeighting::visits);
    REQUIRE(profiles.size() == 1);
    CHECK(profiles[0].p[0] == doctest::Approx(0.25));
    CHECK(profiles[0].p[1] == doctest::Approx(0.5));
    CHECK(profiles[0].p[2] == doctest::Approx(0.25));
}

TEST_CASE("single-category users have one-hot profiles") {
    const auto one = true_profiles(dataset_of({{1, 3}}, 3), ProfileWeighting::visits);
    CHECK(one[0].p == std::vector<double>{0.0, 1.0, 0.0});
    // two locations with visit counts 3 and 1, same category -> still one-hot
    const auto two =
        true_profiles(dataset_of({{1, 3}, {1, 1}}, 3), ProfileWeighting::visits);
    CHECK(two[0].p == std::vector<double>{0.0, 1.0, 0.0});
}

TEST_CASE("location weighting ignores visit counts") {
    const auto data = dataset_of({{0, 10}, {1, 1}}, 2);
    const auto by_visits = true_profiles(data, ProfileWeighting::visits);
    CHECK(by_visits[0].p[0] == doctest::Approx(10.0 / 11.0));
    const auto by_locations = true_profiles(data, ProfileWeighting::locations);
    CHECK(by_locations[0].p[0] == doctest::Approx(0.5));
}

TEST_CASE("profiles sum to one over random data") {
    Rng rng(5);
    std::vector<std::pair<int, int>> spec;
    for (int i = 0; i < 30; ++i)
        spec.push_back({static_cast<int>(rng.below(6)),
                        1 + static_cast<int>(rng.below(5))});
    const auto profiles =
        true_profiles(dataset_of(spec, 6), ProfileWeighting::visits);
    for (const auto& profile : profiles) {
        double sum = 0.0;
        for (double v : profile.p) {
            CHECK(v >= 0.0);
            sum += v;
        }
        CHECK(std::abs(sum - 1.0) <= 1e-9);
    }
}

TEST_CASE("one-hot probabilities make soft equal hard") {
    const auto data = dataset_of({{0, 2}, {1, 1}, {2, 3}}, 3);
    std::vector<SampleOutcome> outcomes(3);
    const std::vector<int> preds = {1, 1, 2};
    for (int i = 0; i < 3; ++i) {
        outcomes[i].predicted = preds[i];
        outcomes[i].proba.assign(3, 0.0);
        outcomes[i].proba[preds[i]] = 1.0;
    }
    const auto hard =
        predicted_profiles(data, outcomes, ProfileMode::hard, ProfileWeighting::visits);
    const auto soft =
        predicted_profiles(data, outcomes, ProfileMode::soft, ProfileWeighting::visits);
    REQUIRE(hard.size() == 1);
    for (int c = 0; c < 3; ++c)
        CHECK(hard[0].p[c] == doctest::Approx(soft[0].p[c]));
}

TEST_CASE("uniform probability rows give the uniform soft profile") {
    const auto data = dataset_of({{0, 1}, {1, 1}, {2, 1}}, 3);
    std::vector<SampleOutcome> outcomes(3);
    for (int i = 0; i < 3; ++i) {
        outcomes[i].predicted = 0;
        outcomes[i].proba.assign(3, 1.0 / 3.0);
    }
    const auto soft =
        predicted_profiles(data, outcomes, ProfileMode::soft, ProfileWeighting::visits);
    for (int c = 0; c < 3; ++c) CHECK(soft[0].p[c] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("soft profiling without probability rows is an error") {
    const auto data = dataset_of({{0, 1}}, 3);
    std::vector<SampleOutcome> outcomes(1);
    outcomes[0].predicted = 0;  // proba left empty
    CHECK_THROWS_AS(predicted_profiles(data, outcomes, ProfileMode::soft,
                                       ProfileWeighting::visits),
                    std::invalid_argument);
    CHECK_NOTHROW(predicted_profiles(data, outcomes, ProfileMode::hard,
                                     ProfileWeighting::visits));
}

TEST_CASE("the toy two-user example reproduces the reference errors") {
    // User 1: truth [0.25, 0.5, 0.25]; predictions over four single-visit
    // locations argmax to [0.5, 0.25, 0.25] (hard error 0.354) while the
    // probability rows average to [0.405, 0.345, 0.25] (soft error 0.219).
    // User 2: all four argmax predictions correct (hard error 0), rows
    // averaging to [0.55, 0.2, 0.25] (soft error 0.071).
    Dataset data;
    data.taxonomy = CategoryTaxonomy({"Dining", "Retail", "Nightlife"});
    auto add = [&](const std::string& user, int loc, int cat) {
        UserLocationSample s;
        s.user_id = user;
        s.location_id = user + "v" + std::to_string(loc);
        s.geo = {40.0, -74.0};
        s.visit_times = {1000 + loc * 5000};
        s.tz_offsets_min = {0};
        s.true_category = cat;
        data.samples.push_back(s);
    };
    add("u1", 0, 0);
    add("u1", 1, 1);
    add("u1", 2, 1);
    add("u1", 3, 2);
    add("u2", 0, 0);
    add("u2", 1, 0);
    add("u2", 2, 1);
    add("u2", 3, 2);

    std::vector<SampleOutcome> outcomes(8);
    const std::vector<std::vector<double>> rows = {
        {0.7, 0.2, 0.1},   // u1: Dining (correct)
        {0.52, 0.38, 0.1}, // u1: Dining (true Retail)
        {0.2, 0.7, 0.1},   // u1: Retail
        {0.2, 0.1, 0.7},   // u1: Nightlife
        {0.8, 0.1, 0.1},   // u2: Dining
        {0.8, 0.1, 0.1},   // u2: Dining
        {0.3, 0.5, 0.2},   // u2: Retail
        {0.3, 0.1, 0.6},   // u2: Nightlife
    };
    for (int i = 0; i < 8; ++i) {
        outcomes[i].proba = rows[i];
        outcomes[i].predicted = static_cast<int>(
            std::max_element(rows[i].begin(), rows[i].end()) - rows[i].begin());
    }

    const auto truth = true_profiles(data, ProfileWeighting::visits);
    const auto hard =
        predicted_profiles(data, outcomes, ProfileMode::hard, ProfileWeighting::visits);
    const auto soft =
        predicted_profiles(data, outcomes, ProfileMode::soft, ProfileWeighting::visits);
    REQUIRE(truth.size() == 2);
    REQUIRE(truth[0].user_id == "u1");

    CHECK(std::abs(profiling_error(hard[0], truth[0]) - 0.354) <= 5e-4);
    CHECK(std::abs(profiling_error(soft[0], truth[0]) - 0.219) <= 5e-4);
    CHECK(profiling_error(hard[1], truth[1]) == 0.0);
    CHECK(std::abs(profiling_error(soft[1], truth[1]) - 0.071) <= 5e-4);
}

TEST_CASE("profiling error basics") {
    CHECK(profiling_error(profile("a", {0.2, 0.8}), profile("b", {0.2, 0.8})) == 0.0);
    CHECK(profiling_error(profile("a", {1, 0}), profile("b", {0, 1})) ==
          doctest::Approx(std::sqrt(2.0)));
    CHECK_THROWS_AS(profiling_error(profile("a", {1, 0}), profile("b", {1, 0, 0})),
                    std::invalid_argument);
}

TEST_CASE("profiling error is a metric on random triples") {
    Rng rng(6);
    auto random_profile = [&rng](int dim) {
        std::vector<double> p(dim);
        double sum = 0.0;
        for (double& v : p) {
            v = rng.uniform();
            sum += v;
        }
        for (double& v : p) v /= sum;
        return profile("x", std::move(p));
    };
    for (int it = 0; it < 200; ++it) {
        const auto a = random_profile(5), b = random_profile(5), c = random_profile(5);
        const double ab = profiling_error(a, b);
        const double ba = profiling_error(b, a);
        CHECK(ab == doctest::Approx(ba));
        CHECK(ab <= profiling_error(a, c) + profiling_error(c, b) + 1e-12);
    }
}

TEST_CASE("reidentification: exact profiles give hit@1 = 1") {
    std::vector<UserProfile> pool;
    Rng rng(7);
    for (int u = 0; u < 50; ++u) {
        std::vector<double> p(4);
        double sum = 0.0;
        for (double& v : p) {
            v = rng.uniform() + 0.01;
            sum += v;
        }
        for (double& v : p) v /= sum;
        pool.push_back(profile("u" + std::to_string(u), std::move(p)));
    }
    CHECK(reidentify(pool, pool, 1) == 1.0);
    CHECK(reidentify(pool, pool, 50) == 1.0);  // hit@|U| = 1

    SUBCASE("hit@k is non-decreasing in k") {
        // noisy predictions
        std::vector<UserProfile> noisy = pool;
        for (auto& profile : noisy) {
            double sum = 0.0;
            for (double& v : profile.p) {
                v = std::max(0.0, v + rng.uniform(-0.2, 0.2));
                sum += v;
            }
            for (double& v : profile.p) v /= sum;
        }
        double prev = 0.0;
        for (int k : {1, 2, 5, 10, 25, 50}) {
            const double acc = reidentify(noisy, pool, k);
            CHECK(acc >= prev);
            prev = acc;
        }
        CHECK(prev == 1.0);
    }
}

TEST_CASE("random profiles re-identify at about k/|U|") {
    Rng rng(8);
    auto random_pool = [&rng](int n, const char* prefix) {
        std::vector<UserProfile> out;
        for (int u = 0; u < n; ++u) {
            std::vector<double> p(6);
            double sum = 0.0;
            for (double& v : p) {
                v = rng.uniform();
                sum += v;
            }
            for (double& v : p) v /= sum;
            out.push_back(profile(prefix + std::to_string(u), std::move(p)));
        }
        return out;
    };
    auto pool = random_pool(1000, "u");
    auto predicted = random_pool(1000, "u");  // same ids, independent vectors
    const double acc = reidentify(predicted, pool, 5);
    CHECK(std::abs(acc - 0.005) <= 0.005);
}

TEST_CASE("privacy loss: equidistant pool gives PL = 1 exactly") {
    // Profiles at the corners of the simplex are all equidistant from the
    // uniform prediction.
    std::vector<UserProfile> pool;
    for (int u = 0; u < 10; ++u) {
        std::vector<double> p(10, 0.0);
        p[u] = 1.0;
        pool.push_back(profile("u" + std::to_string(u), std::move(p)));
    }
    std::vector<UserProfile> predicted;
    for (int u = 0; u < 10; ++u)
        predicted.push_back(profile("u" + std::to_string(u),
                                    std::vector<double>(10, 0.1)));
    for (double pl : privacy_losses(predicted, pool))
        CHECK(pl == doctest::Approx(1.0));
}

TEST_CASE("an exact match in a pool of 10 saturates the softmax") {
    std::vector<UserProfile> pool;
    Rng rng(9);
    for (int u = 0; u < 10; ++u) {
        std::vector<double> p(5);
        double sum = 0.0;
        for (double& v : p) {
            v = rng.uniform() + 0.05;
            sum += v;
        }
        for (double& v : p) v /= sum;
        pool.push_back(profile("u" + std::to_string(u), std::move(p)));
    }
    // predicted = exact true profile for user 0; everyone else is >= 0.1 away
    const std::vector<UserProfile> predicted = {pool[0]};
    bool far_enough = true;
    for (int u = 1; u < 10; ++u)
        if (profiling_error(pool[0], pool[u]) < 0.1) far_enough = false;
    REQUIRE(far_enough);
    const auto pl = privacy_losses(predicted, pool);
    CHECK(pl[0] > 9.9);  // 0.99 * |U|
}

TEST_CASE("an uninformed attacker concentrates near PL = 1") {
    // 500 users whose true profiles are random permutations of one base
    // profile (all at the same distance from the frequency vector), plus a
    // small jitter; the attacker predicts the frequency vector for everyone.
    const int n_users = 500, dim = 12;
    Rng rng(10);
    const std::vector<double> base = {0.30, 0.20, 0.14, 0.10, 0.07, 0.05,
                                      0.04, 0.03, 0.03, 0.02, 0.01, 0.01};
    std::vector<UserProfile> pool;
    std::vector<double> mean(dim, 0.0);
    for (int u = 0; u < n_users; ++u) {
        std::vector<double> p = base;
        for (std::size_t i = p.size(); i > 1; --i)
            std::swap(p[i - 1], p[rng.below(i)]);
        double sum = 0.0;
        for (double& v : p) {
            v += rng.uniform(0.0, 0.01);
            sum += v;
        }
        for (double& v : p) v /= sum;
        for (int c = 0; c < dim; ++c) mean[c] += p[c] / n_users;
        pool.push_back(profile("u" + std::to_string(u), std::move(p)));
    }
    std::vector<UserProfile> predicted;
    for (int u = 0; u < n_users; ++u)
        predicted.push_back(profile("u" + std::to_string(u), mean));
    const auto pl = privacy_losses(predicted, pool);
    const double med = median_of(pl);
    CHECK(med >= 0.8);
    CHECK(med <= 1.25);
}

TEST_CASE("privacy loss report bundles median, cdf and hit rates") {
    std::vector<UserProfile> pool;
    Rng rng(11);
    for (int u = 0; u < 20; ++u) {
        std::vector<double> p(4);
        double sum = 0.0;
        for (double& v : p) {
            v = rng.uniform() + 0.05;
            sum += v;
        }
        for (double& v : p) v /= sum;
        pool.push_back(profile("u" + std::to_string(u), std::move(p)));
    }
    const auto report = privacy_loss_report(pool, pool);
    CHECK(report.hit_at_1 == 1.0);
    CHECK(report.hit_at_5 == 1.0);
    CHECK(report.per_user.size() == 20);
    CHECK(report.cdf.size() == 20);
    CHECK(report.cdf.back().second == doctest::Approx(1.0));
    CHECK(report.median > 1.0);  // exact matches dominate their pools
}

TEST_CASE("decay fit recovers known parameters within 1%") {
    const double a = 0.3439, c = 0.6216, lambda = 0.0097;
    std::vector<double> xs, ys;
    for (double x = 0.0; x <= 1200.0; x += 50.0) {
        xs.push_back(x);
        ys.push_back(a + c * std::exp(-lambda * x));
    }
    const auto fit = fit_decay(xs, ys);
    CHECK(std::abs(fit.a - a) / a < 0.01);
    CHECK(std::abs(fit.c - c) / c < 0.01);
    CHECK(std::abs(fit.lambda - lambda) / lambda < 0.01);
    CHECK(fit.rss < 1e-10);
}

TEST_CASE("decay fit on three exact points") {
    const double a = 0.1, c = 0.8, lambda = 0.02;
    std::vector<double> xs = {0.0, 100.0, 300.0};
    std::vector<double> ys;
    for (double x : xs) ys.push_back(a + c * std::exp(-lambda * x));
    const auto fit = fit_decay(xs, ys);
    CHECK(std::abs(fit.lambda - lambda) < 1e-4);
    CHECK(fit.rss < 1e-12);
}

TEST_CASE("constant series collapse to the constant model") {
    const auto fit = fit_decay({0, 100, 200, 300}, {0.4, 0.4, 0.4, 0.4});
    CHECK(fit.c == 0.0);
    CHECK(fit.a == doctest::Approx(0.4));
    CHECK(fit.rss <= 1e-20);
}

TEST_CASE("fit residual never exceeds the constant-model residual") {
    Rng rng(12);
    for (int it = 0; it < 20; ++it) {
        std::vector<double> xs, ys;
        for (int i = 0; i < 8; ++i) {
            xs.push_back(i * 75.0);
            ys.push_back(rng.uniform(0.0, 1.0));
        }
        const auto fit = fit_decay(xs, ys);
        double mean = 0.0;
        for (double y : ys) mean += y / ys.size();
        double const_rss = 0.0;
        for (double y : ys) const_rss += (y - mean) * (y - mean);
        CHECK(fit.rss <= const_rss + 1e-12);
    }
}

TEST_CASE("the reported half-life arithmetic is self-consistent") {
    // with lambda = 0.0121: the 50 m decay factor and the halving radius
    const double lambda = 0.0121;
    CHECK(std::abs(std::exp(-lambda * 50.0) - 0.5488) / 0.5488 < 0.01);
    CHECK(std::abs(std::log(2.0) / lambda - 57.43) / 57.43 < 0.01);
}

TEST_CASE("decay fit validates its inputs") {
    CHECK_THROWS_AS(fit_decay({0, 1}, {1, 2}), std::invalid_argument);
    CHECK_THROWS_AS(fit_decay({0, 1, 1}, {1, 2, 3}), std::invalid_argument);
}
