#include "locpriv/profiling.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include "locpriv/parallel.hpp"

namespace locpriv {

namespace {

void normalize(UserProfile& profile) {
    double sum = 0.0;
    for (double v : profile.p) sum += v;
    if (sum <= 0.0)
        throw std::runtime_error("empty profile for user " + profile.user_id);
    for (double& v : profile.p) v /= sum;
}

double sample_weight(const UserLocationSample& s, ProfileWeighting weighting) {
    return weighting == ProfileWeighting::visits
               ? static_cast<double>(s.visit_times.size())
               : 1.0;
}

}  // namespace

std::vector<UserProfile> true_profiles(const Dataset& data,
                                       ProfileWeighting weighting) {
    const int n_classes = data.taxonomy.count();
    std::map<std::string, UserProfile> by_user;
    for (const auto& s : data.samples) {
        auto& profile = by_user[s.user_id];
        if (profile.p.empty()) {
            profile.user_id = s.user_id;
            profile.p.assign(n_classes, 0.0);
        }
        const double w = sample_weight(s, weighting);
        profile.p[s.true_category] += w;
        profile.total_weight += w;
    }
    std::vector<UserProfile> out;
    out.reserve(by_user.size());
    for (auto& [id, profile] : by_user) {
        normalize(profile);
        out.push_back(std::move(profile));
    }
    return out;
}

std::vector<UserProfile> predicted_profiles(const Dataset& data,
                                            const std::vector<SampleOutcome>& outcomes,
                                            ProfileMode mode,
                                            ProfileWeighting weighting) {
    if (outcomes.size() != data.samples.size())
        throw std::invalid_argument("outcomes do not match the dataset");
    const int n_classes = data.taxonomy.count();
    std::map<std::string, UserProfile> by_user;
    for (std::size_t i = 0; i < data.samples.size(); ++i) {
        const auto& s = data.samples[i];
        const auto& o = outcomes[i];
        auto& profile = by_user[s.user_id];
        if (profile.p.empty()) {
            profile.user_id = s.user_id;
            profile.p.assign(n_classes, 0.0);
        }
        const double w = sample_weight(s, weighting);
        if (mode == ProfileMode::hard) {
            if (o.predicted < 0 || o.predicted >= n_classes)
                throw std::invalid_argument("missing prediction for sample " +
                                            std::to_string(i));
            profile.p[o.predicted] += w;
        } else {
            if (o.proba.size() != static_cast<std::size_t>(n_classes))
                throw std::invalid_argument(
                    "soft profiling requires a probability row for sample " +
                    std::to_string(i));
            for (int c = 0; c < n_classes; ++c) profile.p[c] += w * o.proba[c];
        }
        profile.total_weight += w;
    }
    std::vector<UserProfile> out;
    out.reserve(by_user.size());
    for (auto& [id, profile] : by_user) {
        normalize(profile);
        out.push_back(std::move(profile));
    }
    return out;
}

double profiling_error(const UserProfile& a, const UserProfile& b) {
    if (a.p.size() != b.p.size())
        throw std::invalid_argument("profile dimension mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.p.size(); ++i) {
        const double d = a.p[i] - b.p[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

double mean_profiling_error(const std::vector<UserProfile>& predicted,
                            const std::vector<UserProfile>& truth) {
    if (predicted.size() != truth.size() || predicted.empty())
        throw std::invalid_argument("profile sets do not match");
    std::map<std::string, const UserProfile*> pool;
    for (const auto& t : truth) pool[t.user_id] = &t;
    double sum = 0.0;
    for (const auto& p : predicted) {
        auto it = pool.find(p.user_id);
        if (it == pool.end())
            throw std::invalid_argument("no true profile for user " + p.user_id);
        sum += profiling_error(p, *it->second);
    }
    return sum / static_cast<double>(predicted.size());
}

double reidentify(const std::vector<UserProfile>& predicted,
                  const std::vector<UserProfile>& pool, int k) {
    if (predicted.empty() || pool.empty())
        throw std::invalid_argument("empty profile sets");
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    for (const auto& p : predicted)
        if (p.p.size() != pool.front().p.size())
            throw std::invalid_argument("profile dimension mismatch");
    for (const auto& p : pool)
        if (p.p.size() != pool.front().p.size())
            throw std::invalid_argument("profile dimension mismatch");

    std::size_t hits = 0;
    const std::int64_t n = static_cast<std::int64_t>(predicted.size());
#pragma omp parallel for schedule(static) reduction(+ : hits)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto& target = predicted[i];
        std::vector<std::pair<double, const std::string*>> ranked;
        ranked.reserve(pool.size());
        for (const auto& candidate : pool)
            ranked.emplace_back(profiling_error(target, candidate), &candidate.user_id);
        const std::size_t top =
            std::min<std::size_t>(static_cast<std::size_t>(k), ranked.size());
        std::partial_sort(ranked.begin(), ranked.begin() + top, ranked.end(),
                          [](const auto& a, const auto& b) {
                              if (a.first != b.first) return a.first < b.first;
                              return *a.second < *b.second;
                          });
        for (std::size_t r = 0; r < top; ++r) {
            if (*ranked[r].second == target.user_id) {
                hits += 1;
                break;
            }
        }
    }
    return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

std::vector<double> privacy_losses(const std::vector<UserProfile>& predicted,
                                   const std::vector<UserProfile>& pool) {
    if (pool.size() < 2)
        throw std::invalid_argument("privacy loss needs a pool of >= 2 users");
    // Resolve self indices up front; throwing inside the parallel loop would
    // terminate instead of propagating.
    std::map<std::string, int> pool_index;
    for (std::size_t j = 0; j < pool.size(); ++j) {
        if (pool[j].p.size() != pool.front().p.size())
            throw std::invalid_argument("profile dimension mismatch");
        pool_index[pool[j].user_id] = static_cast<int>(j);
    }
    std::vector<int> self_of(predicted.size());
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i].p.size() != pool.front().p.size())
            throw std::invalid_argument("profile dimension mismatch");
        auto it = pool_index.find(predicted[i].user_id);
        if (it == pool_index.end())
            throw std::invalid_argument("pool is missing user " +
                                        predicted[i].user_id);
        self_of[i] = it->second;
    }

    std::vector<double> pl(predicted.size(), 0.0);
    const std::int64_t n = static_cast<std::int64_t>(predicted.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto& target = predicted[i];
        std::vector<double> sim(pool.size());
        for (std::size_t j = 0; j < pool.size(); ++j)
            sim[j] = 1.0 / (profiling_error(target, pool[j]) + kSimilarityEpsilon);
        const double mx = *std::max_element(sim.begin(), sim.end());
        double denom = 0.0;
        for (double s : sim) denom += std::exp(s - mx);
        pl[i] = std::exp(sim[self_of[i]] - mx) / denom *
                static_cast<double>(pool.size());
    }
    return pl;
}

double median_of(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median of empty list");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

PrivacyLossReport privacy_loss_report(const std::vector<UserProfile>& predicted,
                                      const std::vector<UserProfile>& pool) {
    PrivacyLossReport report;
    report.per_user = privacy_losses(predicted, pool);
    report.median = median_of(report.per_user);
    std::vector<double> sorted = report.per_user;
    std::sort(sorted.begin(), sorted.end());
    report.cdf.reserve(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i)
        report.cdf.emplace_back(sorted[i],
                                static_cast<double>(i + 1) / sorted.size());
    report.hit_at_1 = reidentify(predicted, pool, 1);
    report.hit_at_5 = reidentify(predicted, pool, 5);
    return report;
}

namespace {

// Closed-form LS for (a, c) at fixed lambda; returns RSS. Falls back to the
// constant model when the normal equations are singular (e.g. lambda = 0
// makes a and c collinear).
double solve_at_lambda(const std::vector<double>& xs, const std::vector<double>& ys,
                       double lambda, double& a, double& c) {
    const std::size_t n = xs.size();
    double se = 0.0, see = 0.0, sy = 0.0, sey = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = std::exp(-lambda * xs[i]);
        se += e;
        see += e * e;
        sy += ys[i];
        sey += e * ys[i];
    }
    const double det = static_cast<double>(n) * see - se * se;
    if (std::abs(det) < 1e-12 * static_cast<double>(n) * see + 1e-300) {
        a = sy / static_cast<double>(n);
        c = 0.0;
    } else {
        a = (sy * see - se * sey) / det;
        c = (static_cast<double>(n) * sey - se * sy) / det;
    }
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ys[i] - a - c * std::exp(-lambda * xs[i]);
        rss += r * r;
    }
    return rss;
}

}  // namespace

DecayFit fit_decay(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 3)
        throw std::invalid_argument("decay fit needs >= 3 points");
    if (std::set<double>(xs.begin(), xs.end()).size() != xs.size())
        throw std::invalid_argument("decay fit needs distinct x values");

    const auto [y_min, y_max] = std::minmax_element(ys.begin(), ys.end());
    DecayFit fit;
    if (*y_max - *y_min < 1e-15) {
        fit.a = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
        fit.c = 0.0;
        fit.lambda = 0.0;
        for (double y : ys) fit.rss += (y - fit.a) * (y - fit.a);
        return fit;
    }

    // Golden-section search over lambda in [0, 0.1], tolerance 1e-7.
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = 0.0, hi = 0.1;
    double a = 0.0, c = 0.0;
    double x1 = hi - phi * (hi - lo);
    double x2 = lo + phi * (hi - lo);
    double f1 = solve_at_lambda(xs, ys, x1, a, c);
    double f2 = solve_at_lambda(xs, ys, x2, a, c);
    while (hi - lo > 1e-7) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = solve_at_lambda(xs, ys, x1, a, c);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = solve_at_lambda(xs, ys, x2, a, c);
        }
    }
    fit.lambda = 0.5 * (lo + hi);
    fit.rss = solve_at_lambda(xs, ys, fit.lambda, fit.a, fit.c);

    // Keep whichever of the candidates {fit, constant} has the lower RSS so
    // the fit never loses to the best constant model.
    double ca = 0.0, cc = 0.0;
    const double const_rss = solve_at_lambda(xs, ys, 0.0, ca, cc);
    if (const_rss < fit.rss) {
        fit.a = ca;
        fit.c = cc;
        fit.lambda = 0.0;
        fit.rss = const_rss;
    }
    return fit;
}

}  // namespace locpriv
