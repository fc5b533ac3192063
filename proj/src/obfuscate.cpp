#include "locpriv/obfuscate.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "locpriv/parallel.hpp"

namespace locpriv {

void ObfuscationPolicy::validate() const {
    switch (mode) {
        case Mode::none:
            break;
        case Mode::fixed:
            if (!(radius_m >= 0.0))
                throw std::invalid_argument("fixed obfuscation requires r >= 0");
            break;
        case Mode::context_aware:
            if (m < 1)
                throw std::invalid_argument("context-aware obfuscation requires m >= 1");
            break;
    }
}

namespace {

LocalPoint uniform_on_disc(LocalPoint center, double r, Rng& rng) {
    const double theta = 2.0 * std::numbers::pi * rng.uniform();
    const double d = r * std::sqrt(rng.uniform());
    return {center.x + d * std::cos(theta), center.y + d * std::sin(theta)};
}

}  // namespace

LocalPoint obfuscate_fixed(LocalPoint p, double r, Rng& rng) {
    if (!(r >= 0.0)) throw std::invalid_argument("obfuscate_fixed requires r >= 0");
    if (r == 0.0) return p;
    return uniform_on_disc(p, r, rng);
}

ContextObfuscation obfuscate_context_aware(LocalPoint p,
                                           const SpatialIndex& pois, int m,
                                           Rng& rng) {
    if (m < 1) throw std::invalid_argument("context-aware obfuscation requires m >= 1");
    if (static_cast<std::size_t>(m) > pois.size())
        throw std::invalid_argument("fewer POIs than m");
    const double r_used = pois.kth_distance(p, m);
    return {uniform_on_disc(p, r_used, rng), r_used};
}

namespace {

ObfuscationResult obfuscate_impl(const std::vector<LocalPoint>& points,
                                 const ObfuscationPolicy& policy,
                                 const SpatialIndex* pois, bool parallel) {
    policy.validate();
    ObfuscationResult result;
    result.points.resize(points.size());
    const bool context = policy.mode == ObfuscationPolicy::Mode::context_aware;
    if (context) {
        if (!pois) throw std::invalid_argument("context-aware obfuscation needs POIs");
        if (static_cast<std::size_t>(policy.m) > pois->size())
            throw std::invalid_argument("fewer POIs than m");
        result.r_used.resize(points.size());
    }

    const std::int64_t n = static_cast<std::int64_t>(points.size());
#pragma omp parallel for schedule(static) if (parallel)
    for (std::int64_t i = 0; i < n; ++i) {
        Rng rng = substream(policy.seed, {0x0bfULL, static_cast<std::uint64_t>(i)});
        switch (policy.mode) {
            case ObfuscationPolicy::Mode::none:
                result.points[i] = points[i];
                break;
            case ObfuscationPolicy::Mode::fixed:
                result.points[i] = obfuscate_fixed(points[i], policy.radius_m, rng);
                break;
            case ObfuscationPolicy::Mode::context_aware: {
                const auto obf = obfuscate_context_aware(points[i], *pois, policy.m, rng);
                result.points[i] = obf.point;
                result.r_used[i] = obf.r_used;
                break;
            }
        }
    }
    if (context && n > 0) {
        double sum = 0.0;
        for (double r : result.r_used) sum += r;
        result.mean_r_used = sum / static_cast<double>(n);
    }
    return result;
}

}  // namespace

ObfuscationResult obfuscate_samples(const std::vector<LocalPoint>& points,
                                    const ObfuscationPolicy& policy,
                                    const SpatialIndex* pois) {
    return obfuscate_impl(points, policy, pois, true);
}

ObfuscationResult obfuscate_samples_serial(const std::vector<LocalPoint>& points,
                                           const ObfuscationPolicy& policy,
                                           const SpatialIndex* pois) {
    return obfuscate_impl(points, policy, pois, false);
}

TunedM tune_m(const SpatialIndex& pois,
              const std::vector<LocalPoint>& sample_points,
              double target_mean_radius) {
    if (!(target_mean_radius > 0.0))
        throw std::invalid_argument("tune_m requires a positive target radius");
    if (sample_points.empty())
        throw std::invalid_argument("tune_m requires at least one sample point");

    const int n_pois = static_cast<int>(pois.size());
    const std::int64_t n = static_cast<std::int64_t>(sample_points.size());

    // Mean m-th-NN distance is non-decreasing in m; grow a knn horizon
    // geometrically until the mean reaches the target, then scan m. The
    // per-sample distances are materialized first and reduced serially so
    // the result does not depend on the thread count.
    int horizon = 1;
    for (;;) {
        horizon = std::min(horizon, n_pois);
        std::vector<double> dists(static_cast<std::size_t>(n) * horizon);
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < n; ++i) {
            const auto nb = pois.knn(sample_points[i], horizon);
            for (int m = 0; m < horizon; ++m)
                dists[static_cast<std::size_t>(i) * horizon + m] = nb[m].distance;
        }
        std::vector<double> sums(horizon, 0.0);
        for (std::int64_t i = 0; i < n; ++i)
            for (int m = 0; m < horizon; ++m)
                sums[m] += dists[static_cast<std::size_t>(i) * horizon + m];
        for (int m = 1; m <= horizon; ++m) {
            const double mean = sums[m - 1] / static_cast<double>(n);
            if (mean >= target_mean_radius) return {m, mean};
        }
        if (horizon == n_pois)
            return {n_pois, sums[horizon - 1] / static_cast<double>(n)};
        horizon *= 2;
    }
}

}  // namespace locpriv
