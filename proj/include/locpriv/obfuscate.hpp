#pragma once

#include <cstdint>
#include <vector>

#include "locpriv/geo.hpp"
#include "locpriv/rng.hpp"
#include "locpriv/spatial_index.hpp"

namespace locpriv {

struct ObfuscationPolicy {
    enum class Mode { none, fixed, context_aware };
    Mode mode = Mode::none;
    double radius_m = 0.0;  // fixed mode
    int m = 0;              // context-aware mode
    std::uint64_t seed = 0;

    void validate() const;  // throws std::invalid_argument
};

// New point uniform over the closed disc of radius r around p. r = 0 is the
// identity and consumes no randomness.
LocalPoint obfuscate_fixed(LocalPoint p, double r, Rng& rng);

struct ContextObfuscation {
    LocalPoint point;
    double r_used = 0.0;  // distance to the m-th nearest POI
};
// Radius chosen per location so that at least m POIs lie within it.
ContextObfuscation obfuscate_context_aware(LocalPoint p,
                                           const SpatialIndex& pois, int m,
                                           Rng& rng);

struct ObfuscationResult {
    std::vector<LocalPoint> points;
    std::vector<double> r_used;  // empty unless context-aware
    double mean_r_used = 0.0;
};

// Applies the policy once per sample. Each sample draws from its own
// substream of (policy.seed, index), so the result is independent of
// iteration order and thread count. `pois` may be null unless the policy is
// context-aware.
ObfuscationResult obfuscate_samples(const std::vector<LocalPoint>& points,
                                    const ObfuscationPolicy& policy,
                                    const SpatialIndex* pois);
ObfuscationResult obfuscate_samples_serial(const std::vector<LocalPoint>& points,
                                           const ObfuscationPolicy& policy,
                                           const SpatialIndex* pois);

struct TunedM {
    int m = 1;
    double achieved_mean_radius = 0.0;
};
// Smallest m whose mean m-th-nearest-POI distance over the sample locations
// reaches the target radius. Returns |pois| (with its mean) when even the
// largest m falls short.
TunedM tune_m(const SpatialIndex& pois,
              const std::vector<LocalPoint>& sample_points,
              double target_mean_radius);

}  // namespace locpriv
