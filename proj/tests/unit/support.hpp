#pragma once

// Test-only oracles, independent of the library implementations they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "locpriv/geo.hpp"
#include "locpriv/spatial_index.hpp"

namespace testsupport {

inline double haversine_m(locpriv::GeoPoint a, locpriv::GeoPoint b) {
    constexpr double deg = std::numbers::pi / 180.0;
    const double lat1 = a.lat * deg, lat2 = b.lat * deg;
    const double dlat = (b.lat - a.lat) * deg;
    const double dlon = (b.lon - a.lon) * deg;
    const double s = std::sin(dlat / 2) * std::sin(dlat / 2) +
                     std::cos(lat1) * std::cos(lat2) * std::sin(dlon / 2) *
                         std::sin(dlon / 2);
    return 2.0 * locpriv::kEarthRadiusM * std::asin(std::sqrt(s));
}

struct OracleHit {
    std::int64_t id;
    double distance;
};

// Plain linear scan with (distance, id) ordering; the reference for every
// index query in the tests.
inline std::vector<OracleHit> oracle_knn(
    const std::vector<locpriv::SpatialIndex::Entry>& points,
    locpriv::LocalPoint q, int k) {
    std::vector<OracleHit> all;
    for (const auto& e : points) {
        const double dx = e.point.x - q.x, dy = e.point.y - q.y;
        all.push_back({e.id, std::sqrt(dx * dx + dy * dy)});
    }
    std::sort(all.begin(), all.end(), [](const OracleHit& a, const OracleHit& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        return a.id < b.id;
    });
    if (static_cast<int>(all.size()) > k) all.resize(k);
    return all;
}

inline std::vector<OracleHit> oracle_radius(
    const std::vector<locpriv::SpatialIndex::Entry>& points,
    locpriv::LocalPoint q, double r) {
    std::vector<OracleHit> hits;
    for (const auto& e : points) {
        const double dx = e.point.x - q.x, dy = e.point.y - q.y;
        const double d2 = dx * dx + dy * dy;
        if (d2 <= r * r) hits.push_back({e.id, std::sqrt(d2)});
    }
    std::sort(hits.begin(), hits.end(), [](const OracleHit& a, const OracleHit& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        return a.id < b.id;
    });
    return hits;
}

}  // namespace testsupport
