#include "locpriv/geo.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace locpriv {

namespace {
constexpr double kDegToRad = std::numbers::pi / 180.0;
}

void validate(GeoPoint p) {
    if (!(p.lat >= -90.0 && p.lat <= 90.0))
        throw std::invalid_argument("latitude out of range: " + std::to_string(p.lat));
    if (!(p.lon >= -180.0 && p.lon <= 180.0))
        throw std::invalid_argument("longitude out of range: " + std::to_string(p.lon));
}

Projection::Projection(GeoPoint anchor) : anchor_(anchor) {
    validate(anchor);
    cos_lat_ = std::cos(anchor.lat * kDegToRad);
}

LocalPoint Projection::to_local(GeoPoint p) const {
    validate(p);
    const double x = kEarthRadiusM * (p.lon - anchor_.lon) * kDegToRad * cos_lat_;
    const double y = kEarthRadiusM * (p.lat - anchor_.lat) * kDegToRad;
    return {x, y};
}

GeoPoint Projection::to_geo(LocalPoint p) const {
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
        throw std::invalid_argument("non-finite local coordinates");
    const double lat = anchor_.lat + p.y / (kEarthRadiusM * kDegToRad);
    const double lon = anchor_.lon + p.x / (kEarthRadiusM * kDegToRad * cos_lat_);
    return {lat, lon};
}

LocalPoint project(GeoPoint anchor, GeoPoint p) {
    return Projection(anchor).to_local(p);
}

GeoPoint unproject(GeoPoint anchor, LocalPoint p) {
    return Projection(anchor).to_geo(p);
}

double euclidean(LocalPoint a, LocalPoint b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return std::sqrt(dx * dx + dy * dy);
}

GeoPoint centroid(const std::vector<GeoPoint>& pts) {
    if (pts.empty()) throw std::invalid_argument("centroid of empty point set");
    double lat = 0.0, lon = 0.0;
    for (const auto& p : pts) {
        lat += p.lat;
        lon += p.lon;
    }
    const double n = static_cast<double>(pts.size());
    return {lat / n, lon / n};
}

}  // namespace locpriv
