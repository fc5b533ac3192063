#pragma once

#include <vector>

namespace locpriv {

inline constexpr double kEarthRadiusM = 6371008.8;

// WGS84 degrees.
struct GeoPoint {
    double lat = 0.0;
    double lon = 0.0;
};

// Meters east/north of a region anchor.
struct LocalPoint {
    double x = 0.0;
    double y = 0.0;
};

// Throws std::invalid_argument when lat/lon are outside [-90,90]/[-180,180].
void validate(GeoPoint p);

// Local equirectangular projection around a fixed anchor. Sub-meter error at
// city scale (< 0.5 m within a 50 km disc), and exactly invertible up to
// floating-point rounding.
class Projection {
public:
    explicit Projection(GeoPoint anchor);

    LocalPoint to_local(GeoPoint p) const;
    GeoPoint to_geo(LocalPoint p) const;
    GeoPoint anchor() const { return anchor_; }

private:
    GeoPoint anchor_;
    double cos_lat_;
};

LocalPoint project(GeoPoint anchor, GeoPoint p);
GeoPoint unproject(GeoPoint anchor, LocalPoint p);

double euclidean(LocalPoint a, LocalPoint b);

GeoPoint centroid(const std::vector<GeoPoint>& pts);

}  // namespace locpriv
