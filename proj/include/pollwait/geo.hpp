#pragma once

#include <vector>

namespace pollwait::geo {

constexpr double kEarthRadiusM = 6371000.0;
constexpr double kPi = 3.14159265358979323846;

struct GeoPoint {
    double lat = 0.0; // degrees, WGS-84
    double lon = 0.0;

    bool valid() const { return lat >= -90.0 && lat <= 90.0 && lon >= -180.0 && lon <= 180.0; }
};

// Convex polygon, vertices counter-clockwise. Built by convex_hull().
struct Footprint {
    std::vector<GeoPoint> vertices;
};

// Local planar coordinates (meters east/north of a reference point).
struct LocalXY {
    double x = 0.0;
    double y = 0.0;
};

// Equirectangular projection about `ref`; adequate at building scale.
LocalXY to_local(const GeoPoint& ref, const GeoPoint& p);
GeoPoint from_local(const GeoPoint& ref, const LocalXY& xy);

// Great-circle distance on a sphere of radius kEarthRadiusM.
double haversine_m(const GeoPoint& a, const GeoPoint& b);

// Throws DegenerateGeometry if fewer than 3 distinct points or all collinear.
Footprint convex_hull(const std::vector<GeoPoint>& points);

// Inclusive membership: boundary counts as inside.
bool contains(const Footprint& fp, const GeoPoint& p);

bool within_radius(const GeoPoint& center, const GeoPoint& p, double r_m);

GeoPoint centroid(const std::vector<GeoPoint>& points);

// Displace a point by meters east/north. Used by the simulator.
GeoPoint offset_m(const GeoPoint& origin, double east_m, double north_m);

} // namespace pollwait::geo
