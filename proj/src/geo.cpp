#include "pollwait/geo.hpp"

#include "pollwait/error.hpp"

#include <algorithm>
#include <cmath>

namespace pollwait::geo {

namespace {

double deg2rad(double d) { return d * kPi / 180.0; }

double cross(const LocalXY& o, const LocalXY& a, const LocalXY& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

} // namespace

LocalXY to_local(const GeoPoint& ref, const GeoPoint& p) {
    double coslat = std::cos(deg2rad(ref.lat));
    return {deg2rad(p.lon - ref.lon) * coslat * kEarthRadiusM,
            deg2rad(p.lat - ref.lat) * kEarthRadiusM};
}

GeoPoint from_local(const GeoPoint& ref, const LocalXY& xy) {
    double coslat = std::cos(deg2rad(ref.lat));
    return {ref.lat + xy.y / kEarthRadiusM * 180.0 / kPi,
            ref.lon + xy.x / (kEarthRadiusM * coslat) * 180.0 / kPi};
}

double haversine_m(const GeoPoint& a, const GeoPoint& b) {
    double lat1 = deg2rad(a.lat), lat2 = deg2rad(b.lat);
    double dlat = lat2 - lat1;
    double dlon = deg2rad(b.lon - a.lon);
    double s1 = std::sin(dlat / 2.0), s2 = std::sin(dlon / 2.0);
    double h = s1 * s1 + std::cos(lat1) * std::cos(lat2) * s2 * s2;
    h = std::min(1.0, std::max(0.0, h));
    return 2.0 * kEarthRadiusM * std::asin(std::sqrt(h));
}

GeoPoint centroid(const std::vector<GeoPoint>& points) {
    double lat = 0.0, lon = 0.0;
    for (const auto& p : points) {
        lat += p.lat;
        lon += p.lon;
    }
    size_t n = points.empty() ? 1 : points.size();
    return {lat / double(n), lon / double(n)};
}

Footprint convex_hull(const std::vector<GeoPoint>& points) {
    if (points.size() < 3) throw DegenerateGeometry("convex_hull: need at least 3 points");
    GeoPoint ref = centroid(points);

    std::vector<LocalXY> pts;
    pts.reserve(points.size());
    for (const auto& p : points) pts.push_back(to_local(ref, p));

    std::sort(pts.begin(), pts.end(), [](const LocalXY& a, const LocalXY& b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const LocalXY& a, const LocalXY& b) {
                              return a.x == b.x && a.y == b.y;
                          }),
              pts.end());
    if (pts.size() < 3) throw DegenerateGeometry("convex_hull: fewer than 3 distinct points");

    // Andrew's monotone chain; strict turns only, so collinear interior
    // points never become vertices.
    size_t n = pts.size();
    std::vector<LocalXY> hull(2 * n);
    size_t k = 0;
    for (size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    size_t lower = k + 1;
    for (size_t i = n - 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    if (hull.size() < 3) throw DegenerateGeometry("convex_hull: points are collinear");

    Footprint fp;
    fp.vertices.reserve(hull.size());
    for (const auto& xy : hull) fp.vertices.push_back(from_local(ref, xy));
    return fp;
}

bool contains(const Footprint& fp, const GeoPoint& p) {
    if (fp.vertices.size() < 3) return false;
    GeoPoint ref = centroid(fp.vertices);
    LocalXY q = to_local(ref, p);
    size_t n = fp.vertices.size();
    // CCW polygon: inside iff q is on or left of every edge. The tolerance
    // (m^2) absorbs projection round-trip error for boundary points.
    const double eps = 1e-6;
    for (size_t i = 0; i < n; ++i) {
        LocalXY a = to_local(ref, fp.vertices[i]);
        LocalXY b = to_local(ref, fp.vertices[(i + 1) % n]);
        if (cross(a, b, q) < -eps) return false;
    }
    return true;
}

bool within_radius(const GeoPoint& center, const GeoPoint& p, double r_m) {
    return haversine_m(center, p) <= r_m;
}

GeoPoint offset_m(const GeoPoint& origin, double east_m, double north_m) {
    return from_local(origin, {east_m, north_m});
}

} // namespace pollwait::geo
