#include "pollwait/placeindex.hpp"

#include <algorithm>
#include <cmath>

namespace pollwait {

namespace {
constexpr double kMetersPerDegLat = 111320.0;
}

PlaceIndex::PlaceIndex(const std::vector<ingest::PollingPlace>& places, double radius_m)
    : radius_m_(radius_m) {
    // Cell edge >= search radius so a 3x3 neighborhood always covers it.
    // Longitude shrink is bounded at 60 degrees latitude; beyond that the
    // neighborhood is still conservative because cells only get wider in
    // meters-per-cell terms. Study geography is CONUS-scale.
    double edge_m = std::max(radius_m, 50.0) * 1.2;
    cell_deg_lat_ = edge_m / kMetersPerDegLat;
    cell_deg_lon_ = edge_m / (kMetersPerDegLat * 0.5);
    for (size_t i = 0; i < places.size(); ++i) {
        int64_t k = key(cell_lat(places[i].centroid.lat), cell_lon(places[i].centroid.lon));
        grid_[k].push_back(i);
    }
}

int64_t PlaceIndex::cell_lat(double lat) const {
    return int64_t(std::floor(lat / cell_deg_lat_));
}

int64_t PlaceIndex::cell_lon(double lon) const {
    return int64_t(std::floor(lon / cell_deg_lon_));
}

void PlaceIndex::candidates(const geo::GeoPoint& p, std::vector<size_t>& out) const {
    out.clear();
    int64_t ci = cell_lat(p.lat), cj = cell_lon(p.lon);
    for (int64_t di = -1; di <= 1; ++di) {
        for (int64_t dj = -1; dj <= 1; ++dj) {
            auto it = grid_.find(key(ci + di, cj + dj));
            if (it == grid_.end()) continue;
            out.insert(out.end(), it->second.begin(), it->second.end());
        }
    }
    std::sort(out.begin(), out.end());
}

} // namespace pollwait
