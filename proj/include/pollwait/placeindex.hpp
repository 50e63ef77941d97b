#pragma once

#include "pollwait/geo.hpp"
#include "pollwait/ingest.hpp"

#include <cstdint>
#include <unordered_map>
#include <vector>

namespace pollwait {

// Uniform lat/lon grid over place centroids. candidates() returns every
// place whose centroid could be within `radius_m` of the query point; the
// caller still applies the exact haversine test.
class PlaceIndex {
public:
    PlaceIndex(const std::vector<ingest::PollingPlace>& places, double radius_m);

    // Place indices (ascending) within the 3x3 cell neighborhood of p.
    void candidates(const geo::GeoPoint& p, std::vector<size_t>& out) const;

    double radius_m() const { return radius_m_; }

private:
    int64_t key(int64_t ci, int64_t cj) const { return ci * 4000003 + cj; }
    int64_t cell_lat(double lat) const;
    int64_t cell_lon(double lon) const;

    double radius_m_;
    double cell_deg_lat_;
    double cell_deg_lon_;
    std::unordered_map<int64_t, std::vector<size_t>> grid_;
};

} // namespace pollwait
