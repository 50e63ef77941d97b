#pragma once

#include "pollwait/config.hpp"
#include "pollwait/geo.hpp"
#include "pollwait/timeutil.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace pollwait::ingest {

using timeutil::Day;
using timeutil::Timestamp;

struct PingRecord {
    int32_t device = -1; // index into Dataset::device_names
    Timestamp t = 0;
    geo::GeoPoint loc;
};

struct PollingPlace {
    std::string place_id;
    geo::GeoPoint centroid;
    std::optional<geo::Footprint> footprint;
    std::string state;
    std::string county;
    std::string block_group;
    std::optional<double> registered_voters_k; // thousands
};

struct BlockGroup {
    std::string id;
    double frac_white = 0, frac_black = 0, frac_asian = 0, frac_hispanic = 0, frac_other = 0;
    double frac_poverty = 0;
    double population_k = 0;
    double pop_density_k = 0; // thousands per square mile
};

// Fixed per-state clock conventions for the study week. DST is folded into
// a constant UTC offset per state.
struct StudyCalendar {
    Day target_day = 0;
    std::vector<Day> pre_window;  // 7 days before target by default
    std::vector<Day> post_window; // 7 days after
    std::map<std::string, int> utc_offset_hours; // by state; "" key = default
    std::map<std::string, int> open_hour;        // local clock hour
    std::map<std::string, int> close_hour;

    int utc_offset(const std::string& state) const;
    int open(const std::string& state) const;
    int close(const std::string& state) const;
    std::vector<Day> all_days() const; // pre + target + post, ascending

    static StudyCalendar from_config(const Config& cfg);
    StudyCalendar shifted_to(Day placebo_day) const;
};

struct LoadStats {
    int64_t rows_in = 0;
    int64_t rows_loaded = 0;
    int64_t rows_skipped = 0;
};

struct JoinReport {
    int64_t matched = 0;
    std::vector<std::string> unmatched; // place ids with no block group
};

struct Dataset {
    std::vector<std::string> device_names;
    std::unordered_map<std::string, int32_t> device_index;
    std::vector<PingRecord> pings; // sorted by (device, t)
    std::vector<std::pair<size_t, size_t>> device_ranges; // [begin,end) per device

    std::vector<PollingPlace> places;
    std::unordered_map<std::string, size_t> place_index;
    std::unordered_map<std::string, BlockGroup> blockgroups;

    LoadStats ping_stats, place_stats, blockgroup_stats;

    int32_t intern_device(const std::string& name);
    // Sorts pings by (device, t) and rebuilds device_ranges.
    void finalize_pings();
};

void load_pings(const std::string& path, Dataset& ds);
void load_places(const std::string& path, const std::string& footprints_path, Dataset& ds);
void load_blockgroups(const std::string& path, Dataset& ds);
JoinReport validate_join(const Dataset& ds);

} // namespace pollwait::ingest
