#pragma once

#include "pollwait/ingest.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace testutil {

namespace pw = pollwait;

inline pw::ingest::StudyCalendar make_cal(pw::timeutil::Day target, int pre = 7, int post = 7,
                                          int offset = 0, int open = 7, int close = 20) {
    pw::ingest::StudyCalendar cal;
    cal.target_day = target;
    for (int i = pre; i >= 1; --i) cal.pre_window.push_back(target - i);
    for (int i = 1; i <= post; ++i) cal.post_window.push_back(target + i);
    cal.utc_offset_hours[""] = offset;
    cal.open_hour[""] = open;
    cal.close_hour[""] = close;
    return cal;
}

// Place at `loc` with a square footprint of the given half-size.
inline void add_place(pw::ingest::Dataset& ds, const std::string& id, pw::geo::GeoPoint loc,
                      double half_m = 12.0, const std::string& state = "S0",
                      const std::string& county = "S0_C0") {
    pw::ingest::PollingPlace p;
    p.place_id = id;
    p.centroid = loc;
    p.footprint = pw::geo::convex_hull({pw::geo::offset_m(loc, -half_m, -half_m),
                                        pw::geo::offset_m(loc, half_m, -half_m),
                                        pw::geo::offset_m(loc, half_m, half_m),
                                        pw::geo::offset_m(loc, -half_m, half_m)});
    p.state = state;
    p.county = county;
    p.block_group = "bg_" + id;
    ds.place_index.emplace(p.place_id, ds.places.size());
    ds.places.push_back(p);
    pw::ingest::BlockGroup bg;
    bg.id = "bg_" + id;
    bg.frac_white = 0.8;
    bg.frac_black = 0.1;
    bg.frac_asian = 0.04;
    bg.frac_hispanic = 0.04;
    bg.frac_other = 0.02;
    bg.frac_poverty = 0.1;
    bg.population_k = 1.5;
    bg.pop_density_k = 2.0;
    ds.blockgroups.emplace(bg.id, bg);
}

inline void add_ping(pw::ingest::Dataset& ds, const std::string& dev, int64_t t,
                     pw::geo::GeoPoint loc) {
    ds.pings.push_back({ds.intern_device(dev), t, loc});
}

// Unique scratch directory under the build tree.
class TmpDir {
public:
    explicit TmpDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("pollwait_test_" + tag + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TmpDir() { std::filesystem::remove_all(path_); }
    std::string file(const std::string& name) const { return (path_ / name).string(); }
    std::string dir() const { return path_.string(); }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

} // namespace testutil
