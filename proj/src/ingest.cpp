#include "pollwait/ingest.hpp"

#include "pollwait/csvio.hpp"
#include "pollwait/error.hpp"

#include <algorithm>
#include <cstdlib>

namespace pollwait::ingest {

int StudyCalendar::utc_offset(const std::string& state) const {
    auto it = utc_offset_hours.find(state);
    if (it != utc_offset_hours.end()) return it->second;
    it = utc_offset_hours.find("");
    return it != utc_offset_hours.end() ? it->second : 0;
}

int StudyCalendar::open(const std::string& state) const {
    auto it = open_hour.find(state);
    if (it != open_hour.end()) return it->second;
    it = open_hour.find("");
    return it != open_hour.end() ? it->second : 7;
}

int StudyCalendar::close(const std::string& state) const {
    auto it = close_hour.find(state);
    if (it != close_hour.end()) return it->second;
    it = close_hour.find("");
    return it != close_hour.end() ? it->second : 20;
}

std::vector<Day> StudyCalendar::all_days() const {
    std::vector<Day> days(pre_window);
    days.push_back(target_day);
    days.insert(days.end(), post_window.begin(), post_window.end());
    std::sort(days.begin(), days.end());
    return days;
}

StudyCalendar StudyCalendar::from_config(const Config& cfg) {
    StudyCalendar cal;
    cal.target_day = timeutil::parse_date(cfg.get_str("study.target_day", "2016-11-08"));
    int pre = cfg.get_int("study.pre_days", 7);
    int post = cfg.get_int("study.post_days", 7);
    for (int i = pre; i >= 1; --i) cal.pre_window.push_back(cal.target_day - i);
    for (int i = 1; i <= post; ++i) cal.post_window.push_back(cal.target_day + i);

    cal.utc_offset_hours[""] = cfg.get_int("study.utc_offset", 0);
    cal.open_hour[""] = cfg.get_int("study.open_hour", 7);
    cal.close_hour[""] = cfg.get_int("study.close_hour", 20);
    for (const auto& [k, v] : cfg.section("study.utc_offset"))
        cal.utc_offset_hours[k] = std::atoi(v.c_str());
    for (const auto& [k, v] : cfg.section("study.open_hour"))
        cal.open_hour[k] = std::atoi(v.c_str());
    for (const auto& [k, v] : cfg.section("study.close_hour"))
        cal.close_hour[k] = std::atoi(v.c_str());
    return cal;
}

StudyCalendar StudyCalendar::shifted_to(Day placebo_day) const {
    StudyCalendar cal = *this;
    Day shift = placebo_day - target_day;
    cal.target_day = placebo_day;
    for (auto& d : cal.pre_window) d += shift;
    for (auto& d : cal.post_window) d += shift;
    return cal;
}

int32_t Dataset::intern_device(const std::string& name) {
    auto it = device_index.find(name);
    if (it != device_index.end()) return it->second;
    int32_t id = int32_t(device_names.size());
    device_names.push_back(name);
    device_index.emplace(name, id);
    return id;
}

void Dataset::finalize_pings() {
    std::sort(pings.begin(), pings.end(), [](const PingRecord& a, const PingRecord& b) {
        return a.device < b.device || (a.device == b.device && a.t < b.t);
    });
    device_ranges.assign(device_names.size(), {0, 0});
    size_t i = 0;
    while (i < pings.size()) {
        size_t j = i;
        while (j < pings.size() && pings[j].device == pings[i].device) ++j;
        device_ranges[size_t(pings[i].device)] = {i, j};
        i = j;
    }
}

namespace {

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end && *end == '\0';
}

} // namespace

void load_pings(const std::string& path, Dataset& ds) {
    csv::Reader rd(path);
    rd.require_header({"device_id", "timestamp_utc", "lat", "lon"}, "pings");
    std::vector<std::string> f;
    while (rd.next(f)) {
        ++ds.ping_stats.rows_in;
        if (f.size() != 4 || f[0].empty()) {
            ++ds.ping_stats.rows_skipped;
            continue;
        }
        PingRecord rec;
        double lat, lon;
        try {
            rec.t = timeutil::parse_timestamp(f[1]);
        } catch (const Error&) {
            ++ds.ping_stats.rows_skipped;
            continue;
        }
        if (!parse_double(f[2], lat) || !parse_double(f[3], lon)) {
            ++ds.ping_stats.rows_skipped;
            continue;
        }
        rec.loc = {lat, lon};
        if (!rec.loc.valid()) {
            ++ds.ping_stats.rows_skipped;
            continue;
        }
        rec.device = ds.intern_device(f[0]);
        ds.pings.push_back(rec);
        ++ds.ping_stats.rows_loaded;
    }
    ds.finalize_pings();
}

void load_places(const std::string& path, const std::string& footprints_path, Dataset& ds) {
    csv::Reader rd(path);
    rd.require_header(
        {"place_id", "lat", "lon", "state", "county", "block_group", "registered_voters"},
        "places");
    std::vector<std::string> f;
    while (rd.next(f)) {
        ++ds.place_stats.rows_in;
        if (f.size() != 7 || f[0].empty()) {
            ++ds.place_stats.rows_skipped;
            continue;
        }
        if (ds.place_index.count(f[0])) throw DuplicateKey("duplicate place_id: " + f[0]);
        PollingPlace p;
        p.place_id = f[0];
        double lat, lon;
        if (!parse_double(f[1], lat) || !parse_double(f[2], lon)) {
            ++ds.place_stats.rows_skipped;
            continue;
        }
        p.centroid = {lat, lon};
        if (!p.centroid.valid()) {
            ++ds.place_stats.rows_skipped;
            continue;
        }
        p.state = f[3];
        p.county = f[4];
        p.block_group = f[5];
        double rv;
        if (parse_double(f[6], rv)) p.registered_voters_k = rv;
        ds.place_index.emplace(p.place_id, ds.places.size());
        ds.places.push_back(std::move(p));
        ++ds.place_stats.rows_loaded;
    }

    if (!footprints_path.empty()) {
        csv::Reader fr(footprints_path);
        fr.require_header({"place_id", "vertex_index", "lat", "lon"}, "footprints");
        std::unordered_map<std::string, std::vector<std::pair<int, geo::GeoPoint>>> verts;
        while (fr.next(f)) {
            if (f.size() != 4) continue;
            double lat, lon;
            if (!parse_double(f[2], lat) || !parse_double(f[3], lon)) continue;
            verts[f[0]].emplace_back(std::atoi(f[1].c_str()), geo::GeoPoint{lat, lon});
        }
        for (auto& [pid, vs] : verts) {
            auto it = ds.place_index.find(pid);
            if (it == ds.place_index.end())
                throw JoinError("footprint references unknown place_id: " + pid);
            std::sort(vs.begin(), vs.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            std::vector<geo::GeoPoint> pts;
            pts.reserve(vs.size());
            for (const auto& [idx, gp] : vs) pts.push_back(gp);
            ds.places[it->second].footprint = geo::convex_hull(pts);
        }
    }
}

void load_blockgroups(const std::string& path, Dataset& ds) {
    csv::Reader rd(path);
    rd.require_header({"block_group", "frac_white", "frac_black", "frac_asian", "frac_hispanic",
                       "frac_other", "frac_poverty", "population_k", "pop_density_k"},
                      "blockgroups");
    std::vector<std::string> f;
    while (rd.next(f)) {
        ++ds.blockgroup_stats.rows_in;
        if (f.size() != 9 || f[0].empty()) {
            ++ds.blockgroup_stats.rows_skipped;
            continue;
        }
        BlockGroup bg;
        bg.id = f[0];
        double vals[8];
        bool ok = true;
        for (int i = 0; i < 8; ++i) ok = ok && parse_double(f[i + 1], vals[i]);
        if (!ok) {
            ++ds.blockgroup_stats.rows_skipped;
            continue;
        }
        bg.frac_white = vals[0];
        bg.frac_black = vals[1];
        bg.frac_asian = vals[2];
        bg.frac_hispanic = vals[3];
        bg.frac_other = vals[4];
        bg.frac_poverty = vals[5];
        bg.population_k = vals[6];
        bg.pop_density_k = vals[7];
        double race_sum =
            bg.frac_white + bg.frac_black + bg.frac_asian + bg.frac_hispanic + bg.frac_other;
        for (double frac : {bg.frac_white, bg.frac_black, bg.frac_asian, bg.frac_hispanic,
                            bg.frac_other, bg.frac_poverty})
            if (frac < 0.0 || frac > 1.0)
                throw InvariantViolation("block group " + bg.id + ": fraction out of [0,1]");
        if (race_sum < 0.99 || race_sum > 1.01)
            throw InvariantViolation("block group " + bg.id + ": race fractions sum to " +
                                     csv::fmt(race_sum));
        if (bg.population_k < 0.0)
            throw InvariantViolation("block group " + bg.id + ": negative population");
        if (ds.blockgroups.count(bg.id)) throw DuplicateKey("duplicate block_group: " + bg.id);
        ds.blockgroups.emplace(bg.id, std::move(bg));
        ++ds.blockgroup_stats.rows_loaded;
    }
}

JoinReport validate_join(const Dataset& ds) {
    JoinReport rep;
    for (const auto& p : ds.places) {
        if (ds.blockgroups.count(p.block_group))
            ++rep.matched;
        else
            rep.unmatched.push_back(p.place_id);
    }
    return rep;
}

} // namespace pollwait::ingest
