#include "pollwait/radiusscan.hpp"

#include "pollwait/csvio.hpp"
#include "pollwait/error.hpp"
#include "pollwait/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace pollwait::radiusscan {

namespace {

// Per device and local day, distance of the closest ping-to-centroid
// approach (capped at the index radius).
std::map<std::pair<int32_t, Day>, double> min_approach(const Dataset& ds,
                                                       const PlaceIndex& index,
                                                       const StudyCalendar& cal, int threads) {
    size_t n_dev = ds.device_names.size();
    auto chunks = make_chunks(n_dev);
    std::vector<std::map<std::pair<int32_t, Day>, double>> partial(chunks.size());
    parallel_chunks(n_dev, threads, [&](const ChunkRange& c) {
        auto& acc = partial[c.index];
        std::vector<size_t> cand;
        for (size_t d = c.begin; d < c.end; ++d) {
            auto [begin, end] = ds.device_ranges[d];
            for (size_t i = begin; i < end; ++i) {
                const auto& ping = ds.pings[i];
                index.candidates(ping.loc, cand);
                for (size_t pi : cand) {
                    double dist = geo::haversine_m(ds.places[pi].centroid, ping.loc);
                    if (dist > index.radius_m()) continue;
                    Day day = timeutil::local_day(ping.t, cal.utc_offset(ds.places[pi].state));
                    auto key = std::make_pair(ping.device, day);
                    auto it = acc.find(key);
                    if (it == acc.end())
                        acc.emplace(key, dist);
                    else
                        it->second = std::min(it->second, dist);
                }
            }
        }
    });
    std::map<std::pair<int32_t, Day>, double> merged;
    for (const auto& p : partial)
        for (const auto& [k, v] : p) {
            auto it = merged.find(k);
            if (it == merged.end())
                merged.emplace(k, v);
            else
                it->second = std::min(it->second, v);
        }
    return merged;
}

} // namespace

int64_t unique_devices(const Dataset& ds, const PlaceIndex& index, double r_m, Day day,
                       const StudyCalendar& cal) {
    auto approach = min_approach(ds, index, cal, 1);
    int64_t count = 0;
    for (const auto& [k, dist] : approach)
        if (k.second == day && dist <= r_m) ++count;
    return count;
}

DifferentialCurve differential_curve(const Dataset& ds, const std::vector<double>& radii_m,
                                     Day target_day, const std::vector<Day>& other_days,
                                     const StudyCalendar& cal, int threads) {
    if (radii_m.empty()) throw Error("differential_curve: empty radius list");
    if (other_days.empty()) throw Error("differential_curve: empty other-day list");
    for (size_t i = 1; i < radii_m.size(); ++i)
        if (radii_m[i] <= radii_m[i - 1])
            throw Error("differential_curve: radii must be strictly ascending");

    PlaceIndex index(ds.places, radii_m.back());
    auto approach = min_approach(ds, index, cal, threads);

    DifferentialCurve curve;
    curve.radii_m = radii_m;
    curve.election_day_counts.assign(radii_m.size(), 0.0);
    curve.other_day_mean_counts.assign(radii_m.size(), 0.0);
    curve.diff.assign(radii_m.size(), 0.0);

    std::map<Day, std::vector<int64_t>> per_day; // counts per radius
    for (const auto& [k, dist] : approach) {
        auto& counts = per_day[k.second];
        if (counts.empty()) counts.assign(radii_m.size(), 0);
        for (size_t r = 0; r < radii_m.size(); ++r)
            if (dist <= radii_m[r]) ++counts[r];
    }

    for (size_t r = 0; r < radii_m.size(); ++r) {
        auto it = per_day.find(target_day);
        curve.election_day_counts[r] = it == per_day.end() ? 0.0 : double(it->second[r]);
        double sum = 0.0;
        for (Day d : other_days) {
            auto jt = per_day.find(d);
            sum += jt == per_day.end() ? 0.0 : double(jt->second[r]);
        }
        curve.other_day_mean_counts[r] = sum / double(other_days.size());
        curve.diff[r] = curve.election_day_counts[r] - curve.other_day_mean_counts[r];
    }
    return curve;
}

RadiusChoice select_radius(const DifferentialCurve& curve, double gain_threshold) {
    if (curve.radii_m.size() < 3) throw Error("select_radius: need at least 3 curve points");
    bool any_positive = std::any_of(curve.diff.begin(), curve.diff.end(),
                                    [](double d) { return d > 0.0; });
    if (!any_positive) throw NonPositiveCurve("select_radius: differential curve never positive");

    for (size_t k = 0; k + 1 < curve.radii_m.size(); ++k) {
        if (curve.diff[k] <= 0.0) continue;
        double gain = (curve.diff[k + 1] - curve.diff[k]) / curve.diff[k];
        if (gain < gain_threshold) return {curve.radii_m[k], false};
    }
    return {curve.radii_m.back(), true};
}

void write_radius_scan_csv(const std::string& path, const DifferentialCurve& curve) {
    csv::Writer w(path);
    w.row({"radius_m", "count_target", "mean_count_other", "diff"});
    for (size_t r = 0; r < curve.radii_m.size(); ++r)
        w.row({csv::fmt(curve.radii_m[r]), csv::fmt(curve.election_day_counts[r]),
               csv::fmt(curve.other_day_mean_counts[r]), csv::fmt(curve.diff[r])});
}

} // namespace pollwait::radiusscan
