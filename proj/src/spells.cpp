#include "pollwait/spells.hpp"

#include "pollwait/csvio.hpp"
#include "pollwait/error.hpp"
#include "pollwait/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace pollwait::spells {

namespace {

constexpr double kHullFallbackM = 15.0;

struct OpenRun {
    DwellSpell spell;
};

bool ping_in_hull(const ingest::PollingPlace& place, const geo::GeoPoint& loc) {
    if (place.footprint) return geo::contains(*place.footprint, loc);
    return geo::haversine_m(place.centroid, loc) <= kHullFallbackM;
}

void extract_device(const Dataset& ds, const PlaceIndex& index, double radius_m,
                    const StudyCalendar& cal, int32_t device, std::vector<DwellSpell>& out) {
    auto [begin, end] = ds.device_ranges[size_t(device)];
    if (begin == end) return;

    // Open runs keyed by place index; places are spaced far apart so this
    // rarely holds more than one entry.
    std::vector<std::pair<size_t, DwellSpell>> open;
    std::vector<size_t> cand;
    std::vector<size_t> inside;

    Timestamp prev_t = 0;
    geo::GeoPoint prev_loc;
    bool has_prev = false;

    auto close_run = [&](size_t slot, std::optional<Timestamp> t_after) {
        DwellSpell& sp = open[slot].second;
        sp.t_out_after = t_after;
        sp.lower_min = double(sp.t_last_in - sp.t_first_in) / 60.0;
        if (sp.t_out_before && sp.t_out_after)
            sp.upper_min = double(*sp.t_out_after - *sp.t_out_before) / 60.0;
        out.push_back(sp);
        open.erase(open.begin() + std::ptrdiff_t(slot));
    };

    for (size_t i = begin; i < end; ++i) {
        const ingest::PingRecord& ping = ds.pings[i];
        if (has_prev && ping.t < prev_t)
            throw UnsortedInput("pings not time-sorted for device " +
                                ds.device_names[size_t(device)]);

        index.candidates(ping.loc, cand);
        inside.clear();
        for (size_t pi : cand)
            if (geo::haversine_m(ds.places[pi].centroid, ping.loc) <= radius_m)
                inside.push_back(pi);

        // Close any run whose place this ping has left, or whose local day
        // has rolled over.
        for (size_t s = open.size(); s-- > 0;) {
            size_t pi = open[s].first;
            bool still_inside = std::find(inside.begin(), inside.end(), pi) != inside.end();
            Day ping_day = timeutil::local_day(ping.t, cal.utc_offset(ds.places[pi].state));
            if (!still_inside) {
                close_run(s, ping_day == open[s].second.day
                                 ? std::optional<Timestamp>(ping.t)
                                 : std::nullopt);
            } else if (ping_day != open[s].second.day) {
                close_run(s, std::nullopt);
            }
        }

        for (size_t pi : inside) {
            const ingest::PollingPlace& place = ds.places[pi];
            int off = cal.utc_offset(place.state);
            Day day = timeutil::local_day(ping.t, off);
            auto it = std::find_if(open.begin(), open.end(),
                                   [pi](const auto& o) { return o.first == pi; });
            if (it != open.end()) {
                it->second.t_last_in = ping.t;
                it->second.hull_ping = it->second.hull_ping || ping_in_hull(place, ping.loc);
            } else {
                DwellSpell sp;
                sp.device = device;
                sp.place = int32_t(pi);
                sp.day = day;
                sp.t_first_in = sp.t_last_in = ping.t;
                sp.arrival_hour = timeutil::local_hour(ping.t, off);
                sp.hull_ping = ping_in_hull(place, ping.loc);
                if (has_prev && timeutil::local_day(prev_t, off) == day &&
                    geo::haversine_m(place.centroid, prev_loc) > radius_m)
                    sp.t_out_before = prev_t;
                open.emplace_back(pi, sp);
            }
        }

        prev_t = ping.t;
        prev_loc = ping.loc;
        has_prev = true;
    }
    while (!open.empty()) close_run(open.size() - 1, std::nullopt);
}

} // namespace

std::vector<DwellSpell> extract_spells(const Dataset& ds, const PlaceIndex& index,
                                       double radius_m, const StudyCalendar& cal, int threads) {
    size_t n_dev = ds.device_names.size();
    auto chunks = make_chunks(n_dev);
    std::vector<std::vector<DwellSpell>> partial(chunks.size());
    parallel_chunks(n_dev, threads, [&](const ChunkRange& c) {
        auto& out = partial[c.index];
        for (size_t d = c.begin; d < c.end; ++d)
            extract_device(ds, index, radius_m, cal, int32_t(d), out);
    });
    std::vector<DwellSpell> all;
    size_t total = 0;
    for (const auto& p : partial) total += p.size();
    all.reserve(total);
    for (auto& p : partial) all.insert(all.end(), p.begin(), p.end());
    return all;
}

double wait_time(const DwellSpell& s, double lambda) {
    if (lambda < 0.0 || lambda > 1.0) throw Error("wait_time: lambda outside [0,1]");
    if (!s.upper_min) {
        if (lambda > 0.0) throw MissingBound("wait_time: spell has no upper bound");
        return s.lower_min;
    }
    return lambda * *s.upper_min + (1.0 - lambda) * s.lower_min;
}

std::vector<DwellSpell> merge_same_place(const std::vector<DwellSpell>& group,
                                         int64_t* discarded) {
    if (group.empty()) return {};
    size_t best = 0;
    for (size_t i = 1; i < group.size(); ++i) {
        const auto& a = group[best];
        const auto& b = group[i];
        bool b_wins;
        if (a.upper_min.has_value() != b.upper_min.has_value())
            b_wins = b.upper_min.has_value();
        else if (a.upper_min.has_value())
            b_wins = *b.upper_min > *a.upper_min;
        else
            b_wins = b.lower_min > a.lower_min;
        if (b_wins) best = i;
    }
    if (discarded) *discarded += int64_t(group.size()) - 1;
    return {group[best]};
}

std::vector<DwellSpell> merge_all(std::vector<DwellSpell> spells, int64_t* discarded) {
    std::sort(spells.begin(), spells.end(), [](const DwellSpell& a, const DwellSpell& b) {
        if (a.device != b.device) return a.device < b.device;
        if (a.place != b.place) return a.place < b.place;
        if (a.day != b.day) return a.day < b.day;
        return a.t_first_in < b.t_first_in;
    });
    std::vector<DwellSpell> out;
    size_t i = 0;
    while (i < spells.size()) {
        size_t j = i;
        while (j < spells.size() && spells[j].device == spells[i].device &&
               spells[j].place == spells[i].place && spells[j].day == spells[i].day)
            ++j;
        std::vector<DwellSpell> group(spells.begin() + std::ptrdiff_t(i),
                                      spells.begin() + std::ptrdiff_t(j));
        auto merged = merge_same_place(group, discarded);
        out.insert(out.end(), merged.begin(), merged.end());
        i = j;
    }
    return out;
}

void write_spells_csv(const std::string& path, const std::vector<DwellSpell>& spells,
                      const Dataset& ds) {
    csv::Writer w(path);
    w.row({"device_id", "place_id", "day", "lower_min", "upper_min", "midpoint_min",
           "arrival_hour", "hull_ping"});
    for (const auto& s : spells) {
        std::string upper = s.upper_min ? csv::fmt(*s.upper_min) : "";
        std::string mid = s.upper_min ? csv::fmt(0.5 * (*s.upper_min + s.lower_min)) : "";
        w.row({ds.device_names[size_t(s.device)], ds.places[size_t(s.place)].place_id,
               timeutil::format_date(s.day), csv::fmt(s.lower_min), upper, mid,
               std::to_string(s.arrival_hour), s.hull_ping ? "1" : "0"});
    }
}

} // namespace pollwait::spells
