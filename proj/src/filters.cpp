#include "pollwait/filters.hpp"

#include "pollwait/csvio.hpp"
#include "pollwait/error.hpp"

#include <algorithm>
#include <map>

namespace pollwait::filters {

FilterConfig FilterConfig::from_config(const Config& cfg) {
    FilterConfig fc;
    fc.min_upper_min = cfg.get_double("filter.min_upper_min", 1.0);
    fc.max_upper_min = cfg.get_double("filter.max_upper_min", 120.0);
    if (cfg.has("filter.min_upper_floor"))
        fc.min_upper_floor = cfg.get_double("filter.min_upper_floor", 0.0);
    fc.require_hull_ping = cfg.get_bool("filter.require_hull_ping", true);
    fc.consistency_hours = cfg.get_int("filter.consistency_hours", 12);
    fc.exclusion_pre_days = cfg.get_int("filter.exclusion_pre_days", 7);
    fc.exclusion_post_days = cfg.get_int("filter.exclusion_post_days", 7);
    fc.single_place = cfg.get_bool("filter.single_place", true);
    fc.strict_cross_place = cfg.get_bool("filter.strict_cross_place", false);
    if (fc.min_upper_min < 0.0 || fc.min_upper_min >= fc.max_upper_min)
        throw ConfigInvalid("filter: need 0 <= min_upper_min < max_upper_min");
    if (fc.consistency_hours < 1) throw ConfigInvalid("filter: consistency_hours >= 1");
    return fc;
}

namespace {

// Does the device post >=1 ping in each of `need` consecutive local clock
// hours on `day`? Local time follows the candidate place's state.
bool hourly_consistency(const Dataset& ds, int32_t device, Day day, int utc_offset, int need) {
    bool hour_seen[24] = {};
    auto [begin, end] = ds.device_ranges[size_t(device)];
    for (size_t i = begin; i < end; ++i) {
        const auto& p = ds.pings[i];
        if (timeutil::local_day(p.t, utc_offset) != day) continue;
        hour_seen[timeutil::local_hour(p.t, utc_offset)] = true;
    }
    int run = 0;
    for (int h = 0; h < 24; ++h) {
        run = hour_seen[h] ? run + 1 : 0;
        if (run >= need) return true;
    }
    return false;
}

} // namespace

FilterOutcome apply_filters(const std::vector<DwellSpell>& all_spells, const Dataset& ds,
                            const FilterConfig& cfg, const StudyCalendar& cal) {
    const Day target = cal.target_day;
    const Day excl_lo = target - cfg.exclusion_pre_days;
    const Day excl_hi = target + cfg.exclusion_post_days;

    int64_t discarded = 0;
    auto merged = spells::merge_all(all_spells, &discarded);

    // Per device: merged target-day spells, and exclusion-window dwell flags.
    struct DeviceState {
        std::vector<const DwellSpell*> target_spells;
        std::vector<int32_t> excluded_places; // places dwelled at in the window
    };
    std::map<int32_t, DeviceState> devices;
    for (const auto& s : merged) {
        if (s.day == target) {
            devices[s.device].target_spells.push_back(&s);
        } else if (s.day >= excl_lo && s.day <= excl_hi) {
            if (s.upper_min && *s.upper_min > 1.0)
                devices[s.device].excluded_places.push_back(s.place);
        }
    }

    struct Candidate {
        int32_t device;
        const DwellSpell* spell;
    };
    std::vector<Candidate> pool;
    AttritionReport report;

    // Stage 1: upper >= min at exactly one place on the target day.
    int64_t entering = 0;
    for (const auto& [dev, st] : devices)
        if (!st.target_spells.empty()) ++entering;
    for (const auto& [dev, st] : devices) {
        std::vector<const DwellSpell*> eligible;
        for (const auto* s : st.target_spells)
            if (s->upper_min && *s->upper_min >= cfg.min_upper_min) eligible.push_back(s);
        if (eligible.empty()) continue;
        if (cfg.single_place && eligible.size() != 1) continue;
        const DwellSpell* pick = eligible[0];
        for (const auto* s : eligible)
            if (*s->upper_min > *pick->upper_min) pick = s;
        pool.push_back({dev, pick});
    }
    report.stages.push_back({"upper_bound_single_place", entering, int64_t(pool.size())});

    // Stage 2: no dwell at that place (or anywhere, strict variant) in the
    // week before or after.
    {
        std::vector<Candidate> keep;
        for (const auto& c : pool) {
            const auto& excl = devices[c.device].excluded_places;
            bool hit = cfg.strict_cross_place
                           ? !excl.empty()
                           : std::find(excl.begin(), excl.end(), c.spell->place) != excl.end();
            if (!hit) keep.push_back(c);
        }
        report.stages.push_back({"exclusion_window", int64_t(pool.size()), int64_t(keep.size())});
        pool = std::move(keep);
    }

    // Stage 3: at least one ping inside the building hull.
    if (cfg.require_hull_ping) {
        std::vector<Candidate> keep;
        for (const auto& c : pool)
            if (c.spell->hull_ping) keep.push_back(c);
        report.stages.push_back({"hull_ping", int64_t(pool.size()), int64_t(keep.size())});
        pool = std::move(keep);
    } else {
        report.stages.push_back({"hull_ping", int64_t(pool.size()), int64_t(pool.size())});
    }

    // Stage 4: consistent pings across the day.
    {
        std::vector<Candidate> keep;
        for (const auto& c : pool) {
            int off = cal.utc_offset(ds.places[size_t(c.spell->place)].state);
            if (hourly_consistency(ds, c.device, target, off, cfg.consistency_hours))
                keep.push_back(c);
        }
        report.stages.push_back(
            {"hourly_consistency", int64_t(pool.size()), int64_t(keep.size())});
        pool = std::move(keep);
    }

    // Stage 5: reasonable values.
    {
        std::vector<Candidate> keep;
        for (const auto& c : pool) {
            double upper = *c.spell->upper_min;
            if (upper > cfg.max_upper_min) continue;
            if (cfg.min_upper_floor && upper < *cfg.min_upper_floor) continue;
            keep.push_back(c);
        }
        report.stages.push_back(
            {"reasonable_values", int64_t(pool.size()), int64_t(keep.size())});
        pool = std::move(keep);
    }

    FilterOutcome out;
    out.report = std::move(report);
    out.survivors.reserve(pool.size());
    for (const auto& c : pool) out.survivors.push_back(*c.spell);
    return out;
}

FilterOutcome placebo_sample(Day day, const std::vector<DwellSpell>& all_spells,
                             const Dataset& ds, const FilterConfig& cfg,
                             const StudyCalendar& cal) {
    return apply_filters(all_spells, ds, cfg, cal.shifted_to(day));
}

void write_attrition_csv(const std::string& path, const AttritionReport& report) {
    csv::Writer w(path);
    w.row({"stage", "devices_in", "devices_out"});
    for (const auto& s : report.stages)
        w.row({s.name, std::to_string(s.devices_in), std::to_string(s.devices_out)});
}

} // namespace pollwait::filters
