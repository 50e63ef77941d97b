#pragma once

#include "pollwait/spells.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pollwait::filters {

using ingest::Dataset;
using ingest::StudyCalendar;
using spells::DwellSpell;
using timeutil::Day;

struct FilterConfig {
    double min_upper_min = 1.0;
    double max_upper_min = 120.0;
    std::optional<double> min_upper_floor; // reasonable-values variants
    bool require_hull_ping = true;
    int consistency_hours = 12;
    int exclusion_pre_days = 7;
    int exclusion_post_days = 7;
    bool single_place = true;
    bool strict_cross_place = false; // exclusion window applies to any place

    static FilterConfig from_config(const Config& cfg);
};

struct AttritionStage {
    std::string name;
    int64_t devices_in = 0;
    int64_t devices_out = 0;
};

struct AttritionReport {
    std::vector<AttritionStage> stages;
};

struct FilterOutcome {
    std::vector<DwellSpell> survivors; // one spell per surviving device, target day
    AttritionReport report;
};

// The likely-voter chain, applied in order:
//   1. merged upper bound >= min_upper_min at exactly one place on the
//      target day (when single_place)
//   2. no dwell with upper > 1 min at that place (or any place when
//      strict_cross_place) during the exclusion windows
//   3. a ping inside the footprint hull during the spell
//   4. >= 1 ping in each of `consistency_hours` consecutive local clock
//      hours on the target day
//   5. upper <= max_upper_min, and >= min_upper_floor when set
FilterOutcome apply_filters(const std::vector<DwellSpell>& all_spells, const Dataset& ds,
                            const FilterConfig& cfg, const StudyCalendar& cal);

// Same chain with every date anchor shifted to `day`.
FilterOutcome placebo_sample(Day day, const std::vector<DwellSpell>& all_spells,
                             const Dataset& ds, const FilterConfig& cfg,
                             const StudyCalendar& cal);

void write_attrition_csv(const std::string& path, const AttritionReport& report);

} // namespace pollwait::filters
