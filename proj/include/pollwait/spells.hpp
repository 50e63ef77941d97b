#pragma once

#include "pollwait/ingest.hpp"
#include "pollwait/placeindex.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pollwait::spells {

using ingest::Dataset;
using ingest::StudyCalendar;
using timeutil::Day;
using timeutil::Timestamp;

// One device's maximal in-radius run at one place on one local day.
// lower bound: first-to-last inside ping. upper bound: last outside ping
// before entry to first outside ping after exit; missing when the device
// has no bracketing outside ping on that day.
struct DwellSpell {
    int32_t device = -1;
    int32_t place = -1;
    Day day = 0;
    std::optional<Timestamp> t_out_before;
    Timestamp t_first_in = 0;
    Timestamp t_last_in = 0;
    std::optional<Timestamp> t_out_after;
    double lower_min = 0.0;
    std::optional<double> upper_min;
    int arrival_hour = 0; // local clock hour of t_first_in
    bool hull_ping = false;
};

// Segments every device's ping stream against every place, all days in the
// calendar window. Throws UnsortedInput if a device's pings go backwards.
std::vector<DwellSpell> extract_spells(const Dataset& ds, const PlaceIndex& index,
                                       double radius_m, const StudyCalendar& cal,
                                       int threads = 1);

// lambda-split wait: lambda*upper + (1-lambda)*lower. Throws MissingBound
// when the upper bound is absent and lambda > 0.
double wait_time(const DwellSpell& s, double lambda);

// Collapses same (device,place,day) re-entries, keeping the spell with the
// largest upper bound. Input must be sorted by t_first_in within groups.
std::vector<DwellSpell> merge_same_place(const std::vector<DwellSpell>& group,
                                         int64_t* discarded = nullptr);

// Applies merge_same_place across a full spell list grouped by
// (device, place, day); output ordered by (device, place, day).
std::vector<DwellSpell> merge_all(std::vector<DwellSpell> spells, int64_t* discarded = nullptr);

void write_spells_csv(const std::string& path, const std::vector<DwellSpell>& spells,
                      const Dataset& ds);

} // namespace pollwait::spells
