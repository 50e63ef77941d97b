#pragma once

#include "pollwait/ingest.hpp"
#include "pollwait/placeindex.hpp"

#include <string>
#include <vector>

namespace pollwait::radiusscan {

using ingest::Dataset;
using ingest::StudyCalendar;
using timeutil::Day;

struct DifferentialCurve {
    std::vector<double> radii_m; // strictly increasing
    std::vector<double> election_day_counts;
    std::vector<double> other_day_mean_counts;
    std::vector<double> diff; // election minus other-day mean, per radius
};

struct RadiusChoice {
    double radius_m = 0.0;
    bool saturation_warning = false; // gain never fell below the threshold
};

// Distinct devices with >=1 ping within r of any place centroid on `day`
// (local day per the place's state).
int64_t unique_devices(const Dataset& ds, const PlaceIndex& index, double r_m, Day day,
                       const StudyCalendar& cal);

DifferentialCurve differential_curve(const Dataset& ds, const std::vector<double>& radii_m,
                                     Day target_day, const std::vector<Day>& other_days,
                                     const StudyCalendar& cal, int threads = 1);

// Smallest radius whose marginal relative gain drops below the threshold;
// largest radius with a warning if that never happens. Throws
// NonPositiveCurve when the curve is nowhere positive.
RadiusChoice select_radius(const DifferentialCurve& curve, double gain_threshold = 0.02);

void write_radius_scan_csv(const std::string& path, const DifferentialCurve& curve);

} // namespace pollwait::radiusscan
