#pragma once

#include "pollwait/filters.hpp"
#include "pollwait/regress.hpp"
#include "pollwait/shrink.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pollwait::pipeline {

using ingest::Dataset;
using ingest::StudyCalendar;
using spells::DwellSpell;

// String tables for the integer region codes in VoterRow.
struct RegionTables {
    std::vector<std::string> states;
    std::vector<std::string> counties;
};

struct VoterData {
    std::vector<regress::VoterRow> rows; // one per surviving device
    RegionTables regions;
};

// Joins surviving spells to place and block-group attributes. `lambda`
// splits the dwell bounds into the wait measure. When `android_seed` is
// set, a synthetic device-OS flag is drawn per device.
VoterData build_rows(const std::vector<DwellSpell>& survivors, const Dataset& ds,
                     double lambda = 0.5,
                     std::optional<uint64_t> android_seed = std::nullopt);

// Disparity ladder written long: one row per (column, term).
void write_table_csv(const std::string& path, const std::vector<regress::FitResult>& columns);

// region_effects output -> EB-ready rows with string region names.
std::vector<shrink::RegionRow> region_rows(const std::vector<regress::RegionEffect>& effects,
                                           const std::vector<std::string>& names);

struct PlaceboPoint {
    timeutil::Day day = 0;
    int64_t survivors = 0;
    std::optional<double> coef; // frac_black, state-FE spec; absent when unfittable
    std::optional<double> se;
};

// One filter + regression pass per non-target day in the calendar window.
std::vector<PlaceboPoint> placebo_scan(const std::vector<DwellSpell>& all_spells,
                                       const Dataset& ds, const filters::FilterConfig& fcfg,
                                       const StudyCalendar& cal, double lambda = 0.5);

void write_placebo_csv(const std::string& path, const std::vector<PlaceboPoint>& points,
                       int64_t target_survivors);

// Flat key=value run manifest.
void write_manifest(const std::string& path,
                    const std::vector<std::pair<std::string, std::string>>& entries);

} // namespace pollwait::pipeline
