#include "pollwait/pipeline.hpp"

#include "pollwait/csvio.hpp"
#include "pollwait/error.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <unordered_map>

namespace pollwait::pipeline {

VoterData build_rows(const std::vector<DwellSpell>& survivors, const Dataset& ds,
                     double lambda, std::optional<uint64_t> android_seed) {
    VoterData out;
    std::unordered_map<std::string, int32_t> state_ix, county_ix;
    auto intern = [](std::unordered_map<std::string, int32_t>& ix,
                     std::vector<std::string>& names, const std::string& s) {
        auto [it, inserted] = ix.emplace(s, int32_t(names.size()));
        if (inserted) names.push_back(s);
        return it->second;
    };

    for (const auto& s : survivors) {
        const auto& place = ds.places.at(size_t(s.place));
        auto bit = ds.blockgroups.find(place.block_group);
        if (bit == ds.blockgroups.end())
            throw JoinError("build_rows: no block group for place " + place.place_id);
        const auto& bg = bit->second;

        regress::VoterRow r;
        r.wait_min = spells::wait_time(s, lambda);
        r.over30 = r.wait_min > 30.0 ? 1.0 : 0.0;
        r.frac_black = bg.frac_black;
        r.frac_asian = bg.frac_asian;
        r.frac_hispanic = bg.frac_hispanic;
        r.frac_other = bg.frac_other;
        r.frac_poverty = bg.frac_poverty;
        r.population_k = bg.population_k;
        r.pop_density_k = bg.pop_density_k;
        r.state = intern(state_ix, out.regions.states, place.state);
        r.county = intern(county_ix, out.regions.counties, place.county);
        r.place = s.place;
        r.arrival_hour = s.arrival_hour;
        if (android_seed) {
            std::mt19937_64 g(*android_seed ^ uint64_t(s.device) * 0x9e3779b97f4a7c15ull);
            r.android = double(g() & 1);
        }
        r.voters_per_place_k = place.registered_voters_k;
        out.rows.push_back(r);
    }
    return out;
}

void write_table_csv(const std::string& path, const std::vector<regress::FitResult>& columns) {
    csv::Writer w(path);
    w.row({"column", "term", "coef", "se", "n", "n_clusters", "r2", "depvar_mean"});
    for (size_t c = 0; c < columns.size(); ++c) {
        const auto& f = columns[c];
        for (const auto& name : f.names) {
            w.row({std::to_string(c + 1), name, csv::fmt(f.coef.at(name), 8),
                   csv::fmt(f.se.at(name), 8), std::to_string(f.n),
                   std::to_string(f.n_clusters), csv::fmt(f.r2, 6),
                   csv::fmt(f.depvar_mean, 6)});
        }
    }
}

std::vector<shrink::RegionRow> region_rows(const std::vector<regress::RegionEffect>& effects,
                                           const std::vector<std::string>& names) {
    std::vector<shrink::RegionRow> out;
    for (const auto& e : effects) {
        shrink::RegionRow r;
        r.region = names.at(size_t(e.region));
        r.n = e.n;
        r.raw_mean = e.mean;
        r.sd = e.sd;
        r.raw_disparity = e.disparity_coef;
        r.disparity_se = e.disparity_se;
        out.push_back(std::move(r));
    }
    std::sort(out.begin(), out.end(),
              [](const shrink::RegionRow& a, const shrink::RegionRow& b) {
                  return a.region < b.region;
              });
    return out;
}

std::vector<PlaceboPoint> placebo_scan(const std::vector<DwellSpell>& all_spells,
                                       const Dataset& ds, const filters::FilterConfig& fcfg,
                                       const StudyCalendar& cal, double lambda) {
    std::vector<PlaceboPoint> out;
    for (timeutil::Day d : cal.all_days()) {
        if (d == cal.target_day) continue;
        auto outcome = filters::placebo_sample(d, all_spells, ds, fcfg, cal);
        PlaceboPoint pt;
        pt.day = d;
        pt.survivors = int64_t(outcome.survivors.size());
        try {
            auto data = build_rows(outcome.survivors, ds, lambda);
            auto f = regress::disparity_table(data.rows, 4);
            if (f.coef.count("frac_black")) {
                pt.coef = f.coef.at("frac_black");
                pt.se = f.se.at("frac_black");
            }
        } catch (const Error&) {
            // too thin to fit; report the count alone
        }
        out.push_back(pt);
    }
    return out;
}

void write_placebo_csv(const std::string& path, const std::vector<PlaceboPoint>& points,
                       int64_t target_survivors) {
    csv::Writer w(path);
    w.row({"day", "survivors", "survivor_share_of_target", "coef_frac_black", "se"});
    for (const auto& p : points) {
        double share = target_survivors > 0
                           ? double(p.survivors) / double(target_survivors)
                           : 0.0;
        w.row({timeutil::format_date(p.day), std::to_string(p.survivors),
               csv::fmt(share, 6), p.coef ? csv::fmt(*p.coef, 8) : "",
               p.se ? csv::fmt(*p.se, 8) : ""});
    }
}

void write_manifest(const std::string& path,
                    const std::vector<std::pair<std::string, std::string>>& entries) {
    std::ofstream out(path);
    if (!out) throw Error("write_manifest: cannot open " + path);
    for (const auto& [k, v] : entries) out << k << "=" << v << "\n";
}

} // namespace pollwait::pipeline
