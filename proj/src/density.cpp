#include "pollwait/density.hpp"

#include "pollwait/csvio.hpp"
#include "pollwait/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace pollwait::density {

std::vector<double> make_grid(double lo, double hi, double step) {
    std::vector<double> g;
    for (double x = lo; x <= hi + 1e-12; x += step) g.push_back(x);
    return g;
}

std::vector<std::pair<double, double>> kde(const std::vector<double>& values,
                                           double half_width, const std::vector<double>& grid,
                                           Kernel kernel) {
    if (values.empty()) throw EmptyInput("kde: no values");
    if (half_width <= 0.0) throw Error("kde: half_width must be positive");

    std::vector<double> sorted(values);
    std::sort(sorted.begin(), sorted.end());

    std::vector<std::pair<double, double>> out;
    out.reserve(grid.size());
    const double inv_nh = 1.0 / (double(values.size()) * half_width);
    for (double x : grid) {
        auto lo = std::lower_bound(sorted.begin(), sorted.end(), x - half_width);
        auto hi = std::upper_bound(sorted.begin(), sorted.end(), x + half_width);
        double dens = 0.0;
        for (auto it = lo; it != hi; ++it) {
            double u = (x - *it) / half_width;
            if (kernel == Kernel::Epanechnikov)
                dens += 0.75 * (1.0 - u * u);
            else
                dens += 1.0 - std::fabs(u);
        }
        out.emplace_back(x, dens * inv_nh);
    }
    return out;
}

DecileSplit decile_split(const std::vector<regress::VoterRow>& rows, const std::string& field) {
    auto value_of = [&field](const regress::VoterRow& r) -> double {
        if (field == "frac_black") return r.frac_black;
        if (field == "frac_asian") return r.frac_asian;
        if (field == "frac_hispanic") return r.frac_hispanic;
        if (field == "frac_other") return r.frac_other;
        if (field == "frac_poverty") return r.frac_poverty;
        if (field == "pop_density_k") return r.pop_density_k;
        throw Error("decile_split: unknown field " + field);
    };

    // One value per polling place (the field is place-level by construction).
    std::map<int32_t, double> place_value;
    for (const auto& r : rows) place_value.emplace(r.place, value_of(r));
    std::vector<std::pair<double, int32_t>> places;
    places.reserve(place_value.size());
    for (const auto& [pl, v] : place_value) places.emplace_back(v, pl);

    size_t distinct = 0;
    {
        std::vector<double> vals;
        for (const auto& [v, pl] : places) vals.push_back(v);
        std::sort(vals.begin(), vals.end());
        distinct = size_t(std::unique(vals.begin(), vals.end()) - vals.begin());
    }
    if (distinct < 10) throw DegenerateField("decile_split: fewer than 10 distinct values");

    std::sort(places.begin(), places.end());
    size_t p = places.size();
    size_t decile_sz = p / 10;
    if (decile_sz == 0) throw DegenerateField("decile_split: fewer than 10 places");

    DecileSplit split;
    std::map<int32_t, int> side; // -1 bottom, +1 top
    for (size_t i = 0; i < decile_sz; ++i) side[places[i].second] = -1;
    for (size_t i = p - decile_sz; i < p; ++i) side[places[i].second] = 1;
    split.bottom_places = int64_t(decile_sz);
    split.top_places = int64_t(decile_sz);
    for (const auto& r : rows) {
        auto it = side.find(r.place);
        if (it == side.end()) continue;
        if (it->second < 0)
            split.bottom.push_back(r);
        else
            split.top.push_back(r);
    }
    return split;
}

double share_over(const std::vector<regress::VoterRow>& rows, double threshold_min) {
    if (rows.empty()) throw EmptyInput("share_over: no rows");
    int64_t over = 0;
    for (const auto& r : rows)
        if (r.wait_min > threshold_min) ++over;
    return double(over) / double(rows.size());
}

std::vector<HourBucket> hourly_profile(const std::vector<regress::VoterRow>& rows) {
    std::map<int, std::pair<int64_t, double>> acc; // hour -> (count, sum)
    for (const auto& r : rows) {
        auto& a = acc[r.arrival_hour];
        a.first += 1;
        a.second += r.wait_min;
    }
    std::vector<HourBucket> out;
    for (const auto& [h, a] : acc)
        out.push_back({h, a.first, a.second / double(a.first)});
    return out;
}

void write_density_csv(const std::string& path,
                       const std::vector<std::pair<double, double>>& points,
                       const std::string& group) {
    csv::Writer w(path);
    w.row({"x", "density", "group"});
    for (const auto& [x, d] : points) w.row({csv::fmt(x), csv::fmt(d), group});
}

void write_hourly_csv(const std::string& path, const std::vector<HourBucket>& buckets,
                      const std::string& group) {
    csv::Writer w(path);
    w.row({"hour", "volume", "mean_wait", "group"});
    for (const auto& b : buckets)
        w.row({std::to_string(b.hour), std::to_string(b.volume), csv::fmt(b.mean_wait), group});
}

} // namespace pollwait::density
