#include "pollwait/cces.hpp"

#include "pollwait/csvio.hpp"
#include "pollwait/error.hpp"

#include <cmath>

namespace pollwait::cces {

Bucket parse_bucket(const std::string& s) {
    if (s == "none") return Bucket::None;
    if (s == "lt10") return Bucket::Lt10;
    if (s == "b10to30") return Bucket::B10to30;
    if (s == "b31to60") return Bucket::B31to60;
    if (s == "gt60") return Bucket::Gt60;
    throw UnknownBucket("unknown survey bucket: " + s);
}

std::string bucket_name(Bucket b) {
    switch (b) {
    case Bucket::None: return "none";
    case Bucket::Lt10: return "lt10";
    case Bucket::B10to30: return "b10to30";
    case Bucket::B31to60: return "b31to60";
    case Bucket::Gt60: return "gt60";
    }
    return "?";
}

double recode(Bucket b) {
    switch (b) {
    case Bucket::None: return 0.0;
    case Bucket::Lt10: return 5.0;
    case Bucket::B10to30: return 20.0;
    case Bucket::B31to60: return 45.0;
    case Bucket::Gt60: return 90.0;
    }
    throw UnknownBucket("unknown survey bucket");
}

std::vector<SurveyResponse> load_survey(const std::string& path) {
    csv::Reader rd(path);
    rd.require_header({"respondent_id", "region", "bucket", "in_person", "election_day"},
                      "survey");
    std::vector<SurveyResponse> out;
    std::vector<std::string> f;
    while (rd.next(f)) {
        if (f.size() != 5) continue;
        SurveyResponse r;
        r.respondent_id = f[0];
        r.region = f[1];
        r.bucket = parse_bucket(f[2]);
        r.in_person = f[3] == "1";
        r.election_day = f[4] == "1";
        out.push_back(std::move(r));
    }
    return out;
}

std::map<std::string, double> region_means(const std::vector<SurveyResponse>& responses) {
    std::map<std::string, std::pair<int64_t, double>> acc;
    for (const auto& r : responses) {
        if (!r.in_person || !r.election_day) continue;
        auto& a = acc[r.region];
        a.first += 1;
        a.second += recode(r.bucket);
    }
    std::map<std::string, double> out;
    for (const auto& [region, a] : acc) out[region] = a.second / double(a.first);
    return out;
}

double correlate_regions(const std::map<std::string, double>& pipeline,
                         const std::map<std::string, double>& survey) {
    std::vector<double> xs, ys;
    for (const auto& [region, v] : pipeline) {
        auto it = survey.find(region);
        if (it == survey.end()) continue;
        xs.push_back(v);
        ys.push_back(it->second);
    }
    if (xs.size() < 3)
        throw InsufficientOverlap("correlate_regions: fewer than 3 overlapping regions");
    double n = double(xs.size());
    double xm = 0, ym = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        xm += xs[i];
        ym += ys[i];
    }
    xm /= n;
    ym /= n;
    double sxx = 0, syy = 0, sxy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        double dx = xs[i] - xm, dy = ys[i] - ym;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0)
        throw DegenerateVariance("correlate_regions: zero variance on one side");
    return sxy / std::sqrt(sxx * syy);
}

} // namespace pollwait::cces
