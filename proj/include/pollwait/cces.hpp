#pragma once

#include <map>
#include <string>
#include <vector>

namespace pollwait::cces {

enum class Bucket { None, Lt10, B10to30, B31to60, Gt60 };

struct SurveyResponse {
    std::string respondent_id;
    std::string region;
    Bucket bucket = Bucket::None;
    bool in_person = true;
    bool election_day = true;
};

Bucket parse_bucket(const std::string& s); // throws UnknownBucket
std::string bucket_name(Bucket b);

// Category midpoints: none->0, lt10->5, b10to30->20, b31to60->45, gt60->90.
double recode(Bucket b);

std::vector<SurveyResponse> load_survey(const std::string& path);

// In-person Election-Day responses only, averaged per region in minutes.
std::map<std::string, double> region_means(const std::vector<SurveyResponse>& responses);

// Pearson correlation over the region intersection. Both sides are expected
// to be EB-adjusted already. Throws InsufficientOverlap below 3 regions.
double correlate_regions(const std::map<std::string, double>& pipeline,
                         const std::map<std::string, double>& survey);

} // namespace pollwait::cces
