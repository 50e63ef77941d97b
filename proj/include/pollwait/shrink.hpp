#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pollwait::shrink {

struct GroupEstimate {
    std::string group_id;
    double raw = 0.0;
    double se = 0.0; // must be > 0 for inclusion
    int64_t n = 0;
};

struct Adjusted {
    std::string group_id;
    double adjusted = 0.0;
};

struct EbResult {
    std::vector<Adjusted> groups;
    double grand_mean = 0.0;
    double tau2 = 0.0;
    int iterations = 0;
    bool converged = true;
    bool tau_clamped = false; // the non-negativity clamp bound
    bool single_group = false;
};

// Precision-weighted shrinkage toward the grand mean. Iterates
//   mu    = sum(w_g raw_g)/sum(w_g),            w_g = 1/(tau2 + se_g^2)
//   tau2  = max(0, sum(w_g((raw_g-mu)^2 - se_g^2))/sum(w_g))
// to a fixed point, then reports
//   adjusted_g = mu + tau2/(tau2 + se_g^2) * (raw_g - mu).
EbResult eb_adjust(const std::vector<GroupEstimate>& groups, double tol = 1e-8,
                   int max_iter = 1000);

// A region row ready for regions.csv: Table-layout means and disparities
// adjusted independently; sub-floor regions keep blank adjusted fields.
struct RegionRow {
    std::string region;
    int64_t n = 0;
    double raw_mean = 0.0;
    double sd = 0.0;
    std::optional<double> adjusted_mean;
    std::optional<double> raw_disparity;
    std::optional<double> disparity_se;
    std::optional<double> adjusted_disparity;
};

// Runs eb_adjust separately over the mean and disparity columns of the
// given rows. Rows with missing inputs are passed through blank.
void adjust_region_tables(std::vector<RegionRow>& rows, double tol = 1e-8, int max_iter = 1000);

void write_regions_csv(const std::string& path, const std::vector<RegionRow>& rows);

} // namespace pollwait::shrink
