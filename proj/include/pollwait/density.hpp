#pragma once

#include "pollwait/regress.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pollwait::density {

enum class Kernel { Epanechnikov, Triangular };

// Bounded-support kernel density with the given half-width, evaluated on an
// ascending grid. Throws EmptyInput on no values.
std::vector<std::pair<double, double>> kde(const std::vector<double>& values,
                                           double half_width, const std::vector<double>& grid,
                                           Kernel kernel = Kernel::Epanechnikov);

std::vector<double> make_grid(double lo, double hi, double step);

struct DecileSplit {
    std::vector<regress::VoterRow> bottom; // voters at the bottom-decile places
    std::vector<regress::VoterRow> top;
    int64_t bottom_places = 0;
    int64_t top_places = 0;
};

// Deciles taken over polling places by the place-level value of `field`,
// then expanded to those places' voters.
DecileSplit decile_split(const std::vector<regress::VoterRow>& rows, const std::string& field);

double share_over(const std::vector<regress::VoterRow>& rows, double threshold_min = 30.0);

struct HourBucket {
    int hour = 0;
    int64_t volume = 0;
    double mean_wait = 0.0;
};

std::vector<HourBucket> hourly_profile(const std::vector<regress::VoterRow>& rows);

void write_density_csv(const std::string& path,
                       const std::vector<std::pair<double, double>>& points,
                       const std::string& group);
void write_hourly_csv(const std::string& path, const std::vector<HourBucket>& buckets,
                      const std::string& group);

} // namespace pollwait::density
