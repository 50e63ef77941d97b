#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pollwait::regress {

// One filtered spell joined to demographics; the regression observation.
struct VoterRow {
    double wait_min = 0.0;
    double over30 = 0.0; // 1 iff wait_min > 30
    double frac_black = 0, frac_asian = 0, frac_hispanic = 0, frac_other = 0;
    double frac_poverty = 0, population_k = 0, pop_density_k = 0;
    int32_t state = 0, county = 0, place = 0;
    int arrival_hour = 0;
    std::optional<double> android;
    std::optional<double> voters_per_place_k;
};

enum class Dependent { WaitMin, Over30 };
enum class FixedEffect { State, County, Hour };

struct ModelSpec {
    Dependent dependent = Dependent::WaitMin;
    std::vector<std::string> regressors;
    std::vector<FixedEffect> fixed_effects;
    std::vector<std::pair<std::string, std::string>> interactions;
    std::function<bool(const VoterRow&)> sample_filter; // nullptr = keep all
    bool cr1 = true; // CR1 small-sample factor; false = CR0
};

struct FitResult {
    std::vector<std::string> names; // estimated columns, in design order
    std::map<std::string, double> coef;
    std::map<std::string, double> se; // cluster-robust (polling place)
    std::vector<std::string> dropped; // collinear columns pivoted out
    int64_t n = 0;
    int64_t n_clusters = 0;
    int64_t k_params = 0; // estimated columns + absorbed FE levels
    double r2 = 0.0;
    double depvar_mean = 0.0;
};

// OLS / LPM with absorbed fixed effects (iterated within-group demeaning)
// and polling-place-clustered sandwich standard errors.
FitResult fit(const std::vector<VoterRow>& data, const ModelSpec& spec);

// The Table 1 specification ladder. `column` is 1..6:
//   1 frac_black; 2 +races; 3 +area controls; 4 +state FE; 5 county FE;
//   6 county FE + hour FE + android.
FitResult disparity_table(const std::vector<VoterRow>& data, int column,
                          Dependent dep = Dependent::WaitMin);

// One column-4 style fit per arrival-hour window [from, to).
std::vector<FitResult> hour_restricted(const std::vector<VoterRow>& data,
                                       const std::vector<std::pair<int, int>>& windows);

struct CongestionModels {
    std::vector<FitResult> controls;    // volume added to each ladder column
    std::vector<FitResult> interaction; // + frac_black x volume
    // Predicted-wait lines over a volume grid, from the column-1 interaction
    // model, for frac_black = 0 and 1.
    std::vector<double> volume_grid_k;
    std::vector<double> predicted_black0;
    std::vector<double> predicted_black1;
};

CongestionModels congestion_models(const std::vector<VoterRow>& data);

struct RegionEffect {
    int32_t region = 0;
    int64_t n = 0;
    double mean = 0.0;
    double sd = 0.0;
    std::optional<double> disparity_coef; // absent when flagged
    std::optional<double> disparity_se;
    bool flagged = false; // below the n floor or degenerate frac_black
};

enum class RegionKind { State, County };

std::vector<RegionEffect> region_effects(const std::vector<VoterRow>& data, RegionKind kind,
                                         int64_t n_floor = 30);

struct BivariateResult {
    double slope = 0.0;
    double se = 0.0; // heteroskedasticity-robust (HC1)
    double r = 0.0;  // Pearson
    double intercept = 0.0;
};

BivariateResult bivariate(const std::vector<double>& xs, const std::vector<double>& ys);

} // namespace pollwait::regress
