#pragma once

#include "pollwait/config.hpp"
#include "pollwait/ingest.hpp"
#include "pollwait/spells.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace pollwait::synth {

using timeutil::Day;
using timeutil::Timestamp;

// Scenario knobs for the queue-and-ping generator. Defaults reproduce the
// calibration anchors: 48 s median ping gap with a 5-minute mode, 5 m GPS
// noise, bimodal arrival profile, block-group race mix around 70/11.
struct ScenarioConfig {
    uint64_t seed = 42;
    int threads = 1;

    int n_states = 4;
    int counties_per_state = 4;
    int n_places = 100;
    double voters_per_place_mean = 50.0; // Poisson

    std::array<double, 24> arrival_profile; // per local clock hour
    int open_hour = 7;
    int close_hour = 20;
    std::string target_day = "2016-11-08";
    int pre_days = 7;
    int post_days = 7;

    double service_median_min = 8.0;
    double service_sigma = 0.5; // lognormal shape
    int servers_per_place = 3;

    // Disparity injection, additive route: extra service minutes
    //   frac_black * (disparity_min + disparity_base_min
    //                 + disparity_volume_slope * registered_k)
    double disparity_min = 0.0;
    double disparity_base_min = 0.0;
    double disparity_volume_slope = 0.0;
    // County-level confounder: county_confound_min * county_black_center
    // added for every voter in the county, regardless of race.
    double county_confound_min = 0.0;
    // Resource route: scale server counts down with frac_black.
    bool server_rule = false;
    double server_cut_frac = 0.5;

    double ping_gap_median_s = 48.0;
    double ping_gap_sigma = 0.8;
    double ping_gap_mode_s = 300.0;
    double ping_gap_mode_weight = 0.25;
    double gps_noise_m = 5.0;
    double queue_extent_m = 15.0;
    bool indoor_pings = true;  // emit pings while casting the ballot
    bool dense_pings = false;  // gap-law pings all day, not just near the visit
    int home_ping_start_hour = 6;
    int home_ping_end_hour = 22;

    double passersby_per_place_day = 2.0; // quick transits
    double lingerers_per_place_day = 0.5; // non-voter visitors with voter-like pings
    int workers_per_place = 1;
    int residents_per_place = 1;
    double abandonment_rate = 0.0; // leave the queue after 1-5 min

    double registered_median_k = 2.7;
    double registered_sigma = 0.52; // 90th percentile near 5.2k

    int survey_respondents_per_region = 200;
    double survey_noise_min = 5.0;

    ScenarioConfig();
    static ScenarioConfig from_config(const Config& cfg);
    void validate() const; // throws ConfigInvalid
};

struct GroundTruth {
    std::string device_id;
    std::string place_id;
    Day day = 0;
    Timestamp true_arrival = 0;
    Timestamp true_departure = 0;
    double true_wait_min = 0.0;
    std::string role; // voter | worker | passerby | resident
};

struct SimOutput {
    ingest::Dataset dataset; // pings, places, blockgroups ready for the pipeline
    std::vector<GroundTruth> truth;
    // County demographic centers, keyed like county region codes; used by
    // tests that probe the confounding DGP.
    std::vector<double> county_black_center;
};

SimOutput simulate(const ScenarioConfig& cfg);

// Emits pings.csv, places.csv, footprints.csv, blockgroups.csv, truth.csv
// and survey.csv under `dir` (created if missing).
void write_outputs(const SimOutput& sim, const ScenarioConfig& cfg, const std::string& dir);

struct TruthPair {
    int32_t device = -1;
    double lower_min = 0.0;
    double upper_min = 0.0;
    double midpoint_min = 0.0;
    double true_wait_min = 0.0;
    std::string role;
};

// Inner join of extracted spells with ground truth on (device, place, day).
// Spells without an upper bound are skipped.
std::vector<TruthPair> truth_join(const std::vector<spells::DwellSpell>& sp,
                                  const ingest::Dataset& ds,
                                  const std::vector<GroundTruth>& truth);

} // namespace pollwait::synth
