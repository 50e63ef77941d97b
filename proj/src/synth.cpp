#include "pollwait/synth.hpp"

#include "pollwait/csvio.hpp"
#include "pollwait/error.hpp"
#include "pollwait/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

namespace pollwait::synth {

namespace {

using geo::GeoPoint;

// Acklam's rational approximation to the standard normal quantile.
double norm_quantile(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425, phigh = 1 - plow;
    double q, r;
    if (p < plow) {
        q = std::sqrt(-2 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    if (p > phigh) {
        q = std::sqrt(-2 * std::log(1 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    q = p - 0.5;
    r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
}

struct RawPing {
    Timestamp t;
    GeoPoint loc;
};

struct RawDevice {
    std::string name;
    std::vector<RawPing> pings;
};

struct PlaceResult {
    ingest::PollingPlace place;
    ingest::BlockGroup bg;
    std::vector<RawDevice> devices;
    std::vector<GroundTruth> truth;
};

class Rng {
public:
    explicit Rng(uint64_t seed, uint64_t stream) {
        std::seed_seq seq{uint32_t(seed), uint32_t(seed >> 32), uint32_t(stream),
                          uint32_t(stream >> 32)};
        gen_.seed(seq);
    }
    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(gen_);
    }
    double normal(double mean, double sd) {
        return std::normal_distribution<double>(mean, sd)(gen_);
    }
    double lognormal(double median, double sigma) {
        return std::exp(std::log(median) + sigma * normal(0.0, 1.0));
    }
    double gamma(double shape) {
        return std::gamma_distribution<double>(shape, 1.0)(gen_);
    }
    int64_t poisson(double mean) {
        return std::poisson_distribution<int64_t>(mean)(gen_);
    }
    int uniform_int(int lo, int hi) { // inclusive
        return std::uniform_int_distribution<int>(lo, hi)(gen_);
    }

private:
    std::mt19937_64 gen_;
};

// Ping inter-arrival law: point mass at the mode mixed with a lognormal
// whose scale is solved so the mixture median hits the configured median.
class GapLaw {
public:
    GapLaw(const ScenarioConfig& cfg) : cfg_(cfg) {
        double w = cfg.ping_gap_mode_weight;
        lognormal_median_ = cfg.ping_gap_median_s;
        if (w > 0.0 && w < 0.5 && cfg.ping_gap_mode_s > cfg.ping_gap_median_s) {
            double z = norm_quantile(0.5 / (1.0 - w));
            lognormal_median_ = cfg.ping_gap_median_s * std::exp(-cfg.ping_gap_sigma * z);
        }
    }
    double draw(Rng& rng) const {
        if (rng.uniform(0.0, 1.0) < cfg_.ping_gap_mode_weight) return cfg_.ping_gap_mode_s;
        return std::max(1.0, rng.lognormal(lognormal_median_, cfg_.ping_gap_sigma));
    }

private:
    const ScenarioConfig& cfg_;
    double lognormal_median_;
};

GeoPoint noisy(Rng& rng, const GeoPoint& p, double noise_m) {
    if (noise_m <= 0.0) return p;
    return geo::offset_m(p, rng.normal(0.0, noise_m), rng.normal(0.0, noise_m));
}

std::string zpad(int64_t v, int width) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%0*lld", width, (long long)v);
    return buf;
}

struct PlaceGeometry {
    GeoPoint centroid;
    geo::Footprint footprint;
    GeoPoint home(Rng& rng) const {
        double bearing = rng.uniform(0.0, 2.0 * geo::kPi);
        double dist = rng.uniform(800.0, 3000.0);
        return geo::offset_m(centroid, dist * std::cos(bearing), dist * std::sin(bearing));
    }
    GeoPoint queue_spot(Rng& rng, double extent_m) const {
        double bearing = rng.uniform(0.0, 2.0 * geo::kPi);
        double dist = rng.uniform(0.0, extent_m);
        return geo::offset_m(centroid, dist * std::cos(bearing), dist * std::sin(bearing));
    }
    GeoPoint booth_spot(Rng& rng) const {
        return geo::offset_m(centroid, rng.uniform(-8.0, 8.0), rng.uniform(-8.0, 8.0));
    }
};

// Emits a full day of pings for a device following `position(t)` (nullopt =
// phone dark, e.g. indoors without a fix). Sparse mode posts one ping per
// clock hour plus gap-law pings around the visit window; dense mode runs
// the gap law across the whole day.
void emit_day_pings(Rng& rng, const GapLaw& gaps, const ScenarioConfig& cfg, Day day,
                    const std::function<std::optional<GeoPoint>(Timestamp)>& position,
                    std::optional<std::pair<Timestamp, Timestamp>> visit,
                    std::vector<RawPing>& out) {
    const Timestamp day_start = day * timeutil::kSecondsPerDay;
    auto emit = [&](Timestamp t) {
        auto p = position(t);
        if (p) out.push_back({t, noisy(rng, *p, cfg.gps_noise_m)});
    };

    if (cfg.dense_pings) {
        Timestamp t = day_start + cfg.home_ping_start_hour * timeutil::kSecondsPerHour;
        const Timestamp end = day_start + cfg.home_ping_end_hour * timeutil::kSecondsPerHour;
        while (t < end) {
            emit(t);
            t += Timestamp(std::llround(gaps.draw(rng)));
        }
        return;
    }

    for (int h = cfg.home_ping_start_hour; h < cfg.home_ping_end_hour; ++h)
        emit(day_start + h * timeutil::kSecondsPerHour +
             Timestamp(std::llround(rng.uniform(0.0, 3599.0))));

    if (visit) {
        const Timestamp lead = 300;
        const Timestamp lo = visit->first - lead;
        const Timestamp hi = visit->second + lead;
        Timestamp t = lo;
        emit(t); // guaranteed outside bracket before entry
        while (true) {
            t += Timestamp(std::llround(gaps.draw(rng)));
            if (t >= hi) break;
            emit(t);
        }
        emit(hi); // guaranteed outside bracket after exit
    }
}

PlaceResult simulate_place(const ScenarioConfig& cfg, size_t pi,
                           const std::vector<double>& county_black_center, Day target,
                           const std::vector<Day>& all_days, const GapLaw& gaps) {
    Rng rng(cfg.seed, uint64_t(pi) + 1);
    PlaceResult out;

    const int n_counties = cfg.n_states * cfg.counties_per_state;
    const int county = int(pi) % n_counties;
    const int state = county / cfg.counties_per_state;

    // Geometry: places on a coarse grid, 2 km apart.
    const GeoPoint base{39.0, -95.0};
    PlaceGeometry g;
    g.centroid = geo::offset_m(base, double(pi % 256) * 2000.0, double(pi / 256) * 2000.0);
    const double half = 12.0;
    g.footprint = geo::convex_hull({geo::offset_m(g.centroid, -half, -half),
                                    geo::offset_m(g.centroid, half, -half),
                                    geo::offset_m(g.centroid, half, half),
                                    geo::offset_m(g.centroid, -half, half)});

    ingest::PollingPlace& place = out.place;
    place.place_id = "P" + zpad(int64_t(pi), 5);
    place.centroid = g.centroid;
    place.footprint = g.footprint;
    place.state = "S" + zpad(state, 2);
    place.county = place.state + "_C" + zpad(county % cfg.counties_per_state, 2);
    place.block_group = "BG" + zpad(int64_t(pi), 5);
    place.registered_voters_k = rng.lognormal(cfg.registered_median_k, cfg.registered_sigma);

    // Block group demographics around the county's black-share center.
    ingest::BlockGroup& bg = out.bg;
    bg.id = place.block_group;
    double fb = std::clamp(county_black_center[size_t(county)] + rng.normal(0.0, 0.08), 0.005,
                           0.95);
    double rest = 1.0 - fb;
    double gw = rng.gamma(30.0 * 0.78), ga = rng.gamma(30.0 * 0.06), gh = rng.gamma(30.0 * 0.12),
           go = rng.gamma(30.0 * 0.04);
    double gsum = gw + ga + gh + go;
    bg.frac_black = fb;
    bg.frac_white = rest * gw / gsum;
    bg.frac_asian = rest * ga / gsum;
    bg.frac_hispanic = rest * gh / gsum;
    bg.frac_other = rest * go / gsum;
    bg.frac_poverty = rng.uniform(0.05, 0.25);
    bg.population_k = rng.uniform(0.8, 3.0);
    bg.pop_density_k = rng.lognormal(1.0, 0.8);

    const Timestamp day_start = target * timeutil::kSecondsPerDay;
    const Timestamp open_t = day_start + cfg.open_hour * timeutil::kSecondsPerHour;

    // --- Voters through the FIFO queue ---------------------------------
    int64_t n_voters = rng.poisson(cfg.voters_per_place_mean);
    std::vector<Timestamp> arrivals;
    arrivals.reserve(size_t(n_voters));
    {
        std::vector<double> weights;
        for (int h = cfg.open_hour; h < cfg.close_hour; ++h)
            weights.push_back(cfg.arrival_profile[size_t(h)]);
        double wsum = 0.0;
        for (double w : weights) wsum += w;
        if (wsum <= 0.0) throw ConfigInvalid("synth: arrival profile empty over open hours");
        for (int64_t v = 0; v < n_voters; ++v) {
            double u = rng.uniform(0.0, wsum);
            int h = cfg.open_hour;
            for (size_t j = 0; j < weights.size(); ++j) {
                if (u < weights[j]) {
                    h = cfg.open_hour + int(j);
                    break;
                }
                u -= weights[j];
            }
            arrivals.push_back(day_start + h * timeutil::kSecondsPerHour +
                               Timestamp(std::llround(rng.uniform(0.0, 3599.0))));
        }
        std::sort(arrivals.begin(), arrivals.end());
    }

    int servers = cfg.servers_per_place;
    if (cfg.server_rule)
        servers = std::max(1, int(std::lround(double(cfg.servers_per_place) *
                                              (1.0 - cfg.server_cut_frac * fb))));
    // Post-queue extra dwell; occupies the voter, not the server, so the
    // injected gap does not feed back into congestion.
    double extra_min = fb * (cfg.disparity_min + cfg.disparity_base_min +
                             cfg.disparity_volume_slope * *place.registered_voters_k) +
                       cfg.county_confound_min * county_black_center[size_t(county)];

    std::vector<Timestamp> server_free(size_t(servers), open_t);
    for (size_t v = 0; v < arrivals.size(); ++v) {
        Timestamp arr = arrivals[v];
        Timestamp dep;
        bool abandoned = cfg.abandonment_rate > 0.0 &&
                         rng.uniform(0.0, 1.0) < cfg.abandonment_rate;
        if (abandoned) {
            dep = arr + Timestamp(std::llround(rng.uniform(60.0, 300.0)));
        } else {
            auto it = std::min_element(server_free.begin(), server_free.end());
            Timestamp start = std::max(arr, *it);
            double service_s = rng.lognormal(cfg.service_median_min * 60.0, cfg.service_sigma);
            *it = start + Timestamp(std::llround(service_s));
            dep = *it + Timestamp(std::llround(extra_min * 60.0));
        }

        RawDevice dev;
        dev.name = place.place_id + "_V" + zpad(int64_t(v), 4);
        GeoPoint home = g.home(rng);
        GeoPoint queue = g.queue_spot(rng, cfg.queue_extent_m);
        GeoPoint booth = g.booth_spot(rng);
        Timestamp service_start = abandoned ? dep : dep - Timestamp(std::llround(
                                                              extra_min * 60.0));
        // During the post-queue extra dwell the voter is at the booth.
        auto position = [&](Timestamp t) -> std::optional<GeoPoint> {
            if (t < arr || t > dep) return home;
            if (t <= service_start - 0) {
                // still queueing outside
                return queue;
            }
            if (!cfg.indoor_pings) return std::nullopt;
            return booth;
        };
        emit_day_pings(rng, gaps, cfg, target, position, std::make_pair(arr, dep), dev.pings);
        out.truth.push_back({dev.name, place.place_id, target, arr, dep,
                             double(dep - arr) / 60.0, "voter"});
        out.devices.push_back(std::move(dev));
    }

    // --- Background roles ----------------------------------------------
    for (int w = 0; w < cfg.workers_per_place; ++w) {
        RawDevice dev;
        dev.name = place.place_id + "_W" + zpad(w, 2);
        GeoPoint home = g.home(rng);
        GeoPoint desk = g.booth_spot(rng);
        for (Day d : all_days) {
            Timestamp ds0 = d * timeutil::kSecondsPerDay;
            Timestamp shift_lo = ds0 + (cfg.open_hour - 1) * timeutil::kSecondsPerHour;
            Timestamp shift_hi = ds0 + (cfg.close_hour + 1) * timeutil::kSecondsPerHour;
            auto position = [&](Timestamp t) -> std::optional<GeoPoint> {
                if (t >= shift_lo && t <= shift_hi) return desk;
                return home;
            };
            emit_day_pings(rng, gaps, cfg, d, position,
                           std::make_pair(shift_lo, shift_hi), dev.pings);
            out.truth.push_back({dev.name, place.place_id, d, shift_lo, shift_hi,
                                 double(shift_hi - shift_lo) / 60.0, "worker"});
        }
        out.devices.push_back(std::move(dev));
    }

    for (int r = 0; r < cfg.residents_per_place; ++r) {
        RawDevice dev;
        dev.name = place.place_id + "_R" + zpad(r, 2);
        double bearing = rng.uniform(0.0, 2.0 * geo::kPi);
        double dist = rng.uniform(10.0, 40.0);
        GeoPoint home = geo::offset_m(g.centroid, dist * std::cos(bearing),
                                      dist * std::sin(bearing));
        for (Day d : all_days) {
            auto position = [&](Timestamp) -> std::optional<GeoPoint> { return home; };
            emit_day_pings(rng, gaps, cfg, d, position, std::nullopt, dev.pings);
            Timestamp ds0 = d * timeutil::kSecondsPerDay;
            out.truth.push_back({dev.name, place.place_id, d,
                                 ds0 + cfg.home_ping_start_hour * timeutil::kSecondsPerHour,
                                 ds0 + cfg.home_ping_end_hour * timeutil::kSecondsPerHour,
                                 double(cfg.home_ping_end_hour - cfg.home_ping_start_hour) * 60.0,
                                 "resident"});
        }
        out.devices.push_back(std::move(dev));
    }

    int passerby_n = 0, lingerer_n = 0;
    for (Day d : all_days) {
        Timestamp ds0 = d * timeutil::kSecondsPerDay;
        // Quick transits: a handful of pings crossing the circle.
        int64_t n_pass = rng.poisson(cfg.passersby_per_place_day);
        for (int64_t p = 0; p < n_pass; ++p) {
            RawDevice dev;
            dev.name = place.place_id + "_X" + zpad(passerby_n++, 4);
            Timestamp t0 = ds0 + cfg.open_hour * timeutil::kSecondsPerHour +
                           Timestamp(std::llround(rng.uniform(
                               0.0, double(cfg.close_hour - cfg.open_hour) * 3600.0)));
            double bearing = rng.uniform(0.0, 2.0 * geo::kPi);
            double cx = std::cos(bearing), sx = std::sin(bearing);
            // Walk past at ~1.5 m/s: pings at -500 m, -50, -20, 20, 50, 500.
            const double offsets[] = {-500, -50, -20, 20, 50, 500};
            for (double o : offsets) {
                Timestamp t = t0 + Timestamp(std::llround((o + 500.0) / 1.5));
                dev.pings.push_back({t, noisy(rng, geo::offset_m(g.centroid, o * cx, o * sx),
                                              cfg.gps_noise_m)});
            }
            Timestamp arr = t0 + Timestamp(std::llround(450.0 / 1.5));
            Timestamp dep = t0 + Timestamp(std::llround(550.0 / 1.5));
            out.truth.push_back({dev.name, place.place_id, d, arr, dep,
                                 double(dep - arr) / 60.0, "passerby"});
            out.devices.push_back(std::move(dev));
        }

        // Lingering visitors: non-voters with voter-like ping behavior, the
        // main false-positive channel and the source of placebo survivors.
        int64_t n_ling = rng.poisson(cfg.lingerers_per_place_day);
        for (int64_t p = 0; p < n_ling; ++p) {
            RawDevice dev;
            dev.name = place.place_id + "_L" + zpad(lingerer_n++, 4);
            GeoPoint home = g.home(rng);
            GeoPoint spot = g.booth_spot(rng);
            Timestamp arr = ds0 + cfg.open_hour * timeutil::kSecondsPerHour +
                            Timestamp(std::llround(rng.uniform(
                                0.0, double(cfg.close_hour - cfg.open_hour) * 3600.0)));
            Timestamp dep = arr + Timestamp(std::llround(rng.uniform(3.0, 25.0) * 60.0));
            auto position = [&](Timestamp t) -> std::optional<GeoPoint> {
                if (t < arr || t > dep) return home;
                return spot;
            };
            emit_day_pings(rng, gaps, cfg, d, position, std::make_pair(arr, dep), dev.pings);
            out.truth.push_back({dev.name, place.place_id, d, arr, dep,
                                 double(dep - arr) / 60.0, "passerby"});
            out.devices.push_back(std::move(dev));
        }
    }

    for (auto& dev : out.devices)
        std::sort(dev.pings.begin(), dev.pings.end(),
                  [](const RawPing& a, const RawPing& b) { return a.t < b.t; });
    return out;
}

} // namespace

ScenarioConfig::ScenarioConfig() {
    arrival_profile.fill(0.0);
    // Bimodal default: morning peak near twice the midday level, evening bump.
    const double prof[24] = {0, 0, 0, 0, 0, 0,  0.5, 2.0, 1.6, 1.0, 0.8, 0.8,
                             1.0, 0.8, 0.8, 0.9, 1.2, 1.6, 1.4, 1.0, 0.5, 0, 0, 0};
    for (int h = 0; h < 24; ++h) arrival_profile[size_t(h)] = prof[h];
}

void ScenarioConfig::validate() const {
    if (n_places <= 0) throw ConfigInvalid("synth: n_places must be positive");
    if (open_hour >= close_hour) throw ConfigInvalid("synth: open_hour must precede close_hour");
    if (servers_per_place <= 0) throw ConfigInvalid("synth: servers_per_place must be positive");
    if (ping_gap_median_s <= 0 || ping_gap_mode_s <= 0)
        throw ConfigInvalid("synth: ping gap parameters must be positive");
    if (ping_gap_mode_weight < 0 || ping_gap_mode_weight >= 1)
        throw ConfigInvalid("synth: ping_gap_mode_weight must be in [0,1)");
    if (voters_per_place_mean < 0) throw ConfigInvalid("synth: negative voter rate");
    if (n_states <= 0 || counties_per_state <= 0)
        throw ConfigInvalid("synth: need at least one state and county");
}

ScenarioConfig ScenarioConfig::from_config(const Config& cfg) {
    ScenarioConfig sc;
    sc.seed = uint64_t(cfg.get_int64("seed", 42));
    sc.threads = cfg.get_int("threads", 1);
    sc.n_states = cfg.get_int("synth.n_states", sc.n_states);
    sc.counties_per_state = cfg.get_int("synth.counties_per_state", sc.counties_per_state);
    sc.n_places = cfg.get_int("synth.n_places", sc.n_places);
    sc.voters_per_place_mean =
        cfg.get_double("synth.voters_per_place_mean", sc.voters_per_place_mean);
    sc.open_hour = cfg.get_int("study.open_hour", sc.open_hour);
    sc.close_hour = cfg.get_int("study.close_hour", sc.close_hour);
    sc.target_day = cfg.get_str("study.target_day", sc.target_day);
    sc.pre_days = cfg.get_int("study.pre_days", sc.pre_days);
    sc.post_days = cfg.get_int("study.post_days", sc.post_days);
    sc.service_median_min = cfg.get_double("synth.service_median_min", sc.service_median_min);
    sc.service_sigma = cfg.get_double("synth.service_sigma", sc.service_sigma);
    sc.servers_per_place = cfg.get_int("synth.servers_per_place", sc.servers_per_place);
    sc.disparity_min = cfg.get_double("synth.disparity_min", sc.disparity_min);
    sc.disparity_base_min = cfg.get_double("synth.disparity_base_min", sc.disparity_base_min);
    sc.disparity_volume_slope =
        cfg.get_double("synth.disparity_volume_slope", sc.disparity_volume_slope);
    sc.county_confound_min = cfg.get_double("synth.county_confound_min", sc.county_confound_min);
    sc.server_rule = cfg.get_bool("synth.server_rule", sc.server_rule);
    sc.server_cut_frac = cfg.get_double("synth.server_cut_frac", sc.server_cut_frac);
    sc.ping_gap_median_s = cfg.get_double("synth.ping_gap_median_s", sc.ping_gap_median_s);
    sc.ping_gap_sigma = cfg.get_double("synth.ping_gap_sigma", sc.ping_gap_sigma);
    sc.ping_gap_mode_s = cfg.get_double("synth.ping_gap_mode_s", sc.ping_gap_mode_s);
    sc.ping_gap_mode_weight =
        cfg.get_double("synth.ping_gap_mode_weight", sc.ping_gap_mode_weight);
    sc.gps_noise_m = cfg.get_double("synth.gps_noise_m", sc.gps_noise_m);
    sc.queue_extent_m = cfg.get_double("synth.queue_extent_m", sc.queue_extent_m);
    sc.indoor_pings = cfg.get_bool("synth.indoor_pings", sc.indoor_pings);
    sc.dense_pings = cfg.get_bool("synth.dense_pings", sc.dense_pings);
    sc.home_ping_start_hour = cfg.get_int("synth.home_ping_start_hour", sc.home_ping_start_hour);
    sc.home_ping_end_hour = cfg.get_int("synth.home_ping_end_hour", sc.home_ping_end_hour);
    sc.passersby_per_place_day =
        cfg.get_double("synth.passersby_per_place_day", sc.passersby_per_place_day);
    sc.lingerers_per_place_day =
        cfg.get_double("synth.lingerers_per_place_day", sc.lingerers_per_place_day);
    sc.workers_per_place = cfg.get_int("synth.workers_per_place", sc.workers_per_place);
    sc.residents_per_place = cfg.get_int("synth.residents_per_place", sc.residents_per_place);
    sc.abandonment_rate = cfg.get_double("synth.abandonment_rate", sc.abandonment_rate);
    sc.registered_median_k = cfg.get_double("synth.registered_median_k", sc.registered_median_k);
    sc.registered_sigma = cfg.get_double("synth.registered_sigma", sc.registered_sigma);
    sc.survey_respondents_per_region =
        cfg.get_int("synth.survey_respondents_per_region", sc.survey_respondents_per_region);
    sc.survey_noise_min = cfg.get_double("synth.survey_noise_min", sc.survey_noise_min);
    for (int h = 0; h < 24; ++h)
        sc.arrival_profile[size_t(h)] = cfg.get_double(
            "synth.arrival_profile." + std::to_string(h), sc.arrival_profile[size_t(h)]);
    sc.validate();
    return sc;
}

SimOutput simulate(const ScenarioConfig& cfg) {
    cfg.validate();
    const Day target = timeutil::parse_date(cfg.target_day);
    std::vector<Day> all_days;
    for (int i = cfg.pre_days; i >= 1; --i) all_days.push_back(target - i);
    all_days.push_back(target);
    for (int i = 1; i <= cfg.post_days; ++i) all_days.push_back(target + i);

    const int n_counties = cfg.n_states * cfg.counties_per_state;
    std::vector<double> county_black_center(static_cast<size_t>(n_counties));
    {
        Rng rng(cfg.seed, 0);
        for (int c = 0; c < n_counties; ++c) {
            double a = rng.gamma(1.1), b = rng.gamma(8.9);
            county_black_center[size_t(c)] = std::clamp(a / (a + b), 0.01, 0.6);
        }
    }

    GapLaw gaps(cfg);
    std::vector<PlaceResult> results(size_t(cfg.n_places));
    parallel_chunks(size_t(cfg.n_places), cfg.threads, [&](const ChunkRange& c) {
        for (size_t pi = c.begin; pi < c.end; ++pi)
            results[pi] = simulate_place(cfg, pi, county_black_center, target, all_days, gaps);
    });

    SimOutput out;
    out.county_black_center = county_black_center;
    for (auto& r : results) {
        out.dataset.place_index.emplace(r.place.place_id, out.dataset.places.size());
        out.dataset.places.push_back(std::move(r.place));
        out.dataset.blockgroups.emplace(r.bg.id, std::move(r.bg));
        for (auto& dev : r.devices) {
            int32_t id = out.dataset.intern_device(dev.name);
            for (const auto& p : dev.pings)
                out.dataset.pings.push_back({id, p.t, p.loc});
        }
        for (auto& t : r.truth) out.truth.push_back(std::move(t));
    }
    out.dataset.finalize_pings();
    out.dataset.ping_stats.rows_in = int64_t(out.dataset.pings.size());
    out.dataset.ping_stats.rows_loaded = int64_t(out.dataset.pings.size());
    return out;
}

void write_outputs(const SimOutput& sim, const ScenarioConfig& cfg, const std::string& dir) {
    std::filesystem::create_directories(dir);
    const ingest::Dataset& ds = sim.dataset;

    {
        csv::Writer w(dir + "/pings.csv");
        w.row({"device_id", "timestamp_utc", "lat", "lon"});
        for (const auto& p : ds.pings)
            w.row({ds.device_names[size_t(p.device)], std::to_string(p.t),
                   csv::fmt(p.loc.lat, 10), csv::fmt(p.loc.lon, 10)});
    }
    {
        csv::Writer w(dir + "/places.csv");
        w.row({"place_id", "lat", "lon", "state", "county", "block_group", "registered_voters"});
        for (const auto& p : ds.places)
            w.row({p.place_id, csv::fmt(p.centroid.lat, 10), csv::fmt(p.centroid.lon, 10),
                   p.state, p.county, p.block_group,
                   p.registered_voters_k ? csv::fmt(*p.registered_voters_k) : ""});
    }
    {
        csv::Writer w(dir + "/footprints.csv");
        w.row({"place_id", "vertex_index", "lat", "lon"});
        for (const auto& p : ds.places) {
            if (!p.footprint) continue;
            for (size_t i = 0; i < p.footprint->vertices.size(); ++i)
                w.row({p.place_id, std::to_string(i),
                       csv::fmt(p.footprint->vertices[i].lat, 10),
                       csv::fmt(p.footprint->vertices[i].lon, 10)});
        }
    }
    {
        csv::Writer w(dir + "/blockgroups.csv");
        w.row({"block_group", "frac_white", "frac_black", "frac_asian", "frac_hispanic",
               "frac_other", "frac_poverty", "population_k", "pop_density_k"});
        std::vector<const ingest::BlockGroup*> bgs;
        for (const auto& p : ds.places) bgs.push_back(&ds.blockgroups.at(p.block_group));
        for (const auto* bg : bgs)
            w.row({bg->id, csv::fmt(bg->frac_white, 8), csv::fmt(bg->frac_black, 8),
                   csv::fmt(bg->frac_asian, 8), csv::fmt(bg->frac_hispanic, 8),
                   csv::fmt(bg->frac_other, 8), csv::fmt(bg->frac_poverty, 8),
                   csv::fmt(bg->population_k, 8), csv::fmt(bg->pop_density_k, 8)});
    }
    {
        csv::Writer w(dir + "/truth.csv");
        w.row({"device_id", "place_id", "day", "true_arrival", "true_departure",
               "true_wait_min", "role"});
        for (const auto& t : sim.truth)
            w.row({t.device_id, t.place_id, timeutil::format_date(t.day),
                   std::to_string(t.true_arrival), std::to_string(t.true_departure),
                   csv::fmt(t.true_wait_min), t.role});
    }
    {
        // Survey responses: per-state true means, noised and bucketized.
        std::map<std::string, std::pair<int64_t, double>> by_state;
        std::map<std::string, size_t> place_state;
        for (const auto& p : ds.places) place_state[p.place_id] = 0;
        for (const auto& t : sim.truth) {
            if (t.role != "voter") continue;
            const auto& st = ds.places[ds.place_index.at(t.place_id)].state;
            auto& a = by_state[st];
            a.first += 1;
            a.second += t.true_wait_min;
        }
        Rng rng(cfg.seed, 999983);
        csv::Writer w(dir + "/survey.csv");
        w.row({"respondent_id", "region", "bucket", "in_person", "election_day"});
        for (const auto& [st, a] : by_state) {
            double mean = a.second / double(a.first);
            for (int i = 0; i < cfg.survey_respondents_per_region; ++i) {
                double v = mean + rng.normal(0.0, cfg.survey_noise_min);
                std::string bucket = v <= 0.5 ? "none"
                                    : v < 10.0 ? "lt10"
                                    : v <= 30.0 ? "b10to30"
                                    : v <= 60.0 ? "b31to60"
                                                : "gt60";
                bool in_person = rng.uniform(0.0, 1.0) < 0.9;
                bool eday = rng.uniform(0.0, 1.0) < 0.95;
                w.row({"R_" + st + "_" + zpad(i, 4), st, bucket, in_person ? "1" : "0",
                       eday ? "1" : "0"});
            }
        }
    }
}

std::vector<TruthPair> truth_join(const std::vector<spells::DwellSpell>& sp,
                                  const ingest::Dataset& ds,
                                  const std::vector<GroundTruth>& truth) {
    std::map<std::tuple<std::string, std::string, Day>, const GroundTruth*> index;
    for (const auto& t : truth) index[{t.device_id, t.place_id, t.day}] = &t;
    std::vector<TruthPair> out;
    for (const auto& s : sp) {
        if (!s.upper_min) continue;
        auto key = std::make_tuple(ds.device_names[size_t(s.device)],
                                   ds.places[size_t(s.place)].place_id, s.day);
        auto it = index.find(key);
        if (it == index.end()) continue;
        out.push_back({s.device, s.lower_min, *s.upper_min,
                       0.5 * (s.lower_min + *s.upper_min), it->second->true_wait_min,
                       it->second->role});
    }
    return out;
}

} // namespace pollwait::synth
