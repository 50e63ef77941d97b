#include "pollwait/cces.hpp"
#include "pollwait/config.hpp"
#include "pollwait/csvio.hpp"
#include "pollwait/density.hpp"
#include "pollwait/error.hpp"
#include "pollwait/filters.hpp"
#include "pollwait/parallel.hpp"
#include "pollwait/pipeline.hpp"
#include "pollwait/radiusscan.hpp"
#include "pollwait/regress.hpp"
#include "pollwait/shrink.hpp"
#include "pollwait/spells.hpp"
#include "pollwait/synth.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace pw = pollwait;
namespace fs = std::filesystem;

namespace {

struct RunContext {
    pw::Config cfg;
    std::string data_dir = "data";
    std::string out_dir = "out";
    int threads = 1;

    std::optional<pw::ingest::Dataset> dataset;
    std::optional<pw::ingest::StudyCalendar> calendar;
    std::optional<std::vector<pw::spells::DwellSpell>> spells;
    std::optional<pw::filters::FilterOutcome> filtered;
    std::optional<pw::pipeline::VoterData> voters;

    double radius_m() const { return cfg.get_double("geo.radius_m", 60.0); }
    double lambda() const { return cfg.get_double("spells.lambda", 0.5); }

    pw::ingest::Dataset& data() {
        if (!dataset) {
            pw::ingest::Dataset ds;
            pw::ingest::load_pings(data_dir + "/pings.csv", ds);
            std::string fp = data_dir + "/footprints.csv";
            pw::ingest::load_places(data_dir + "/places.csv",
                                    fs::exists(fp) ? fp : std::string(), ds);
            pw::ingest::load_blockgroups(data_dir + "/blockgroups.csv", ds);
            auto join = pw::ingest::validate_join(ds);
            if (!join.unmatched.empty())
                throw pw::JoinError("ingest: " + std::to_string(join.unmatched.size()) +
                                    " places lack block groups (first: " +
                                    join.unmatched.front() + ")");
            dataset = std::move(ds);
        }
        return *dataset;
    }

    const pw::ingest::StudyCalendar& cal() {
        if (!calendar) calendar = pw::ingest::StudyCalendar::from_config(cfg);
        return *calendar;
    }

    std::vector<pw::spells::DwellSpell>& all_spells() {
        if (!spells) {
            pw::PlaceIndex index(data().places, radius_m());
            auto raw = pw::spells::extract_spells(data(), index, radius_m(), cal(), threads);
            spells = pw::spells::merge_all(std::move(raw));
        }
        return *spells;
    }

    pw::filters::FilterOutcome& survivors() {
        if (!filtered) {
            auto fcfg = pw::filters::FilterConfig::from_config(cfg);
            filtered = pw::filters::apply_filters(all_spells(), data(), fcfg, cal());
        }
        return *filtered;
    }

    pw::pipeline::VoterData& voter_rows() {
        if (!voters) {
            std::optional<uint64_t> android_seed;
            if (cfg.get_bool("regress.synth_android", true))
                android_seed = uint64_t(cfg.get_int64("seed", 42)) + 7;
            voters = pw::pipeline::build_rows(survivors().survivors, data(), lambda(),
                                              android_seed);
        }
        return *voters;
    }
};

std::vector<double> scan_radii(const pw::Config& cfg) {
    double lo = cfg.get_double("scan.radius_min_m", 10.0);
    double hi = cfg.get_double("scan.radius_max_m", 150.0);
    double step = cfg.get_double("scan.radius_step_m", 10.0);
    std::vector<double> radii;
    for (double r = lo; r <= hi + 1e-9; r += step) radii.push_back(r);
    return radii;
}

void cmd_simulate(RunContext& ctx) {
    auto sc = pw::synth::ScenarioConfig::from_config(ctx.cfg);
    sc.threads = ctx.threads;
    auto sim = pw::synth::simulate(sc);
    pw::synth::write_outputs(sim, sc, ctx.data_dir);
    std::printf("simulate: %zu places, %zu devices, %zu pings -> %s\n",
                sim.dataset.places.size(), sim.dataset.device_names.size(),
                sim.dataset.pings.size(), ctx.data_dir.c_str());
}

void cmd_ingest(RunContext& ctx) {
    auto& ds = ctx.data();
    std::printf("ingest: %lld pings (%lld skipped), %zu places, %zu block groups\n",
                (long long)ds.ping_stats.rows_loaded, (long long)ds.ping_stats.rows_skipped,
                ds.places.size(), ds.blockgroups.size());
}

void cmd_radius_scan(RunContext& ctx) {
    auto& ds = ctx.data();
    const auto& cal = ctx.cal();
    std::vector<pw::timeutil::Day> others;
    for (auto d : cal.all_days())
        if (d != cal.target_day) others.push_back(d);
    auto curve = pw::radiusscan::differential_curve(ds, scan_radii(ctx.cfg), cal.target_day,
                                                    others, cal, ctx.threads);
    auto choice =
        pw::radiusscan::select_radius(curve, ctx.cfg.get_double("scan.gain_threshold", 0.02));
    pw::radiusscan::write_radius_scan_csv(ctx.out_dir + "/radius_scan.csv", curve);
    std::printf("radius-scan: selected %.0f m%s -> %s/radius_scan.csv\n", choice.radius_m,
                choice.saturation_warning ? " (saturation warning)" : "",
                ctx.out_dir.c_str());
}

void cmd_spells(RunContext& ctx) {
    auto& sp = ctx.all_spells();
    pw::spells::write_spells_csv(ctx.out_dir + "/spells.csv", sp, ctx.data());
    std::printf("spells: %zu dwell spells at radius %.0f m -> %s/spells.csv\n", sp.size(),
                ctx.radius_m(), ctx.out_dir.c_str());
}

void cmd_filter(RunContext& ctx) {
    auto& out = ctx.survivors();
    pw::filters::write_attrition_csv(ctx.out_dir + "/attrition.csv", out.report);
    std::printf("filter: %zu likely voters (of %lld devices with target-day spells) -> "
                "%s/attrition.csv\n",
                out.survivors.size(),
                out.report.stages.empty() ? 0LL : (long long)out.report.stages.front().devices_in,
                ctx.out_dir.c_str());
}

void cmd_regress(RunContext& ctx) {
    auto& vd = ctx.voter_rows();
    std::vector<pw::regress::FitResult> cols;
    for (int c = 1; c <= 6; ++c) cols.push_back(pw::regress::disparity_table(vd.rows, c));
    pw::pipeline::write_table_csv(ctx.out_dir + "/table1.csv", cols);
    std::vector<pw::regress::FitResult> lpm;
    for (int c = 1; c <= 6; ++c)
        lpm.push_back(pw::regress::disparity_table(vd.rows, c, pw::regress::Dependent::Over30));
    pw::pipeline::write_table_csv(ctx.out_dir + "/table1_over30.csv", lpm);
    std::printf("regress: n=%lld, frac_black col4 = %.3f (se %.3f) -> %s/table1.csv\n",
                (long long)cols[3].n, cols[3].coef.at("frac_black"),
                cols[3].se.at("frac_black"), ctx.out_dir.c_str());
}

void cmd_regions(RunContext& ctx) {
    auto& vd = ctx.voter_rows();
    int64_t floor = ctx.cfg.get_int64("regions.n_floor", 30);
    auto st = pw::pipeline::region_rows(
        pw::regress::region_effects(vd.rows, pw::regress::RegionKind::State, floor),
        vd.regions.states);
    pw::shrink::adjust_region_tables(st);
    pw::shrink::write_regions_csv(ctx.out_dir + "/regions.csv", st);
    auto co = pw::pipeline::region_rows(
        pw::regress::region_effects(vd.rows, pw::regress::RegionKind::County, floor),
        vd.regions.counties);
    pw::shrink::adjust_region_tables(co);
    pw::shrink::write_regions_csv(ctx.out_dir + "/regions_county.csv", co);
    std::printf("regions: %zu states, %zu counties -> %s/regions.csv\n", st.size(), co.size(),
                ctx.out_dir.c_str());
}

void cmd_shrink(RunContext& ctx) {
    std::string in = ctx.cfg.get_str("shrink.input", ctx.out_dir + "/groups.csv");
    std::string out = ctx.cfg.get_str("shrink.output", ctx.out_dir + "/groups_adjusted.csv");
    pw::csv::Reader rd(in);
    rd.require_header({"group", "raw", "se", "n"}, "groups");
    std::vector<pw::shrink::GroupEstimate> groups;
    std::vector<std::string> f;
    while (rd.next(f)) {
        if (f.size() != 4) continue;
        groups.push_back({f[0], std::stod(f[1]), std::stod(f[2]), std::stoll(f[3])});
    }
    auto res = pw::shrink::eb_adjust(groups);
    pw::csv::Writer w(out);
    w.row({"group", "adjusted"});
    for (const auto& g : res.groups) w.row({g.group_id, pw::csv::fmt(g.adjusted, 8)});
    std::printf("shrink: %zu groups, grand mean %.4f, tau2 %.4f -> %s\n", groups.size(),
                res.grand_mean, res.tau2, out.c_str());
}

void cmd_density(RunContext& ctx) {
    auto& vd = ctx.voter_rows();
    std::vector<double> waits;
    for (const auto& r : vd.rows) waits.push_back(r.wait_min);
    double hw = ctx.cfg.get_double("density.half_width_min", 4.0);
    auto kernel = ctx.cfg.get_str("density.kernel", "epanechnikov") == "triangular"
                      ? pw::density::Kernel::Triangular
                      : pw::density::Kernel::Epanechnikov;
    auto grid = pw::density::make_grid(0.0, ctx.cfg.get_double("density.grid_max_min", 120.0),
                                       ctx.cfg.get_double("density.grid_step_min", 0.5));

    auto all = pw::density::kde(waits, hw, grid, kernel);
    pw::density::write_density_csv(ctx.out_dir + "/density.csv", all, "all");
    auto split = pw::density::decile_split(vd.rows, "frac_black");
    auto pull = [](const std::vector<pw::regress::VoterRow>& rows) {
        std::vector<double> v;
        for (const auto& r : rows) v.push_back(r.wait_min);
        return v;
    };
    {
        std::ofstream app(ctx.out_dir + "/density.csv", std::ios::app);
        for (const auto& [x, d] : pw::density::kde(pull(split.bottom), hw, grid, kernel))
            app << pw::csv::fmt(x) << "," << pw::csv::fmt(d) << ",bottom_decile\n";
        for (const auto& [x, d] : pw::density::kde(pull(split.top), hw, grid, kernel))
            app << pw::csv::fmt(x) << "," << pw::csv::fmt(d) << ",top_decile\n";
    }
    pw::density::write_hourly_csv(ctx.out_dir + "/hourly.csv",
                                  pw::density::hourly_profile(vd.rows), "all");
    double share = pw::density::share_over(vd.rows, 30.0);
    std::printf("density: %zu waits, share>30min %.3f -> %s/density.csv, %s/hourly.csv\n",
                waits.size(), share, ctx.out_dir.c_str(), ctx.out_dir.c_str());
}

void cmd_cces(RunContext& ctx) {
    auto& vd = ctx.voter_rows();
    auto st = pw::pipeline::region_rows(
        pw::regress::region_effects(vd.rows, pw::regress::RegionKind::State,
                                    ctx.cfg.get_int64("regions.n_floor", 30)),
        vd.regions.states);
    pw::shrink::adjust_region_tables(st);
    std::map<std::string, double> pipe;
    for (const auto& r : st)
        pipe[r.region] = r.adjusted_mean ? *r.adjusted_mean : r.raw_mean;
    auto survey = pw::cces::load_survey(ctx.data_dir + "/survey.csv");
    auto sm = pw::cces::region_means(survey);
    // degenerate overlaps leave the correlation blank instead of aborting
    std::string corr = "NA";
    try {
        corr = pw::csv::fmt(pw::cces::correlate_regions(pipe, sm));
    } catch (const pw::InsufficientOverlap&) {
    } catch (const pw::DegenerateVariance&) {
    }
    pw::csv::Writer w(ctx.out_dir + "/cces.csv");
    w.row({"region", "pipeline_mean", "survey_mean"});
    for (const auto& [region, v] : pipe) {
        auto it = sm.find(region);
        if (it != sm.end())
            w.row({region, pw::csv::fmt(v), pw::csv::fmt(it->second)});
    }
    std::printf("cces: %zu survey responses, correlation %s -> %s/cces.csv\n", survey.size(),
                corr.c_str(), ctx.out_dir.c_str());
}

void cmd_placebo(RunContext& ctx) {
    auto fcfg = pw::filters::FilterConfig::from_config(ctx.cfg);
    auto points = pw::pipeline::placebo_scan(ctx.all_spells(), ctx.data(), fcfg, ctx.cal(),
                                             ctx.lambda());
    pw::pipeline::write_placebo_csv(ctx.out_dir + "/placebo.csv", points,
                                    int64_t(ctx.survivors().survivors.size()));
    int64_t max_sv = 0;
    for (const auto& p : points) max_sv = std::max(max_sv, p.survivors);
    std::printf("placebo: %zu days, max survivors %lld (target %zu) -> %s/placebo.csv\n",
                points.size(), (long long)max_sv, ctx.survivors().survivors.size(),
                ctx.out_dir.c_str());
}

void cmd_report(RunContext& ctx) {
    auto& vd = ctx.voter_rows();
    auto hours = pw::regress::hour_restricted(
        vd.rows, {{7, 10}, {10, 13}, {13, 16}, {16, 20}});
    pw::pipeline::write_table_csv(ctx.out_dir + "/table_hours.csv", hours);

    bool have_volume = true;
    for (const auto& r : vd.rows)
        if (!r.voters_per_place_k) have_volume = false;
    if (have_volume) {
        auto cg = pw::regress::congestion_models(vd.rows);
        pw::pipeline::write_table_csv(ctx.out_dir + "/table_congestion.csv", cg.interaction);
        pw::csv::Writer w(ctx.out_dir + "/congestion_lines.csv");
        w.row({"volume_k", "predicted_black0", "predicted_black1"});
        for (size_t i = 0; i < cg.volume_grid_k.size(); ++i)
            w.row({pw::csv::fmt(cg.volume_grid_k[i]), pw::csv::fmt(cg.predicted_black0[i]),
                   pw::csv::fmt(cg.predicted_black1[i])});
    }

    std::vector<std::pair<std::string, std::string>> manifest;
    manifest.emplace_back("seed", std::to_string(ctx.cfg.get_int64("seed", 42)));
    manifest.emplace_back("radius_m", pw::csv::fmt(ctx.radius_m()));
    manifest.emplace_back("lambda", pw::csv::fmt(ctx.lambda()));
    // bare file names: the manifest must not depend on where the run lives
    int idx = 0;
    for (const char* name :
         {"table1.csv", "table1_over30.csv", "regions.csv", "regions_county.csv",
          "attrition.csv", "radius_scan.csv", "density.csv", "hourly.csv", "placebo.csv",
          "cces.csv", "spells.csv", "table_hours.csv"})
        manifest.emplace_back("artifact." + std::to_string(idx++), name);
    if (have_volume) {
        manifest.emplace_back("artifact." + std::to_string(idx++), "table_congestion.csv");
        manifest.emplace_back("artifact." + std::to_string(idx++), "congestion_lines.csv");
    }
    pw::pipeline::write_manifest(ctx.out_dir + "/manifest.txt", manifest);
    std::printf("report: %zu hour windows, manifest -> %s/manifest.txt\n", hours.size(),
                ctx.out_dir.c_str());
}

void cmd_all(RunContext& ctx) {
    if (ctx.cfg.get_bool("all.simulate", true)) cmd_simulate(ctx);
    cmd_ingest(ctx);
    if (ctx.cfg.get_bool("scan.enabled", true)) cmd_radius_scan(ctx);
    cmd_spells(ctx);
    cmd_filter(ctx);
    cmd_regress(ctx);
    cmd_regions(ctx);
    cmd_density(ctx);
    cmd_cces(ctx);
    cmd_placebo(ctx);
    cmd_report(ctx);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"polling-place wait-time pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::string data_dir, out_dir;
    std::optional<long long> seed_flag;
    std::optional<int> threads_flag;
    app.add_option("-c,--config", config_path, "key=value config file");
    app.add_option("--set", overrides, "override a config key (key=value)");
    app.add_option("--data", data_dir, "input data directory (default: data)");
    app.add_option("--out", out_dir, "artifact directory (default: out)");
    app.add_option("--seed", seed_flag, "root RNG seed");
    app.add_option("--threads", threads_flag, "worker threads (0 = auto)");

    const char* subs[] = {"simulate", "ingest",  "radius-scan", "spells", "filter",
                          "regress",  "regions", "shrink",      "density", "cces",
                          "placebo",  "report",  "all"};
    for (const char* s : subs) app.add_subcommand(s)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    RunContext ctx;
    try {
        if (!config_path.empty()) ctx.cfg = pw::Config::from_file(config_path);
        for (const auto& ov : overrides) {
            auto eq = ov.find('=');
            if (eq == std::string::npos)
                throw pw::ConfigInvalid("--set expects key=value, got: " + ov);
            ctx.cfg.set(ov.substr(0, eq), ov.substr(eq + 1));
        }
        if (seed_flag) ctx.cfg.set("seed", std::to_string(*seed_flag));
        if (threads_flag) ctx.cfg.set("threads", std::to_string(*threads_flag));
        ctx.data_dir = !data_dir.empty() ? data_dir : ctx.cfg.get_str("data_dir", "data");
        ctx.out_dir = !out_dir.empty() ? out_dir : ctx.cfg.get_str("out_dir", "out");
        ctx.threads = pw::resolve_threads(ctx.cfg.get_int("threads", 1));
        fs::create_directories(ctx.out_dir);

        const std::string sub = app.get_subcommands().front()->get_name();
        if (sub == "simulate") cmd_simulate(ctx);
        else if (sub == "ingest") cmd_ingest(ctx);
        else if (sub == "radius-scan") cmd_radius_scan(ctx);
        else if (sub == "spells") cmd_spells(ctx);
        else if (sub == "filter") cmd_filter(ctx);
        else if (sub == "regress") cmd_regress(ctx);
        else if (sub == "regions") cmd_regions(ctx);
        else if (sub == "shrink") cmd_shrink(ctx);
        else if (sub == "density") cmd_density(ctx);
        else if (sub == "cces") cmd_cces(ctx);
        else if (sub == "placebo") cmd_placebo(ctx);
        else if (sub == "report") cmd_report(ctx);
        else if (sub == "all") cmd_all(ctx);
    } catch (const pw::Error& e) {
        std::fprintf(stderr, "error=%s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error=unexpected message=%s\n", e.what());
        return 1;
    }
    return 0;
}
