#include "pollwait/shrink.hpp"

#include "pollwait/csvio.hpp"
#include "pollwait/error.hpp"

#include <cmath>

namespace pollwait::shrink {

EbResult eb_adjust(const std::vector<GroupEstimate>& groups, double tol, int max_iter) {
    std::vector<const GroupEstimate*> usable;
    for (const auto& g : groups)
        if (std::isfinite(g.raw) && std::isfinite(g.se) && g.se > 0.0) usable.push_back(&g);

    EbResult res;
    if (usable.empty()) throw EmptyInput("eb_adjust: no usable groups");
    if (usable.size() == 1) {
        res.single_group = true;
        res.grand_mean = usable[0]->raw;
        res.groups.push_back({usable[0]->group_id, usable[0]->raw});
        return res;
    }

    double mu = 0.0, tau2 = 0.0;
    {
        // Start from the unweighted mean and the excess dispersion.
        double s = 0.0;
        for (const auto* g : usable) s += g->raw;
        mu = s / double(usable.size());
    }
    int iter = 0;
    bool converged = false;
    for (; iter < max_iter; ++iter) {
        double wsum = 0.0, wraw = 0.0;
        for (const auto* g : usable) {
            double w = 1.0 / (tau2 + g->se * g->se);
            wsum += w;
            wraw += w * g->raw;
        }
        double mu_new = wraw / wsum;

        double num = 0.0;
        for (const auto* g : usable) {
            double w = 1.0 / (tau2 + g->se * g->se);
            double d = g->raw - mu_new;
            num += w * (d * d - g->se * g->se);
        }
        double tau2_new = num / wsum;
        bool clamped = tau2_new < 0.0;
        if (clamped) tau2_new = 0.0;

        double delta = std::fabs(mu_new - mu) + std::fabs(tau2_new - tau2);
        mu = mu_new;
        tau2 = tau2_new;
        res.tau_clamped = clamped;
        if (delta < tol) {
            converged = true;
            ++iter;
            break;
        }
    }
    res.iterations = iter;
    res.converged = converged;

    res.grand_mean = mu;
    res.tau2 = tau2;
    for (const auto* g : usable) {
        double shrinkf = tau2 > 0.0 ? tau2 / (tau2 + g->se * g->se) : 0.0;
        res.groups.push_back({g->group_id, mu + shrinkf * (g->raw - mu)});
    }
    return res;
}

void adjust_region_tables(std::vector<RegionRow>& rows, double tol, int max_iter) {
    std::vector<GroupEstimate> means, disparities;
    for (const auto& r : rows) {
        if (r.n >= 2 && r.sd > 0.0)
            means.push_back({r.region, r.raw_mean, r.sd / std::sqrt(double(r.n)), r.n});
        if (r.raw_disparity && r.disparity_se && *r.disparity_se > 0.0)
            disparities.push_back({r.region, *r.raw_disparity, *r.disparity_se, r.n});
    }
    auto apply = [&rows](const EbResult& eb, bool is_mean) {
        for (const auto& a : eb.groups)
            for (auto& r : rows)
                if (r.region == a.group_id) {
                    if (is_mean)
                        r.adjusted_mean = a.adjusted;
                    else
                        r.adjusted_disparity = a.adjusted;
                }
    };
    if (!means.empty()) apply(eb_adjust(means, tol, max_iter), true);
    if (!disparities.empty()) apply(eb_adjust(disparities, tol, max_iter), false);
}

void write_regions_csv(const std::string& path, const std::vector<RegionRow>& rows) {
    csv::Writer w(path);
    w.row({"region", "n", "raw_mean", "sd", "adjusted_mean", "raw_disparity", "disparity_se",
           "adjusted_disparity"});
    auto opt = [](const std::optional<double>& v) { return v ? csv::fmt(*v) : std::string(); };
    for (const auto& r : rows)
        w.row({r.region, std::to_string(r.n), csv::fmt(r.raw_mean), csv::fmt(r.sd),
               opt(r.adjusted_mean), opt(r.raw_disparity), opt(r.disparity_se),
               opt(r.adjusted_disparity)});
}

} // namespace pollwait::shrink
