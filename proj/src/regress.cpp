#include "pollwait/regress.hpp"

#include "pollwait/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>

namespace pollwait::regress {

namespace {

double field_value(const VoterRow& r, const std::string& name) {
    if (name == "frac_black") return r.frac_black;
    if (name == "frac_asian") return r.frac_asian;
    if (name == "frac_hispanic") return r.frac_hispanic;
    if (name == "frac_other") return r.frac_other;
    if (name == "frac_poverty") return r.frac_poverty;
    if (name == "population_k") return r.population_k;
    if (name == "pop_density_k") return r.pop_density_k;
    if (name == "arrival_hour") return double(r.arrival_hour);
    if (name == "android") {
        if (!r.android) throw MissingField("regressor android missing on a row");
        return *r.android;
    }
    if (name == "voters_per_place_k") {
        if (!r.voters_per_place_k)
            throw MissingField("regressor voters_per_place_k missing on a row");
        return *r.voters_per_place_k;
    }
    throw Error("unknown regressor: " + name);
}

int32_t fe_code(const VoterRow& r, FixedEffect fe) {
    switch (fe) {
    case FixedEffect::State: return r.state;
    case FixedEffect::County: return r.county;
    case FixedEffect::Hour: return int32_t(r.arrival_hour);
    }
    return 0;
}

// Subtract group means of each column of M over the partition `codes`
// (values in [0, levels)). Returns the largest absolute cell mean removed.
double demean_pass(Eigen::MatrixXd& M, const std::vector<int32_t>& codes, int levels) {
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(levels, M.cols());
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(levels);
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        sums.row(codes[size_t(i)]) += M.row(i);
        counts[codes[size_t(i)]] += 1.0;
    }
    for (int g = 0; g < levels; ++g)
        if (counts[g] > 0) sums.row(g) /= counts[g];
    double max_mean = sums.array().abs().maxCoeff();
    for (Eigen::Index i = 0; i < M.rows(); ++i) M.row(i) -= sums.row(codes[size_t(i)]);
    return max_mean;
}

} // namespace

FitResult fit(const std::vector<VoterRow>& data, const ModelSpec& spec) {
    std::vector<const VoterRow*> rows;
    rows.reserve(data.size());
    for (const auto& r : data)
        if (!spec.sample_filter || spec.sample_filter(r)) rows.push_back(&r);
    const int64_t n = int64_t(rows.size());
    if (n == 0) throw EmptyInput("fit: no rows after sample filter");

    const bool has_fe = !spec.fixed_effects.empty();

    std::vector<std::string> names;
    if (!has_fe) names.push_back("intercept");
    for (const auto& r : spec.regressors) names.push_back(r);
    for (const auto& [a, b] : spec.interactions) names.push_back(a + "_x_" + b);
    const Eigen::Index k = Eigen::Index(names.size());

    Eigen::VectorXd y(n);
    Eigen::MatrixXd X(n, k);
    for (int64_t i = 0; i < n; ++i) {
        const VoterRow& r = *rows[size_t(i)];
        y[i] = spec.dependent == Dependent::WaitMin ? r.wait_min : r.over30;
        Eigen::Index c = 0;
        if (!has_fe) X(i, c++) = 1.0;
        for (const auto& name : spec.regressors) X(i, c++) = field_value(r, name);
        for (const auto& [a, b] : spec.interactions)
            X(i, c++) = field_value(r, a) * field_value(r, b);
    }

    // Cluster ids, re-coded densely.
    std::unordered_map<int32_t, int32_t> cluster_map;
    std::vector<int32_t> cluster(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) {
        auto [it, _] = cluster_map.emplace(rows[size_t(i)]->place, int32_t(cluster_map.size()));
        cluster[size_t(i)] = it->second;
    }
    const int64_t n_clusters = int64_t(cluster_map.size());
    if (n_clusters < 2) throw TooFewClusters("fit: need at least 2 clusters");

    // Absorb fixed effects by iterated demeaning.
    const double y_mean = y.mean();
    Eigen::VectorXd y_orig = y;
    int64_t fe_params = 0;
    if (has_fe) {
        std::vector<std::vector<int32_t>> fe_codes;
        std::vector<int> fe_levels;
        for (FixedEffect fe : spec.fixed_effects) {
            std::unordered_map<int32_t, int32_t> map;
            std::vector<int32_t> codes(static_cast<size_t>(n));
            for (int64_t i = 0; i < n; ++i) {
                auto [it, _] = map.emplace(fe_code(*rows[size_t(i)], fe), int32_t(map.size()));
                codes[size_t(i)] = it->second;
            }
            fe_codes.push_back(std::move(codes));
            fe_levels.push_back(int(map.size()));
        }
        // Dummy-variable equivalent parameter count: the first FE set
        // contributes all its levels, each further set loses one to
        // collinearity with the first.
        fe_params = fe_levels[0];
        for (size_t j = 1; j < fe_levels.size(); ++j) fe_params += fe_levels[j] - 1;

        Eigen::MatrixXd YX(n, k + 1);
        YX.col(0) = y;
        YX.rightCols(k) = X;
        const double tol = 1e-10;
        for (int iter = 0; iter < 200; ++iter) {
            double max_mean = 0.0;
            for (size_t j = 0; j < fe_codes.size(); ++j)
                max_mean = std::max(max_mean, demean_pass(YX, fe_codes[j], fe_levels[j]));
            if (max_mean < tol) break;
        }
        y = YX.col(0);
        X = YX.rightCols(k);
    }

    // Rank detection on column-normalized design.
    Eigen::VectorXd norms(k);
    std::vector<Eigen::Index> nonzero_cols;
    for (Eigen::Index c = 0; c < k; ++c) {
        norms[c] = X.col(c).norm();
        if (norms[c] > 1e-12 * std::sqrt(double(n))) nonzero_cols.push_back(c);
    }
    Eigen::MatrixXd Xs(n, Eigen::Index(nonzero_cols.size()));
    for (Eigen::Index c = 0; c < Xs.cols(); ++c)
        Xs.col(c) = X.col(nonzero_cols[size_t(c)]) / norms[nonzero_cols[size_t(c)]];

    std::vector<Eigen::Index> kept; // indices into `names`
    if (Xs.cols() > 0) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xs);
        qr.setThreshold(1e-8);
        Eigen::Index rank = qr.rank();
        auto perm = qr.colsPermutation().indices();
        std::vector<bool> keep_flag(size_t(Xs.cols()), false);
        for (Eigen::Index i = 0; i < rank; ++i) keep_flag[size_t(perm[i])] = true;
        for (Eigen::Index c = 0; c < Xs.cols(); ++c)
            if (keep_flag[size_t(c)]) kept.push_back(nonzero_cols[size_t(c)]);
    }
    if (kept.empty()) throw RankDeficient("fit: no identifiable regressors");

    FitResult res;
    res.n = n;
    res.n_clusters = n_clusters;
    res.depvar_mean = y_mean;
    for (Eigen::Index c = 0; c < k; ++c)
        if (std::find(kept.begin(), kept.end(), c) == kept.end())
            res.dropped.push_back(names[size_t(c)]);

    const Eigen::Index kk = Eigen::Index(kept.size());
    Eigen::MatrixXd Xk(n, kk);
    for (Eigen::Index c = 0; c < kk; ++c) Xk.col(c) = X.col(kept[size_t(c)]);

    res.k_params = kk + fe_params;
    if (n <= res.k_params)
        throw Error("fit: n (" + std::to_string(n) + ") <= parameters (" +
                    std::to_string(res.k_params) + ")");

    Eigen::VectorXd beta = Xk.householderQr().solve(y);
    Eigen::VectorXd u = y - Xk * beta;

    // Cluster sandwich: bread * [sum_g (X_g'u_g)(X_g'u_g)'] * bread.
    Eigen::MatrixXd xtx = Xk.transpose() * Xk;
    Eigen::MatrixXd bread = xtx.ldlt().solve(Eigen::MatrixXd::Identity(kk, kk));
    Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(n_clusters, kk);
    for (int64_t i = 0; i < n; ++i) scores.row(cluster[size_t(i)]) += u[i] * Xk.row(i);
    Eigen::MatrixXd meat = scores.transpose() * scores;
    double c_factor = 1.0;
    if (spec.cr1)
        c_factor = (double(n_clusters) / double(n_clusters - 1)) *
                   (double(n - 1) / double(n - res.k_params));
    Eigen::MatrixXd V = c_factor * bread * meat * bread;

    for (Eigen::Index c = 0; c < kk; ++c) {
        const std::string& name = names[size_t(kept[size_t(c)])];
        res.names.push_back(name);
        res.coef[name] = beta[c];
        res.se[name] = std::sqrt(std::max(0.0, V(c, c)));
    }

    // R^2 against the undemeaned dependent variable; residuals already
    // include the absorbed FE contribution.
    double sst = (y_orig.array() - y_mean).square().sum();
    double ssr = u.squaredNorm();
    res.r2 = sst > 0.0 ? std::max(0.0, 1.0 - ssr / sst) : 0.0;
    return res;
}

namespace {

ModelSpec ladder_spec(int column, Dependent dep) {
    if (column < 1 || column > 6) throw Error("disparity_table: column must be 1..6");
    ModelSpec spec;
    spec.dependent = dep;
    spec.regressors = {"frac_black"};
    if (column >= 2) {
        spec.regressors.push_back("frac_asian");
        spec.regressors.push_back("frac_hispanic");
        spec.regressors.push_back("frac_other");
    }
    if (column >= 3) {
        spec.regressors.push_back("population_k");
        spec.regressors.push_back("pop_density_k");
        spec.regressors.push_back("frac_poverty");
    }
    if (column == 4) spec.fixed_effects = {FixedEffect::State};
    if (column >= 5) spec.fixed_effects = {FixedEffect::County};
    if (column == 6) {
        spec.fixed_effects.push_back(FixedEffect::Hour);
        spec.regressors.push_back("android");
    }
    return spec;
}

} // namespace

FitResult disparity_table(const std::vector<VoterRow>& data, int column, Dependent dep) {
    return fit(data, ladder_spec(column, dep));
}

std::vector<FitResult> hour_restricted(const std::vector<VoterRow>& data,
                                       const std::vector<std::pair<int, int>>& windows) {
    std::vector<FitResult> out;
    for (const auto& [from, to] : windows) {
        if (from >= to) throw EmptyWindow("hour_restricted: empty window");
        ModelSpec spec = ladder_spec(4, Dependent::WaitMin);
        spec.sample_filter = [from = from, to = to](const VoterRow& r) {
            return r.arrival_hour >= from && r.arrival_hour < to;
        };
        out.push_back(fit(data, spec));
    }
    return out;
}

CongestionModels congestion_models(const std::vector<VoterRow>& data) {
    for (const auto& r : data)
        if (!r.voters_per_place_k)
            throw MissingField("congestion_models: voters_per_place_k missing");

    CongestionModels out;
    for (int column = 1; column <= 5; ++column) {
        ModelSpec spec = ladder_spec(column, Dependent::WaitMin);
        spec.regressors.push_back("voters_per_place_k");
        out.controls.push_back(fit(data, spec));
        spec.interactions.emplace_back("frac_black", "voters_per_place_k");
        out.interaction.push_back(fit(data, spec));
    }

    // Predicted lines from the bivariate interaction model (column 1).
    const FitResult& m = out.interaction[0];
    double vmin = 1e300, vmax = -1e300;
    for (const auto& r : data) {
        vmin = std::min(vmin, *r.voters_per_place_k);
        vmax = std::max(vmax, *r.voters_per_place_k);
    }
    auto coef = [&](const std::string& name) {
        auto it = m.coef.find(name);
        return it == m.coef.end() ? 0.0 : it->second;
    };
    const int grid_n = 50;
    for (int i = 0; i < grid_n; ++i) {
        double v = vmin + (vmax - vmin) * double(i) / double(grid_n - 1);
        out.volume_grid_k.push_back(v);
        double base = coef("intercept") + coef("voters_per_place_k") * v;
        out.predicted_black0.push_back(base);
        out.predicted_black1.push_back(base + coef("frac_black") +
                                       coef("frac_black_x_voters_per_place_k") * v);
    }
    return out;
}

std::vector<RegionEffect> region_effects(const std::vector<VoterRow>& data, RegionKind kind,
                                         int64_t n_floor) {
    std::map<int32_t, std::vector<const VoterRow*>> groups;
    for (const auto& r : data)
        groups[kind == RegionKind::State ? r.state : r.county].push_back(&r);

    std::vector<RegionEffect> out;
    for (const auto& [region, rows] : groups) {
        RegionEffect eff;
        eff.region = region;
        eff.n = int64_t(rows.size());
        double sum = 0.0;
        for (const auto* r : rows) sum += r->wait_min;
        eff.mean = sum / double(eff.n);
        double ss = 0.0;
        for (const auto* r : rows) ss += (r->wait_min - eff.mean) * (r->wait_min - eff.mean);
        eff.sd = eff.n > 1 ? std::sqrt(ss / double(eff.n - 1)) : 0.0;

        double fb0 = rows[0]->frac_black;
        bool degenerate = std::all_of(rows.begin(), rows.end(),
                                      [fb0](const VoterRow* r) { return r->frac_black == fb0; });
        std::map<int32_t, int> clusters;
        for (const auto* r : rows) clusters[r->place]++;
        if (eff.n < n_floor || degenerate || clusters.size() < 2 || eff.n < 3) {
            eff.flagged = true;
        } else {
            std::vector<VoterRow> sub;
            sub.reserve(rows.size());
            for (const auto* r : rows) sub.push_back(*r);
            ModelSpec spec;
            spec.regressors = {"frac_black"};
            try {
                FitResult f = fit(sub, spec);
                if (f.coef.count("frac_black")) {
                    eff.disparity_coef = f.coef.at("frac_black");
                    eff.disparity_se = f.se.at("frac_black");
                } else {
                    eff.flagged = true;
                }
            } catch (const Error&) {
                eff.flagged = true;
            }
        }
        out.push_back(eff);
    }
    return out;
}

BivariateResult bivariate(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw Error("bivariate: size mismatch");
    const int64_t n = int64_t(xs.size());
    if (n < 3) throw Error("bivariate: need at least 3 regions");
    double xm = std::accumulate(xs.begin(), xs.end(), 0.0) / double(n);
    double ym = std::accumulate(ys.begin(), ys.end(), 0.0) / double(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (int64_t i = 0; i < n; ++i) {
        double dx = xs[size_t(i)] - xm, dy = ys[size_t(i)] - ym;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx <= 0.0) throw DegenerateVariance("bivariate: regressor has zero variance");

    BivariateResult res;
    res.slope = sxy / sxx;
    res.intercept = ym - res.slope * xm;
    res.r = syy > 0.0 ? sxy / std::sqrt(sxx * syy) : 0.0;
    // HC1 robust SE for the slope.
    double meat = 0.0;
    for (int64_t i = 0; i < n; ++i) {
        double dx = xs[size_t(i)] - xm;
        double u = ys[size_t(i)] - res.intercept - res.slope * xs[size_t(i)];
        meat += dx * dx * u * u;
    }
    double hc1 = double(n) / double(n - 2);
    res.se = std::sqrt(hc1 * meat) / sxx;
    return res;
}

} // namespace pollwait::regress
