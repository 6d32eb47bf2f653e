#pragma once

// MPC extraction under the dynamic-range rule, gated weighted delay-power
// matching via optimal assignment, and the linear/dB RMSE metrics.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sitert/geom.hpp"
#include "sitert/tracer.hpp"

namespace sitert {

struct Mpc {
    double delay_s = 0.0;
    double power_dbm = 0.0;
    enum class Source { Simulated, Measured } source = Source::Simulated;
    std::string link_id;
};

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

// Entries within dynamic_range dB of the peak, sorted by delay.
inline std::vector<Mpc> extract_mpcs(const Pdp& pdp, double dynamic_range_db = 25.0,
                                     Mpc::Source source = Mpc::Source::Simulated,
                                     const std::string& link_id = "") {
    if (dynamic_range_db <= 0.0)
        throw InputError("extract_mpcs: dynamic range must be positive");
    std::vector<Mpc> out;
    if (pdp.entries.empty()) return out;
    double peak = -std::numeric_limits<double>::infinity();
    for (const auto& e : pdp.entries) peak = std::max(peak, mw_to_dbm(e.power_mw));
    for (const auto& e : pdp.entries) {
        double p = mw_to_dbm(e.power_mw);
        if (p >= peak - dynamic_range_db)
            out.push_back({e.delay_s, p, source, link_id});
    }
    std::sort(out.begin(), out.end(),
              [](const Mpc& a, const Mpc& b) { return a.delay_s < b.delay_s; });
    return out;
}

struct MatchParams {
    double delay_scale_s = 10e-9;
    double power_scale_db = 10.0;
    double gate_delay_s = 20e-9;
    double gate_power_db = 25.0;
};

struct MpcPair {
    Mpc sim;
    Mpc meas;
    double cost = 0.0;
};

struct MatchOutcome {
    std::vector<MpcPair> pairs;
    std::vector<Mpc> unmatched_sim;
    std::vector<Mpc> unmatched_meas;
};

namespace detail {

// O(n^3) Hungarian algorithm (potentials form) on a square cost matrix.
// Returns, for each row, the assigned column.
inline std::vector<int> hungarian(const std::vector<std::vector<double>>& cost) {
    int n = static_cast<int>(cost.size());
    if (n == 0) return {};
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, false);
        do {
            used[j0] = true;
            int i0 = p[j0], j1 = -1;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= n; ++j)
        if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
    return row_to_col;
}

}  // namespace detail

// One-to-one assignment minimizing the normalized-L1 delay/power cost over
// pairs inside both gates.  Infeasible pairs take a large finite penalty so
// the optimum first maximizes the number of gated matches.
inline MatchOutcome match_mpcs(const std::vector<Mpc>& sim, const std::vector<Mpc>& meas,
                               const MatchParams& params = {}) {
    MatchOutcome out;
    size_t n = sim.size(), m = meas.size();
    if (n == 0 || m == 0) {
        out.unmatched_sim = sim;
        out.unmatched_meas = meas;
        return out;
    }
    const double big = 1e9;
    size_t dim = std::max(n, m);
    std::vector<std::vector<double>> cost(dim, std::vector<double>(dim, 0.0));
    for (size_t i = 0; i < dim; ++i)
        for (size_t j = 0; j < dim; ++j) {
            if (i >= n || j >= m) {
                cost[i][j] = 0.0;  // dummy row/col
                continue;
            }
            double dtau = std::abs(sim[i].delay_s - meas[j].delay_s);
            double dp = std::abs(sim[i].power_dbm - meas[j].power_dbm);
            if (dtau > params.gate_delay_s || dp > params.gate_power_db)
                cost[i][j] = big;
            else
                cost[i][j] = dtau / params.delay_scale_s + dp / params.power_scale_db;
        }
    // Dummy assignments are free, so a real pair must beat "both unmatched";
    // shift real feasible costs down by a constant larger than any feasible
    // cost to prefer matching.
    const double bonus =
        params.gate_delay_s / params.delay_scale_s + params.gate_power_db / params.power_scale_db +
        1.0;
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < m; ++j)
            if (cost[i][j] < big) cost[i][j] -= bonus;

    std::vector<int> assign = detail::hungarian(cost);
    std::vector<char> meas_used(m, false);
    for (size_t i = 0; i < n; ++i) {
        int j = assign[i];
        if (j >= 0 && j < static_cast<int>(m) && cost[i][j] < big / 2) {
            out.pairs.push_back({sim[i], meas[j], cost[i][j] + bonus});
            meas_used[j] = true;
        } else {
            out.unmatched_sim.push_back(sim[i]);
        }
    }
    for (size_t j = 0; j < m; ++j)
        if (!meas_used[j]) out.unmatched_meas.push_back(meas[j]);
    return out;
}

// ------------------------------------------------------------------
// RMSE over matched pairs, computed in linear milliwatts and converted to dB.

struct RmseResult {
    double rmse_linear_mw = 0.0;
    double rmse_db = 0.0;  // -inf when exact
    bool exact = false;    // all pairs identical
    // secondary metric: RMSE over dB-domain power differences
    double rmse_db_domain = 0.0;
};

inline RmseResult rmse(const std::vector<MpcPair>& pairs) {
    if (pairs.empty())
        throw InputError("rmse: no matched pairs");
    double acc = 0.0, acc_db = 0.0;
    for (const auto& p : pairs) {
        double d = dbm_to_mw(p.sim.power_dbm) - dbm_to_mw(p.meas.power_dbm);
        acc += d * d;
        double ddb = p.sim.power_dbm - p.meas.power_dbm;
        acc_db += ddb * ddb;
    }
    RmseResult r;
    r.rmse_linear_mw = std::sqrt(acc / pairs.size());
    r.rmse_db_domain = std::sqrt(acc_db / pairs.size());
    if (r.rmse_linear_mw == 0.0) {
        r.exact = true;
        r.rmse_db = -std::numeric_limits<double>::infinity();
    } else {
        r.rmse_db = 10.0 * std::log10(r.rmse_linear_mw);
    }
    return r;
}

// ------------------------------------------------------------------
// Full comparison across links

struct LinkPdp {
    std::string link_id;
    double freq_hz = 0.0;
    bool los = true;
    Pdp pdp;
};

struct LinkReport {
    std::string link_id;
    bool los = true;
    size_t n_sim_mpcs = 0, n_meas_mpcs = 0, n_matched = 0;
    std::optional<RmseResult> rmse;  // empty if no matches
};

struct ScenarioStats {
    size_t n_links = 0;
    double mean_db = 0.0, std_db = 0.0, median_db = 0.0;
};

struct MatchReport {
    std::vector<LinkReport> links;
    std::vector<MpcPair> pairs;  // pooled over links
    size_t unmatched_sim = 0, unmatched_meas = 0;
    std::optional<RmseResult> pooled;
    // per-scenario stats over per-link dB-domain RMSE values
    std::map<std::string, ScenarioStats> scenarios;  // "LOS", "NLOS", "Overall"
};

namespace detail {

inline ScenarioStats scenario_stats(const std::vector<double>& vals) {
    ScenarioStats s;
    s.n_links = vals.size();
    if (vals.empty()) return s;
    double sum = 0;
    for (double v : vals) sum += v;
    s.mean_db = sum / vals.size();
    double var = 0;
    for (double v : vals) var += (v - s.mean_db) * (v - s.mean_db);
    s.std_db = vals.size() > 1 ? std::sqrt(var / (vals.size() - 1)) : 0.0;
    std::vector<double> sorted = vals;
    std::sort(sorted.begin(), sorted.end());
    size_t n = sorted.size();
    s.median_db = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    return s;
}

}  // namespace detail

inline MatchReport compare_runs(const std::vector<LinkPdp>& sim, const std::vector<LinkPdp>& meas,
                                const MatchParams& params = {}, double dynamic_range_db = 25.0) {
    std::map<std::string, const LinkPdp*> sim_by_id, meas_by_id;
    for (const auto& l : sim) sim_by_id[l.link_id] = &l;
    for (const auto& l : meas) meas_by_id[l.link_id] = &l;

    std::vector<std::string> only_sim, only_meas;
    for (const auto& [id, l] : sim_by_id)
        if (!meas_by_id.count(id)) only_sim.push_back(id);
    for (const auto& [id, l] : meas_by_id)
        if (!sim_by_id.count(id)) only_meas.push_back(id);
    if (sim_by_id.empty() || meas_by_id.empty() ||
        only_sim.size() == sim_by_id.size() || only_meas.size() == meas_by_id.size()) {
        std::string msg = "compare_runs: no overlapping link ids";
        for (const auto& id : only_sim) msg += " sim-only:" + id;
        for (const auto& id : only_meas) msg += " meas-only:" + id;
        throw InputError(msg);
    }

    MatchReport report;
    std::vector<double> los_vals, nlos_vals, all_vals;
    for (const auto& [id, sl] : sim_by_id) {
        auto it = meas_by_id.find(id);
        if (it == meas_by_id.end()) continue;
        const LinkPdp* ml = it->second;
        auto sim_mpcs = extract_mpcs(sl->pdp, dynamic_range_db, Mpc::Source::Simulated, id);
        auto meas_mpcs = extract_mpcs(ml->pdp, dynamic_range_db, Mpc::Source::Measured, id);
        MatchOutcome mo = match_mpcs(sim_mpcs, meas_mpcs, params);

        LinkReport lr;
        lr.link_id = id;
        lr.los = ml->los;
        lr.n_sim_mpcs = sim_mpcs.size();
        lr.n_meas_mpcs = meas_mpcs.size();
        lr.n_matched = mo.pairs.size();
        if (!mo.pairs.empty()) {
            lr.rmse = rmse(mo.pairs);
            double v = lr.rmse->rmse_db_domain;
            (lr.los ? los_vals : nlos_vals).push_back(v);
            all_vals.push_back(v);
        }
        report.links.push_back(lr);
        report.unmatched_sim += mo.unmatched_sim.size();
        report.unmatched_meas += mo.unmatched_meas.size();
        for (auto& p : mo.pairs) report.pairs.push_back(std::move(p));
    }
    if (!report.pairs.empty()) report.pooled = rmse(report.pairs);
    report.scenarios["LOS"] = detail::scenario_stats(los_vals);
    report.scenarios["NLOS"] = detail::scenario_stats(nlos_vals);
    report.scenarios["Overall"] = detail::scenario_stats(all_vals);
    return report;
}

}  // namespace sitert
