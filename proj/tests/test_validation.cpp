#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "sitert/validation.hpp"

using namespace sitert;

namespace {

Mpc mpc(double delay_ns, double power_dbm) {
    Mpc m;
    m.delay_s = delay_ns * 1e-9;
    m.power_dbm = power_dbm;
    return m;
}

Pdp pdp_of(std::vector<std::pair<double, double>> delay_ns_power_dbm) {
    Pdp p;
    for (auto [d, pw] : delay_ns_power_dbm) p.entries.push_back({d * 1e-9, dbm_to_mw(pw)});
    return p;
}

// Exhaustive matching oracle: maximize matched count, then minimize total
// gated cost, over every injective assignment.
struct BruteBest {
    int count = -1;
    double cost = 0.0;
};

void brute_match(const std::vector<Mpc>& sim, const std::vector<Mpc>& meas,
                 const MatchParams& params, size_t i, std::vector<char>& used, int count,
                 double cost, BruteBest& best) {
    if (i == sim.size()) {
        if (count > best.count || (count == best.count && cost < best.cost - 1e-12)) {
            best.count = count;
            best.cost = cost;
        }
        return;
    }
    brute_match(sim, meas, params, i + 1, used, count, cost, best);  // leave sim[i] unmatched
    for (size_t j = 0; j < meas.size(); ++j) {
        if (used[j]) continue;
        double dtau = std::abs(sim[i].delay_s - meas[j].delay_s);
        double dp = std::abs(sim[i].power_dbm - meas[j].power_dbm);
        if (dtau > params.gate_delay_s || dp > params.gate_power_db) continue;
        used[j] = true;
        brute_match(sim, meas, params, i + 1, used, count + 1,
                    cost + dtau / params.delay_scale_s + dp / params.power_scale_db, best);
        used[j] = false;
    }
}

}  // namespace

TEST_CASE("dbm/mw conversions round trip") {
    CHECK(dbm_to_mw(0.0) == 1.0);
    CHECK(dbm_to_mw(-30.0) == doctest::Approx(1e-3).epsilon(1e-14));
    CHECK(mw_to_dbm(1.0) == 0.0);
    for (double d : {-110.0, -47.3, 0.0, 13.0})
        CHECK(mw_to_dbm(dbm_to_mw(d)) == doctest::Approx(d).epsilon(1e-12));
}

TEST_CASE("mpc extraction: dynamic range boundary is inclusive") {
    Pdp p = pdp_of({{10, -60.0}, {20, -85.0}, {30, -85.0 - 1e-9}, {5, -70.0}});
    auto mpcs = extract_mpcs(p, 25.0);
    REQUIRE(mpcs.size() == 3);  // -85 kept (exactly peak-25), -85-eps dropped
    CHECK(mpcs[0].delay_s == doctest::Approx(5e-9));  // sorted by delay
    CHECK(mpcs[1].delay_s == doctest::Approx(10e-9));
    CHECK(mpcs[2].delay_s == doctest::Approx(20e-9));
    CHECK(mpcs[2].power_dbm == doctest::Approx(-85.0));

    CHECK(extract_mpcs(Pdp{}, 25.0).empty());
    CHECK_THROWS_AS(extract_mpcs(p, 0.0), InputError);
}

TEST_CASE("matching: identical sets pair exactly with zero cost") {
    std::vector<Mpc> s = {mpc(10, -70), mpc(25, -76), mpc(40, -88)};
    auto out = match_mpcs(s, s);
    REQUIRE(out.pairs.size() == 3);
    CHECK(out.unmatched_sim.empty());
    CHECK(out.unmatched_meas.empty());
    for (const auto& p : out.pairs) CHECK(p.cost == doctest::Approx(0.0));
}

TEST_CASE("matching: normalized L1 cost with default scales") {
    auto out = match_mpcs({mpc(10, -70)}, {mpc(15, -73)});
    REQUIRE(out.pairs.size() == 1);
    // 5 ns / 10 ns + 3 dB / 10 dB
    CHECK(out.pairs[0].cost == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("matching: gates exclude distant pairs") {
    // delay gap 30 ns > 20 ns gate
    auto out = match_mpcs({mpc(10, -70)}, {mpc(40, -70)});
    CHECK(out.pairs.empty());
    CHECK(out.unmatched_sim.size() == 1);
    CHECK(out.unmatched_meas.size() == 1);
    // power gap 30 dB > 25 dB gate
    auto out2 = match_mpcs({mpc(10, -60)}, {mpc(12, -90)});
    CHECK(out2.pairs.empty());
}

TEST_CASE("matching: cardinality beats local greed") {
    // greedy would grab sim2-meas1 (3 ns) and strand sim1; the optimum pairs
    // sim1-meas1 and sim2-meas2
    std::vector<Mpc> sim = {mpc(0, -70), mpc(15, -70)};
    std::vector<Mpc> meas = {mpc(18, -70), mpc(30, -70)};
    auto out = match_mpcs(sim, meas);
    REQUIRE(out.pairs.size() == 2);
    CHECK(out.pairs[0].meas.delay_s == doctest::Approx(18e-9));
    CHECK(out.pairs[1].meas.delay_s == doctest::Approx(30e-9));
}

TEST_CASE("matching agrees with the exhaustive oracle on random instances") {
    std::mt19937 rng(4242);
    std::uniform_int_distribution<int> size_dist(0, 5);
    std::uniform_real_distribution<double> delay(0.0, 80e-9), power(-95.0, -60.0);
    MatchParams params;
    for (int trial = 0; trial < 400; ++trial) {
        std::vector<Mpc> sim, meas;
        int n = size_dist(rng), m = size_dist(rng);
        for (int i = 0; i < n; ++i) sim.push_back({delay(rng), power(rng)});
        for (int j = 0; j < m; ++j) meas.push_back({delay(rng), power(rng)});

        auto out = match_mpcs(sim, meas, params);
        double total = 0.0;
        for (const auto& p : out.pairs) total += p.cost;

        BruteBest best;
        std::vector<char> used(meas.size(), false);
        brute_match(sim, meas, params, 0, used, 0, 0.0, best);

        CHECK(static_cast<int>(out.pairs.size()) == best.count);
        if (static_cast<int>(out.pairs.size()) == best.count)
            CHECK(total == doctest::Approx(best.cost).epsilon(1e-9));
        CHECK(out.pairs.size() + out.unmatched_sim.size() == sim.size());
        CHECK(out.pairs.size() + out.unmatched_meas.size() == meas.size());
    }
}

TEST_CASE("rmse: frozen fixture to 1e-9") {
    std::vector<MpcPair> pairs = {{mpc(10, -70.0), mpc(10, -71.0), 0},
                                  {mpc(20, -80.0), mpc(20, -79.0), 0},
                                  {mpc(30, -65.5), mpc(30, -66.25), 0}};
    auto r = rmse(pairs);
    CHECK_FALSE(r.exact);
    CHECK(r.rmse_linear_mw == doctest::Approx(2.844811338175593e-08).epsilon(1e-9));
    CHECK(r.rmse_db == doctest::Approx(-75.45946529798293).epsilon(1e-9));
    CHECK(r.rmse_db_domain == doctest::Approx(0.924211375534118).epsilon(1e-9));
}

TEST_CASE("rmse: self comparison is exactly zero") {
    std::vector<MpcPair> pairs = {{mpc(10, -70.0), mpc(10, -70.0), 0},
                                  {mpc(20, -81.3), mpc(20, -81.3), 0}};
    auto r = rmse(pairs);
    CHECK(r.exact);
    CHECK(r.rmse_linear_mw == 0.0);
    CHECK(std::isinf(r.rmse_db));
    CHECK(r.rmse_db < 0);
    CHECK(r.rmse_db_domain == 0.0);
    CHECK_THROWS_AS(rmse({}), InputError);
}

TEST_CASE("compare_runs: per-link and scenario statistics") {
    auto link = [](const std::string& id, bool los, Pdp p) {
        LinkPdp l;
        l.link_id = id;
        l.los = los;
        l.freq_hz = 6.75e9;
        l.pdp = std::move(p);
        return l;
    };
    std::vector<LinkPdp> sim = {
        link("a", true, pdp_of({{10, -70}, {25, -78}})),
        link("b", true, pdp_of({{12, -72}})),
        link("c", false, pdp_of({{30, -80}, {45, -90}})),
    };
    std::vector<LinkPdp> meas = {
        link("a", true, pdp_of({{11, -71}, {26, -77}})),
        link("b", true, pdp_of({{12, -74}})),
        link("c", false, pdp_of({{31, -82}, {44, -89}})),
    };
    auto rep = compare_runs(sim, meas);
    REQUIRE(rep.links.size() == 3);
    CHECK(rep.pairs.size() == 5);
    CHECK(rep.unmatched_sim == 0);
    CHECK(rep.unmatched_meas == 0);
    REQUIRE(rep.pooled.has_value());

    const auto& overall = rep.scenarios.at("Overall");
    CHECK(overall.n_links == 3);
    CHECK(rep.scenarios.at("LOS").n_links == 2);
    CHECK(rep.scenarios.at("NLOS").n_links == 1);

    // scenario stats over per-link dB-domain RMSE values
    std::vector<double> vals;
    for (const auto& l : rep.links) vals.push_back(l.rmse->rmse_db_domain);
    double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / vals.size();
    CHECK(overall.mean_db == doctest::Approx(mean).epsilon(1e-12));
    std::sort(vals.begin(), vals.end());
    CHECK(overall.median_db == doctest::Approx(vals[1]).epsilon(1e-12));
    double var = 0;
    for (double v : vals) var += (v - mean) * (v - mean);
    CHECK(overall.std_db == doctest::Approx(std::sqrt(var / 2)).epsilon(1e-12));
    // single-link scenario has zero sample std
    CHECK(rep.scenarios.at("NLOS").std_db == 0.0);
}

TEST_CASE("compare_runs: disjoint link ids are an error naming the ids") {
    LinkPdp a;
    a.link_id = "sim_only";
    a.pdp = pdp_of({{10, -70}});
    LinkPdp b;
    b.link_id = "meas_only";
    b.pdp = pdp_of({{10, -70}});
    CHECK_THROWS_WITH_AS(compare_runs({a}, {b}), doctest::Contains("sim_only"), InputError);
    CHECK_THROWS_AS(compare_runs({}, {b}), InputError);
}

TEST_CASE("compare_runs: extra links on one side are tolerated") {
    LinkPdp a;
    a.link_id = "shared";
    a.pdp = pdp_of({{10, -70}});
    LinkPdp extra;
    extra.link_id = "extra";
    extra.pdp = pdp_of({{10, -70}});
    auto rep = compare_runs({a, extra}, {a});
    // only the shared link produces a report entry
    REQUIRE(rep.links.size() == 1);
    CHECK(rep.links[0].link_id == "shared");
    CHECK(rep.pooled->exact);
}
