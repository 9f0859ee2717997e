#include <cmath>
#include <random>

#include "doctest.h"
#include "support/approx.hpp"
#include "groke/metrics.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace groke;
using namespace groke::testing;

namespace {

std::shared_ptr<MapGraph> micro_graph() {
    // a 6x6 lattice gives plenty of distinct coordinates for trajectories
    return make_lattice(6);
}

std::vector<NodeId> random_traj(const MapGraph& g, std::mt19937_64& rng, std::size_t len) {
    // random walk over edges so consecutive nodes stay connected
    const auto& nodes = g.nodes();
    NodeId cur = nodes[rng() % nodes.size()].id;
    std::vector<NodeId> out{cur};
    while (out.size() < len) {
        const auto& edges = g.node(cur).out_edges;
        cur = edges[rng() % edges.size()].target;
        out.push_back(cur);
    }
    return out;
}

}  // namespace

TEST_CASE("identical trajectories score perfectly") {
    auto g = micro_graph();
    const std::vector<NodeId> traj{"r00c00", "r00c01", "r00c02"};
    const auto s = score(traj, traj, *g);
    CHECK(s.ne == 0.0);
    CHECK(s.sr == 1);
    CHECK(s.osr == 1);
    CHECK(s.ndtw == 1.0);
    CHECK(s.sdtw == 1.0);
}

TEST_CASE("a final node 30 m away fails both sr and osr") {
    // lattice spacing is ~20 m; r00c00 -> r00c02 is ~40 m, r00c01 ~20 m
    auto g = micro_graph();
    const std::vector<NodeId> gt{"r03c00", "r03c01", "r03c02"};
    const std::vector<NodeId> agent{"r00c00", "r00c01"};  // 3 rows = ~60 m away
    const auto s = score(agent, gt, *g);
    CHECK(s.ne > 25.0);
    CHECK(s.sr == 0);
    CHECK(s.osr == 0);
    CHECK(s.sdtw == 0.0);
}

TEST_CASE("success radius is inclusive at the exact boundary") {
    // two synthetic points ~25 m apart on the equator
    const double deg = 25.0 / (kEarthRadiusMeters * M_PI / 180.0);
    std::vector<GraphNode> wired(3);
    wired[0] = {"goalward", {0.0, 0.0}, {{"exact", Heading{}}}, {}};
    wired[1] = {"exact", {0.0, deg}, {{"goalward", Heading{}}, {"beyond", Heading{}}}, {}};
    wired[2] = {"beyond", {0.0, 2.0 * deg}, {{"exact", Heading{}}}, {}};
    MapGraph g(std::move(wired), {});

    const double d = haversine_distance(g.node("goalward").position, g.node("exact").position);
    CHECK(approx_eq(d, 25.0, 1e-6));

    // ne lands bitwise on the threshold: success must be inclusive
    const auto at_boundary = score({"exact"}, {"exact", "goalward"}, g, d);
    CHECK(at_boundary.ne == d);
    CHECK(at_boundary.sr == 1);
    CHECK(at_boundary.osr == 1);

    const auto outside = score({"beyond"}, {"exact", "goalward"}, g, d);
    CHECK(outside.sr == 0);
    const auto nudged = score({"exact"}, {"exact", "goalward"}, g,
                              std::nextafter(d, 0.0));  // threshold just below ne
    CHECK(nudged.sr == 0);
}

TEST_CASE("ndtw equals the full-table oracle on 200 random pairs") {
    auto g = micro_graph();
    std::mt19937_64 rng(555);
    for (int trial = 0; trial < 200; ++trial) {
        const auto agent = random_traj(*g, rng, 2 + rng() % 7);
        const auto gt = random_traj(*g, rng, 2 + rng() % 7);
        const auto s = score(agent, gt, *g);

        std::vector<GeoPoint> pa, pg;
        for (const auto& id : agent) pa.push_back(g->node(id).position);
        for (const auto& id : gt) pg.push_back(g->node(id).position);
        const double want = std::exp(-oracle_dtw_full_table(pa, pg) /
                                     (static_cast<double>(pg.size()) * 25.0));
        CHECK(approx_eq(s.ndtw, want, 1e-12));
        CHECK(s.ndtw > 0.0);
        CHECK(s.ndtw <= 1.0);
        CHECK(s.sdtw == s.sr * s.ndtw);
    }
}

TEST_CASE("dtw cost is symmetric") {
    auto g = micro_graph();
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<GeoPoint> a, b;
        for (std::size_t i = 0; i < 2 + rng() % 6; ++i)
            a.push_back(g->nodes()[rng() % g->node_count()].position);
        for (std::size_t i = 0; i < 2 + rng() % 6; ++i)
            b.push_back(g->nodes()[rng() % g->node_count()].position);
        CHECK(approx_eq(dtw_cost(a, b), dtw_cost(b, a), 1e-9));
    }
}

TEST_CASE("moving the final node farther never helps") {
    auto g = micro_graph();
    const std::vector<NodeId> gt{"r05c00", "r05c01", "r05c02"};
    // agent paths ending progressively farther from the goal r05c02
    double prev_ne = -1.0;
    int prev_sr = 2;
    for (const char* end : {"r05c02", "r05c03", "r05c04", "r05c05"}) {
        const std::vector<NodeId> agent{"r05c00", "r05c01", end};
        const auto s = score(agent, gt, *g);
        CHECK(s.ne >= prev_ne);
        CHECK(s.sr <= prev_sr);
        prev_ne = s.ne;
        prev_sr = s.sr;
    }
}

TEST_CASE("aggregate means and percentages") {
    TrajectoryScore a{.ne = 0.0, .sr = 1, .osr = 1, .ndtw = 1.0, .sdtw = 1.0};
    TrajectoryScore b{.ne = 50.0, .sr = 0, .osr = 1, .ndtw = 0.5, .sdtw = 0.0};
    auto rep = aggregate({a, b});
    CHECK(rep.count == 2);
    CHECK(rep.sr_pct == 50.0);
    CHECK(rep.osr_pct == 100.0);
    CHECK(rep.mean_ne == 25.0);
    CHECK(rep.mean_ndtw == 0.75);

    auto solo = aggregate({a});
    CHECK(solo.mean_ne == 0.0);
    CHECK(solo.sr_pct == 100.0);
    CHECK(solo.mean_ndtw == 1.0);

    std::vector<std::string> tags{"easy", "hard"};
    auto tagged = aggregate({a, b}, &tags);
    REQUIRE(tagged.by_tag.count("easy") == 1);
    CHECK(tagged.by_tag["easy"].sr_pct == 100.0);
    CHECK(tagged.by_tag["hard"].sr_pct == 0.0);
}

TEST_CASE("aggregate matches an independent recomputation on random scores") {
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<TrajectoryScore> scores;
    for (int i = 0; i < 50; ++i) {
        TrajectoryScore s;
        s.ne = 300.0 * unit(rng);
        s.sr = unit(rng) < 0.3 ? 1 : 0;
        s.osr = s.sr || unit(rng) < 0.2 ? 1 : 0;
        s.ndtw = unit(rng);
        s.sdtw = s.sr * s.ndtw;
        scores.push_back(s);
    }
    const auto rep = aggregate(scores);
    double ne = 0, sr = 0, osr = 0, ndtw = 0, sdtw = 0;
    for (const auto& s : scores) {
        ne += s.ne; sr += s.sr; osr += s.osr; ndtw += s.ndtw; sdtw += s.sdtw;
    }
    const double n = 50.0;
    CHECK(approx_eq(rep.mean_ne, ne / n, 1e-12));
    CHECK(approx_eq(rep.sr_pct, 100.0 * sr / n, 1e-12));
    CHECK(approx_eq(rep.osr_pct, 100.0 * osr / n, 1e-12));
    CHECK(approx_eq(rep.mean_ndtw, ndtw / n, 1e-12));
    CHECK(approx_eq(rep.mean_sdtw, sdtw / n, 1e-12));
}

TEST_CASE("correlate endpoints") {
    std::vector<double> x{1, 2, 3, 4, 5};
    std::vector<double> y{2, 4, 6, 8, 10};
    auto r = correlate(x, y);
    CHECK(approx_eq(r.pearson_r, 1.0, 1e-12));
    CHECK(approx_eq(r.spearman_rho, 1.0, 1e-12));
    CHECK(approx_eq(r.pearson_p, 0.0, 1e-9));

    std::vector<double> neg{-1, -2, -3, -4, -5};
    CHECK(approx_eq(correlate(x, neg).pearson_r, -1.0, 1e-12));

    std::vector<double> constant{3, 3, 3, 3, 3};
    CHECK_THROWS_AS(correlate(x, constant), std::domain_error);
    CHECK_THROWS_AS(correlate({1, 2}, {3, 4}), std::domain_error);
}

TEST_CASE("midranks handle ties like the sorting oracle") {
    std::vector<double> tied{3.0, 1.0, 3.0, 2.0, 3.0, 1.0};
    CHECK(midranks(tied) == oracle_average_ranks(tied));
    // hand check: 1.0 -> ranks 1,2 -> 1.5; 2.0 -> 3; 3.0 -> 4,5,6 -> 5
    CHECK(midranks(tied) == std::vector<double>{5.0, 1.5, 5.0, 3.0, 5.0, 1.5});

    std::mt19937_64 rng(20);
    std::uniform_int_distribution<int> small(0, 5);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> v;
        for (int i = 0; i < 20; ++i) v.push_back(small(rng));
        CHECK(midranks(v) == oracle_average_ranks(v));
    }
}

TEST_CASE("spearman equals pearson on midranks, validated against the oracle") {
    std::mt19937_64 rng(2718);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> x, y;
    for (int i = 0; i < 20; ++i) {
        const double v = noise(rng);
        x.push_back(std::round(v * 2.0) / 2.0);  // introduce ties
        y.push_back(0.5 * v + noise(rng));
    }
    const auto r = correlate(x, y);
    const double want = oracle_pearson(oracle_average_ranks(x), oracle_average_ranks(y));
    CHECK(approx_eq(r.spearman_rho, want, 1e-12));
}

TEST_CASE("permutation mode p-values roughly agree with the t approximation") {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> x, y;
    for (int i = 0; i < 60; ++i) {
        const double v = noise(rng);
        x.push_back(v);
        y.push_back(0.4 * v + noise(rng));
    }
    const auto analytic = correlate(x, y);
    const auto permuted = correlate(x, y, 2000, 7);
    CHECK(permuted.pearson_r == analytic.pearson_r);
    CHECK(std::fabs(permuted.pearson_p - analytic.pearson_p) < 0.05);
}
