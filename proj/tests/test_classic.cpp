#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "wnav/classic.hpp"
#include "wnav/error.hpp"

using namespace wnav;

namespace {

using oracle::Step;

GridMap uniform_map(int w, int h, int units, double cs = 1.0) {
    const auto n = static_cast<std::size_t>(w * h);
    return GridMap(w, h, cs, {0, 0}, std::vector<std::uint8_t>(n, static_cast<std::uint8_t>(units)),
                   std::vector<std::uint8_t>(n, 0));
}

void expect_legal(const GridMap& m, const std::vector<CellIndex>& p) {
    for (const CellIndex& c : p) ASSERT_TRUE(m.traversable(c));
    for (std::size_t i = 1; i < p.size(); ++i) {
        bool ok = false;
        for (const Step& s : oracle::neighbors(m, p[i - 1])) ok = ok || s.to == p[i];
        ASSERT_TRUE(ok) << "illegal step at " << i;
    }
}

}  // namespace

TEST(AStar, DiagonalOfThreeByThree) {
    const GridMap m = uniform_map(3, 3, 5);
    const PlanResult r = plan_astar(m, {{0, 0}, {2, 2}, 0.0});
    ASSERT_TRUE(r.found);
    EXPECT_EQ(r.waypoints.size(), 3u);
    EXPECT_NEAR(r.path_length_m, 2.0 * std::sqrt(2.0), 1e-12);
    EXPECT_EQ(r.steps, (StepCount{0, 2}));
}

TEST(AStar, AdjacentGoalIsOneStep) {
    const GridMap m = uniform_map(4, 4, 3, 0.5);
    const PlanResult r = plan_astar(m, {{1, 1}, {2, 1}, 0.0});
    ASSERT_EQ(r.waypoints.size(), 2u);
    EXPECT_DOUBLE_EQ(r.path_length_m, 0.5);
}

TEST(AStar, NoCornerCutting) {
    // Two obstacles touching diagonally block the diagonal step between them.
    std::vector<std::uint8_t> obs(9, 0);
    obs[1] = 1;  // (1,0)
    obs[3] = 1;  // (0,1)
    const GridMap m(3, 3, 1.0, {0, 0}, std::vector<std::uint8_t>(9, 5), obs);
    const PlanResult r = plan_astar(m, {{0, 0}, {1, 1}, 0.0});
    EXPECT_FALSE(r.found);
}

TEST(AStar, ReportsButIgnoresThreshold) {
    const GridMap m = uniform_map(5, 1, 2);
    const PlanResult r = plan_astar(m, {{0, 0}, {4, 0}, 0.9});
    ASSERT_TRUE(r.found);
    EXPECT_FALSE(r.feasible);
    EXPECT_DOUBLE_EQ(r.avg_gain, 0.2);
}

TEST(AStar, InvalidRequestsThrow) {
    const GridMap m = uniform_map(3, 3, 5);
    EXPECT_THROW(plan_astar(m, {{0, 0}, {0, 0}, 0.0}), InputError);
    EXPECT_THROW(plan_astar(m, {{0, 0}, {5, 0}, 0.0}), InputError);
    EXPECT_THROW(plan_astar(m, {{0, 0}, {1, 0}, 1.5}), InputError);
}

TEST(AStar, LengthMatchesDijkstraOnRandomMaps) {
    std::mt19937_64 rng(1234);
    int checked = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const GridMap m = oracle::random_map(rng, 8, 8, 0.25);
        const auto ends = oracle::random_endpoints(rng, m);
        if (!ends) continue;
        const auto [s, g] = *ends;
        const auto ref = oracle::dijkstra_length(m, s, g);
        const PlanResult r = plan_astar(m, {s, g, 0.0});
        ASSERT_EQ(r.found, ref.has_value()) << "trial " << trial;
        if (ref) {
            EXPECT_NEAR(r.steps.cells(), *ref, 1e-9) << "trial " << trial;
            expect_legal(m, r.waypoints);
            EXPECT_EQ(r.waypoints.front(), s);
            EXPECT_EQ(r.waypoints.back(), g);
        }
        ++checked;
    }
    EXPECT_GE(checked, 100);
}

TEST(AStar, TraceRecordsHeuristicPerExpansion) {
    std::mt19937_64 rng(77);
    const GridMap m = oracle::random_map(rng, 10, 10, 0.15);
    const auto ends = oracle::random_endpoints(rng, m);
    ASSERT_TRUE(ends);
    SearchTrace trace;
    best_first_search(m, {ends->first, ends->second, 0.0}, CostModel::kDistance, &trace);
    ASSERT_EQ(trace.expanded.size(), trace.heuristic.size());
    for (double h : trace.heuristic) EXPECT_GE(h, 0.0);
}

TEST(Nwa, SingleStepIncrement) {
    // gain 0.5 entered cell adds 1/(0.5 + 1e-6) on top of the step length.
    std::vector<std::uint8_t> units{5, 5};
    const GridMap m(2, 1, 1.0, {0, 0}, units, std::vector<std::uint8_t>(2, 0));
    const PlanResult r = plan_nwa(m, {{0, 0}, {1, 0}, 0.0, 1e-6});
    ASSERT_TRUE(r.found);
    EXPECT_NEAR(r.objective, 1.0 + 1.0 / 0.500001, 1e-12);
    EXPECT_NEAR(r.objective, 2.999996, 1e-6);
}

TEST(Nwa, UniformCorridorMatchesAStarLength) {
    const GridMap m = uniform_map(7, 1, 6, 0.3);
    const PlanRequest req{{0, 0}, {6, 0}, 0.0};
    EXPECT_DOUBLE_EQ(plan_nwa(m, req).path_length_m, plan_astar(m, req).path_length_m);
}

TEST(Nwa, ObjectiveMatchesBruteForceOnRandomMaps) {
    std::mt19937_64 rng(4321);
    int checked = 0;
    for (int trial = 0; trial < 150; ++trial) {
        const GridMap m = oracle::random_map(rng, 6, 6, 0.15, 0.2);
        const auto ends = oracle::random_endpoints(rng, m);
        if (!ends) continue;
        const double eps = 1e-6;
        const auto ref = oracle::nwa_min_objective(m, ends->first, ends->second, eps);
        const PlanResult r = plan_nwa(m, {ends->first, ends->second, 0.0, eps});
        ASSERT_EQ(r.found, ref.has_value());
        if (ref) {
            EXPECT_NEAR(r.objective, *ref, 1e-6 * std::max(1.0, *ref)) << "trial " << trial;
            EXPECT_NEAR(nwa_objective(m, r.waypoints, eps), r.objective, 1e-9 * std::max(1.0, r.objective));
            expect_legal(m, r.waypoints);
        }
        ++checked;
    }
    EXPECT_GE(checked, 100);
}

TEST(Nwa, PrefersHigherGainDetour) {
    // Straight row of low gain, a parallel row of high gain one step away.
    std::vector<std::uint8_t> units{1, 1, 1, 1, 1, 9, 9, 9, 9, 9};
    const GridMap m(5, 2, 1.0, {0, 0}, units, std::vector<std::uint8_t>(10, 0));
    const PlanRequest req{{0, 0}, {4, 0}, 0.0};
    const PlanResult a = plan_astar(m, req);
    const PlanResult n = plan_nwa(m, req);
    EXPECT_GT(n.avg_gain, a.avg_gain);
    EXPECT_GE(n.path_length_m, a.path_length_m);
}
