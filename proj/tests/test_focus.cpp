#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "wnav/classic.hpp"
#include "wnav/error.hpp"
#include "wnav/focus.hpp"
#include "wnav/kdtree.hpp"

using namespace wnav;

namespace {

GridMap open_map(int w, int h, double cs = 1.0) {
    const auto n = static_cast<std::size_t>(w * h);
    return GridMap(w, h, cs, {0, 0}, std::vector<std::uint8_t>(n, 5), std::vector<std::uint8_t>(n, 0));
}

std::vector<CellIndex> row_path(int row, int c0, int c1) {
    std::vector<CellIndex> p;
    for (int c = c0; c <= c1; ++c) p.push_back({c, row});
    return p;
}

double d2(WorldPoint a, WorldPoint b) { return (a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y); }

}  // namespace

TEST(KdTree, NearestAndRangeMatchLinearScan) {
    std::mt19937_64 rng(17);
    const GridMap m = oracle::random_map(rng, 15, 12, 0.3, 0.25);
    std::vector<KdTree::Item> items;
    for (std::size_t i = 0; i < m.cell_count(); ++i) {
        const CellIndex c = m.cell_at(i);
        if (!m.is_obstacle(c)) items.push_back({m.center(c), c});
    }
    const KdTree tree(items);
    std::uniform_real_distribution<double> ux(-0.5, 4.25), uy(-0.5, 3.5), ur(0.05, 1.5);
    for (int q = 0; q < 300; ++q) {
        const WorldPoint p{ux(rng), uy(rng)};
        double best = 1e300;
        CellIndex best_cell{};
        for (const auto& it : items) {
            const double d = d2(it.point, p);
            if (d < best || (d == best && (it.cell.row < best_cell.row ||
                                           (it.cell.row == best_cell.row && it.cell.col < best_cell.col)))) {
                best = d;
                best_cell = it.cell;
            }
        }
        const auto got = tree.nearest(p);
        ASSERT_TRUE(got);
        EXPECT_DOUBLE_EQ(d2(got->point, p), best);
        EXPECT_EQ(got->cell, best_cell);

        const double r = ur(rng);
        std::vector<CellIndex> expect;
        for (const auto& it : items) {
            if (d2(it.point, p) <= r * r) expect.push_back(it.cell);
        }
        std::vector<CellIndex> have;
        for (const auto& it : tree.within(p, r)) have.push_back(it.cell);
        EXPECT_EQ(have, expect);
    }
    EXPECT_FALSE(KdTree().nearest({0, 0}));
}

TEST(FocusArea, MembersMatchSlice) {
    std::mt19937_64 rng(3);
    const GridMap m = oracle::random_map(rng, 12, 12, 0.2, 0.5);
    const WorldPoint c{3.1, 2.2};
    const FocusArea a = make_focus_area(m, c, 1.3);
    std::vector<CellIndex> expect;
    for (const CellGain& g : slice_region(m, c, 1.3)) expect.push_back(g.cell);
    EXPECT_EQ(a.members, expect);
    EXPECT_EQ(a.index.size(), a.members.size());
}

TEST(ArcLength, TwoSamplesAreEndpoints) {
    const GridMap m = open_map(10, 3);
    const auto path = row_path(1, 0, 9);
    EXPECT_EQ(arc_length_samples(m, path, 2), (std::vector<std::size_t>{0, 9}));
    const auto three = arc_length_samples(m, path, 3);
    ASSERT_EQ(three.size(), 3u);
    EXPECT_EQ(three[0], 0u);
    EXPECT_TRUE(three[1] == 4u || three[1] == 5u);
    EXPECT_EQ(three[2], 9u);
    EXPECT_EQ(arc_length_samples(m, path, 1).size(), 1u);
}

TEST(BuildFocus, NClampedWithWarning) {
    const GridMap m = open_map(6, 3);
    const auto path = row_path(1, 0, 3);
    const FocusAreaSet s = build_focus_areas(m, path, 9, 1.0);
    EXPECT_EQ(s.areas().size(), 4u);
    ASSERT_FALSE(s.warnings().empty());
    EXPECT_NE(s.warnings()[0].find("clamped"), std::string::npos);
    EXPECT_EQ(s.source(), FocusSource::kAutoGenerated);
}

TEST(BuildFocus, GapAndDisconnectionWarnings) {
    const GridMap m = open_map(20, 3);
    const auto path = row_path(1, 0, 19);
    const FocusAreaSet s = build_focus_areas(m, path, 2, 1.0);
    bool gap = false, disconnected = false;
    for (const auto& w : s.warnings()) {
        gap = gap || w.find("outside every focus area") != std::string::npos;
        disconnected = disconnected || w.find("disconnected") != std::string::npos;
    }
    EXPECT_TRUE(gap);
    EXPECT_TRUE(disconnected);
    EXPECT_TRUE(build_focus_areas(m, path, 20, 1.0).warnings().empty());
}

TEST(BuildFocus, RejectsBadInput) {
    const GridMap m = open_map(5, 5);
    EXPECT_THROW(build_focus_areas(m, {}, 2, 1.0), InputError);
    EXPECT_THROW(build_focus_areas(m, row_path(0, 0, 4), 0, 1.0), InputError);
    EXPECT_THROW(build_focus_areas(m, row_path(0, 0, 4), 2, 0.0), InputError);
}

TEST(Mask, UnionAndStats) {
    const GridMap m = open_map(10, 10);
    const FocusAreaSet s = focus_areas_from_centers(m, {{1.5, 1.5}, {8.5, 8.5}}, 1.0, FocusSource::kModelProposed);
    const auto mask = s.mask(m);
    std::size_t n = 0;
    for (auto v : mask) n += v;
    EXPECT_EQ(n, 10u);
    EXPECT_EQ(s.member_cells().size(), 10u);
    EXPECT_TRUE(s.contains({1, 1}));
    EXPECT_FALSE(s.contains({5, 5}));
    const MaskStats st = mask_stats(m, s);
    EXPECT_EQ(st.mask_cells, 10u);
    EXPECT_EQ(st.traversable_cells, 100u);
    EXPECT_DOUBLE_EQ(st.reduction_fraction, 0.9);
}

TEST(Mask, SerializationIsLossless) {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 10; ++trial) {
        const GridMap m = oracle::random_map(rng, 14, 11, 0.2, 0.3);
        std::vector<CellIndex> path;
        for (std::size_t i = 0; i < m.cell_count(); ++i) {
            if (!m.is_obstacle(m.cell_at(i))) path.push_back(m.cell_at(i));
            if (path.size() == 12) break;
        }
        FocusAreaSet s = build_focus_areas(m, path, 3, 0.7);
        s.set_key({map_hash(m), path.front(), path.back(), 0.55});
        const nlohmann::json j = to_json(s);
        const FocusAreaSet back = focus_from_json(nlohmann::json::parse(j.dump()), m);
        EXPECT_EQ(to_json(back), j);
        ASSERT_EQ(back.areas().size(), s.areas().size());
        for (std::size_t a = 0; a < s.areas().size(); ++a) {
            EXPECT_EQ(back.areas()[a].members, s.areas()[a].members);
            EXPECT_EQ(back.areas()[a].center, s.areas()[a].center);
            EXPECT_EQ(back.areas()[a].radius, s.areas()[a].radius);
            EXPECT_EQ(back.areas()[a].index.size(), s.areas()[a].index.size());
        }
        EXPECT_EQ(back.mask(m), s.mask(m));
        EXPECT_EQ(back.warnings(), s.warnings());
        EXPECT_EQ(back.key(), s.key());
        EXPECT_EQ(back.source(), s.source());
    }
}

TEST(Mask, UnknownVersionIsRejected) {
    const GridMap m = open_map(4, 4);
    nlohmann::json j = to_json(focus_areas_from_centers(m, {{1.5, 1.5}}, 1.0, FocusSource::kAutoGenerated));
    j["version"] = kMaskFormatVersion + 1;
    EXPECT_THROW(focus_from_json(j, m), VersionError);
}

TEST(Cache, HitsAndBuilds) {
    const GridMap m = open_map(8, 8);
    FocusCache cache;
    const MaskKey k1{map_hash(m), {0, 0}, {7, 7}, 0.5};
    const MaskKey k2{map_hash(m), {0, 0}, {7, 7}, 0.6};
    int calls = 0;
    auto build = [&] {
        ++calls;
        return focus_areas_from_centers(m, {{3.5, 3.5}}, 2.0, FocusSource::kAutoGenerated);
    };
    const FocusAreaSet a = cache.get_or_build(m, k1, build);
    const FocusAreaSet b = cache.get_or_build(m, k1, build);
    EXPECT_EQ(calls, 1);
    EXPECT_EQ(cache.builds(), 1u);
    EXPECT_EQ(cache.hits(), 1u);
    EXPECT_EQ(a.mask(m), b.mask(m));
    cache.get_or_build(m, k2, build);
    EXPECT_EQ(calls, 2);
    EXPECT_FALSE(cache.find(m, {map_hash(m), {1, 0}, {7, 7}, 0.5}));
}

TEST(Cache, DirectoryPersistsAcrossInstances) {
    const auto dir = std::filesystem::temp_directory_path() / "wnav_test_cache";
    std::filesystem::remove_all(dir);
    const GridMap m = open_map(8, 8);
    const MaskKey key{map_hash(m), {0, 0}, {7, 7}, 0.5};
    {
        FocusCache cache(dir);
        cache.put(key, focus_areas_from_centers(m, {{2.5, 2.5}}, 1.5, FocusSource::kModelProposed));
    }
    FocusCache fresh(dir);
    const auto got = fresh.find(m, key);
    ASSERT_TRUE(got);
    EXPECT_EQ(got->source(), FocusSource::kModelProposed);
    EXPECT_EQ(got->areas().size(), 1u);
    std::filesystem::remove_all(dir);
}

TEST(Tune, ReachesReductionNearTargetOnLargeMap) {
    // 3854 traversable cells, comparable to a room-scale radio map.
    const int w = 66, h = 60;
    std::vector<std::uint8_t> obs(static_cast<std::size_t>(w * h), 0);
    int removed = 0;
    for (int r = 25; r < 35 && removed < 106; ++r) {
        for (int c = 28; c < 39 && removed < 106; ++c, ++removed) obs[static_cast<std::size_t>(r * w + c)] = 1;
    }
    const GridMap m(w, h, 0.1, {0, 0}, std::vector<std::uint8_t>(obs.size(), 5), obs);
    ASSERT_EQ(m.traversable_count(), 3854u);
    const PlanResult coarse = plan_astar(m, {{2, 3}, {62, 55}, 0.0});
    ASSERT_TRUE(coarse.found);
    const double r = tune_max_distance(m, coarse.waypoints, 6, 0.48);
    const MaskStats st = mask_stats(m, build_focus_areas(m, coarse.waypoints, 6, r));
    EXPECT_NEAR(st.reduction_fraction, 0.48, 0.15);
    EXPECT_LE(st.reduction_fraction, 0.48);
}
