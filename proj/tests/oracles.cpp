#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <tuple>

namespace oracle {

namespace {

bool open_cell(const GridMap& map, int col, int row) {
    return col >= 0 && row >= 0 && col < map.width() && row < map.height() && !map.is_obstacle({col, row});
}

}  // namespace

std::vector<Step> neighbors(const GridMap& map, CellIndex c) {
    std::vector<Step> out;
    for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
            if (dc == 0 && dr == 0) continue;
            if (!open_cell(map, c.col + dc, c.row + dr)) continue;
            if (dc != 0 && dr != 0 && (!open_cell(map, c.col + dc, c.row) || !open_cell(map, c.col, c.row + dr))) {
                continue;
            }
            out.push_back({{c.col + dc, c.row + dr}, (dc != 0 && dr != 0) ? std::sqrt(2.0) : 1.0});
        }
    }
    return out;
}

std::optional<double> dijkstra_length(const GridMap& map, CellIndex start, CellIndex goal) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(map.cell_count(), inf);
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[map.index(start)] = 0.0;
    pq.push({0.0, map.index(start)});
    while (!pq.empty()) {
        const auto [d, i] = pq.top();
        pq.pop();
        if (d > dist[i]) continue;
        const CellIndex c = map.cell_at(i);
        if (c == goal) return d;
        for (const Step& s : neighbors(map, c)) {
            const std::size_t j = map.index(s.to);
            if (d + s.length < dist[j]) {
                dist[j] = d + s.length;
                pq.push({dist[j], j});
            }
        }
    }
    return std::nullopt;
}

std::optional<double> nwa_min_objective(const GridMap& map, CellIndex start, CellIndex goal, double eps) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> best(map.cell_count(), inf);
    best[map.index(start)] = 0.0;
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < map.cell_count(); ++i) {
            if (best[i] == inf) continue;
            for (const Step& s : neighbors(map, map.cell_at(i))) {
                const double c = best[i] + s.length * map.cell_size() + 1.0 / (map.gain(s.to) + eps);
                const std::size_t j = map.index(s.to);
                if (c < best[j] - 1e-12) {
                    best[j] = c;
                    changed = true;
                }
            }
        }
    }
    const double g = best[map.index(goal)];
    if (g == inf) return std::nullopt;
    return g;
}

namespace {

struct WalkSearch {
    const GridMap& map;
    CellIndex goal;
    double threshold;
    int horizon;
    std::optional<WalkResult> best;
    // Cheapest cost seen for (cell index, step, gain sum); a costlier arrival is dominated.
    std::map<std::tuple<std::size_t, int, int>, double> seen;

    static int chebyshev(CellIndex a, CellIndex b) {
        return std::max(std::abs(a.col - b.col), std::abs(a.row - b.row));
    }

    // Octile distance in cells: a lower bound on remaining cost.
    static double octile(CellIndex a, CellIndex b) {
        const int dx = std::abs(a.col - b.col);
        const int dy = std::abs(a.row - b.row);
        return std::abs(dx - dy) + std::sqrt(2.0) * std::min(dx, dy);
    }

    bool meets(int units, int steps) const {
        return static_cast<double>(units) / (10.0 * (steps + 1)) >= threshold - 1e-9;
    }

    void visit(CellIndex c, int k, int units, double cost) {
        if (best && cost >= best->cost_cells - 1e-9) return;
        const auto key = std::make_tuple(map.index(c), k, units);
        if (auto it = seen.find(key); it != seen.end() && it->second <= cost + 1e-12) return;
        seen[key] = cost;

        if (c == goal && meets(units, k)) {
            if (!best || cost < best->cost_cells - 1e-9) {
                best = WalkResult{cost, k, units};
            }
            return;  // any extension costs more
        }
        if (k == horizon) return;
        const int remaining = horizon - k;
        if (chebyshev(c, goal) > remaining) return;
        // Even earning the maximum on every remaining step cannot reach the threshold.
        if (units + 10 * remaining < 10.0 * threshold * (horizon + 1) - 1e-9) return;
        if (best && cost + octile(c, goal) >= best->cost_cells - 1e-9) return;

        for (const Step& s : neighbors(map, c)) {
            visit(s.to, k + 1, units + map.gain_units(s.to), cost + s.length);
        }
    }
};

}  // namespace

std::optional<WalkResult> constrained_walk(const GridMap& map, CellIndex start, CellIndex goal, double threshold,
                                           int horizon) {
    WalkSearch search{map, goal, threshold, horizon, std::nullopt, {}};
    search.visit(start, 0, map.gain_units(start), 0.0);
    return search.best;
}

GridMap random_map(std::mt19937_64& rng, int width, int height, double p_obstacle, double cell_size) {
    std::uniform_int_distribution<int> gain(0, 10);
    std::bernoulli_distribution wall(p_obstacle);
    std::vector<std::uint8_t> units(static_cast<std::size_t>(width * height));
    std::vector<std::uint8_t> obstacles(units.size());
    for (std::size_t i = 0; i < units.size(); ++i) {
        units[i] = static_cast<std::uint8_t>(gain(rng));
        obstacles[i] = wall(rng) ? 1 : 0;
    }
    return GridMap(width, height, cell_size, {0.0, 0.0}, std::move(units), std::move(obstacles));
}

std::optional<std::pair<CellIndex, CellIndex>> random_endpoints(std::mt19937_64& rng, const GridMap& map) {
    std::vector<CellIndex> open;
    for (std::size_t i = 0; i < map.cell_count(); ++i) {
        if (!map.is_obstacle(map.cell_at(i))) open.push_back(map.cell_at(i));
    }
    if (open.size() < 2) return std::nullopt;
    std::uniform_int_distribution<std::size_t> pick(0, open.size() - 1);
    const std::size_t a = pick(rng);
    std::size_t b = pick(rng);
    while (b == a) b = pick(rng);
    return std::make_pair(open[a], open[b]);
}

}  // namespace oracle
