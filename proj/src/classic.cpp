#include "wnav/classic.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <queue>

namespace wnav {

namespace {

struct FrontierEntry {
    double f;
    double g;
    std::size_t index;
};

// priority_queue pops the "largest": lowest f, then highest g, then lowest index.
struct FrontierOrder {
    bool operator()(const FrontierEntry& a, const FrontierEntry& b) const noexcept {
        if (a.f != b.f) {
            return a.f > b.f;
        }
        if (a.g != b.g) {
            return a.g < b.g;
        }
        return a.index > b.index;
    }
};

double step_meters(const GridMap& map, const Move& m) {
    return m.diagonal ? std::sqrt(2.0) * map.cell_size() : map.cell_size();
}

}  // namespace

double nwa_objective(const GridMap& map, std::span<const CellIndex> waypoints, double epsilon) {
    double total = 0.0;
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
        const double dc = waypoints[i].col - waypoints[i - 1].col;
        const double dr = waypoints[i].row - waypoints[i - 1].row;
        total += std::hypot(dc, dr) * map.cell_size() + 1.0 / (map.gain(waypoints[i]) + epsilon);
    }
    return total;
}

PlanResult best_first_search(const GridMap& map, const PlanRequest& request, CostModel cost,
                             SearchTrace* trace) {
    validate_request(map, request);
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t n = map.cell_count();
    const WorldPoint goal_center = map.center(request.goal);
    auto heuristic = [&](CellIndex c) {
        const WorldPoint p = map.center(c);
        return std::hypot(p.x - goal_center.x, p.y - goal_center.y);
    };

    constexpr double kInf = std::numeric_limits<double>::infinity();
    constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
    std::vector<double> best_g(n, kInf);
    std::vector<std::size_t> parent(n, kNone);
    std::vector<std::uint8_t> closed(n, 0);
    std::priority_queue<FrontierEntry, std::vector<FrontierEntry>, FrontierOrder> frontier;

    const std::size_t start = map.index(request.start);
    const std::size_t goal = map.index(request.goal);
    best_g[start] = 0.0;
    frontier.push({heuristic(request.start), 0.0, start});
    std::uint64_t expanded = 0;

    while (!frontier.empty()) {
        const FrontierEntry top = frontier.top();
        frontier.pop();
        if (closed[top.index] || top.g > best_g[top.index]) {
            continue;
        }
        closed[top.index] = 1;
        ++expanded;
        const CellIndex cell = map.cell_at(top.index);
        if (trace) {
            trace->expanded.push_back(cell);
            trace->heuristic.push_back(top.f - top.g);
        }
        if (top.index == goal) {
            break;
        }
        for (const Move& m : kMoves) {
            if (!can_step(map, cell, m)) {
                continue;
            }
            const CellIndex next = apply_move(cell, m);
            const std::size_t ni = map.index(next);
            if (closed[ni]) {
                continue;
            }
            double g = top.g + step_meters(map, m);
            if (cost == CostModel::kInverseGain) {
                g += 1.0 / (map.gain(next) + request.epsilon);
            }
            if (g < best_g[ni]) {
                best_g[ni] = g;
                parent[ni] = top.index;
                frontier.push({g + heuristic(next), g, ni});
            }
        }
    }

    std::vector<CellIndex> path;
    if (closed[goal]) {
        for (std::size_t at = goal; at != kNone; at = parent[at]) {
            path.push_back(map.cell_at(at));
        }
        std::reverse(path.begin(), path.end());
    }
    const char* name = cost == CostModel::kDistance ? "A*" : "N-WA*";
    PlanResult result = make_result(map, name, std::move(path), request.threshold);
    result.expanded_states = expanded;
    result.objective = result.found ? best_g[goal] : kInf;
    result.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

PlanResult plan_astar(const GridMap& map, const PlanRequest& request) {
    return best_first_search(map, request, CostModel::kDistance);
}

PlanResult plan_nwa(const GridMap& map, const PlanRequest& request) {
    return best_first_search(map, request, CostModel::kInverseGain);
}

}  // namespace wnav
