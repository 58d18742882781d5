#pragma once

#include <vector>

#include "wnav/grid.hpp"
#include "wnav/plan.hpp"

namespace wnav {

/// Edge cost used by the best-first search.
enum class CostModel {
    /// Euclidean step length.
    kDistance,
    /// Euclidean step length plus 1 / (gain(entered cell) + epsilon).
    kInverseGain,
};

/// Cells in the order the search closed them, with the heuristic value used.
struct SearchTrace {
    std::vector<CellIndex> expanded;
    std::vector<double> heuristic;
};

/// Best-first search over the 8-connected grid with the Euclidean distance
/// heuristic. Frontier ties on f are broken by larger g, then by lower
/// row-major cell index. No path yields a result with found == false.
PlanResult best_first_search(const GridMap& map, const PlanRequest& request, CostModel cost,
                             SearchTrace* trace = nullptr);

/// Shortest Euclidean path; the gain threshold is reported, never enforced.
PlanResult plan_astar(const GridMap& map, const PlanRequest& request);

/// Naive wireless-aware A*: each entered cell adds 1 / (gain + epsilon) to
/// the path cost. Biased toward high gain but blind to the threshold.
PlanResult plan_nwa(const GridMap& map, const PlanRequest& request);

/// Modified N-WA* objective of an arbitrary waypoint sequence.
double nwa_objective(const GridMap& map, std::span<const CellIndex> waypoints, double epsilon);

}  // namespace wnav
