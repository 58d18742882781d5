#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "wnav/grid.hpp"

namespace wnav {

// Movement model ---------------------------------------------------------------

struct Move {
    int dcol;
    int drow;
    bool diagonal;
    const char* name;
};

/// The eight moves in fixed compass order. North is toward row 0.
inline constexpr std::array<Move, 8> kMoves{{
    {0, -1, false, "N"},
    {1, -1, true, "NE"},
    {1, 0, false, "E"},
    {1, 1, true, "SE"},
    {0, 1, false, "S"},
    {-1, 1, true, "SW"},
    {-1, 0, false, "W"},
    {-1, -1, true, "NW"},
}};

inline CellIndex apply_move(CellIndex c, const Move& m) noexcept {
    return {c.col + m.dcol, c.row + m.drow};
}

/// A move is legal when its target is traversable and, for diagonals, both
/// orthogonally adjacent cells are traversable (no corner cutting).
bool can_step(const GridMap& map, CellIndex from, const Move& move) noexcept;

/// True when `a` and `b` differ and are 8-neighbors.
bool adjacent8(CellIndex a, CellIndex b) noexcept;

/// Exact path length in cells: straight + diagonal * sqrt(2).
///
/// Comparisons are exact (sqrt(2) is irrational), which keeps optimal-cost
/// equality checks and tie-breaking free of rounding noise.
struct StepCount {
    std::int32_t straight = 0;
    std::int32_t diagonal = 0;

    double cells() const noexcept;
    double meters(double cell_size) const noexcept { return cells() * cell_size; }

    StepCount operator+(const StepCount& o) const noexcept {
        return {straight + o.straight, diagonal + o.diagonal};
    }
    friend bool operator==(const StepCount&, const StepCount&) = default;
    friend bool operator<(const StepCount& a, const StepCount& b) noexcept;
};

StepCount step_of(const Move& m) noexcept;

// Requests and results ------------------------------------------------------------

struct PlanRequest {
    CellIndex start;
    CellIndex goal;
    /// Average-gain threshold G in [0, 1].
    double threshold = 0.0;
    /// Offset in the inverse-gain penalty of N-WA*.
    double epsilon = 1e-6;
};

/// Throws InputError unless start/goal are distinct traversable cells and the
/// threshold and epsilon are in range.
void validate_request(const GridMap& map, const PlanRequest& request);

struct PlanResult {
    std::string algorithm;
    /// A path was produced. False for infeasibility results.
    bool found = false;
    std::vector<CellIndex> waypoints;
    double path_length_m = 0.0;
    double avg_gain = 0.0;
    double runtime_s = 0.0;
    /// avg_gain >= threshold (with 1e-9 slack).
    bool feasible = false;
    std::uint64_t expanded_states = 0;
    StepCount steps;
    /// Planner objective at the returned path (N-WA*: modified cost).
    double objective = 0.0;
    std::optional<int> horizon;
    std::uint64_t pruned_states = 0;
    /// For constrained planners that found nothing: best reachable average gain.
    std::optional<double> best_avg_gain;
};

double path_length_m(const GridMap& map, std::span<const CellIndex> waypoints);
StepCount path_steps(std::span<const CellIndex> waypoints);
/// Mean gain over every waypoint (revisits count once per visit).
double average_gain(const GridMap& map, std::span<const CellIndex> waypoints);
bool meets_threshold(double avg_gain, double threshold) noexcept;

/// Fills path metrics for `waypoints`; `found` is set when waypoints is non-empty.
PlanResult make_result(const GridMap& map, std::string algorithm,
                       std::vector<CellIndex> waypoints, double threshold);

nlohmann::json to_json(const PlanResult& result);
PlanResult plan_result_from_json(const nlohmann::json& j);

}  // namespace wnav
