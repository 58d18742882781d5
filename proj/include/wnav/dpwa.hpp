#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "wnav/grid.hpp"
#include "wnav/plan.hpp"

namespace wnav {

class FocusAreaSet;

/// Policy codes stored per DP state: terminate at the goal, or move kMoves[code - 1].
inline constexpr std::uint8_t kActionTerminate = 0;
inline constexpr std::uint8_t kActionNone = 0xFF;

struct DpState {
    CellIndex cell;
    int step = 0;
    /// Accumulated gain of the waypoints p_0..p_step, in tenths.
    int gain_units = 0;
};

/// Lowest accumulated gain (tenths) a state at `step` may hold and still reach
/// the threshold by the horizon when every remaining step earns the maximum
/// gain. States below it are pruned.
int pruning_floor(double threshold, int horizon, int step) noexcept;

/// Accumulated gain (tenths) needed to terminate at the goal after `step` steps.
int termination_requirement(double threshold, int step) noexcept;

/// Backward-induction table over (cell, step, accumulated gain).
///
/// Layers are filled from step T down to 0. Values are exact step counts;
/// infinity is represented by `kUnreachable`. Values of layers other than 0
/// are only available when the table was solved with `retain_values`.
class DpTable {
public:
    static constexpr StepCount kUnreachable{std::numeric_limits<std::int32_t>::max(), 0};

    int horizon() const noexcept { return horizon_; }
    double threshold() const noexcept { return threshold_; }
    CellIndex goal() const noexcept { return goal_; }
    bool admitted(CellIndex c) const noexcept;
    /// Lowest and highest gain level evaluated at `step`.
    int gain_floor(int step) const noexcept { return floor_[static_cast<std::size_t>(step)]; }
    int gain_ceiling(int step) const noexcept { return kGainUnitsPerOne * (step + 1); }
    bool values_retained() const noexcept { return retained_; }

    /// Cost-to-go in cells. kUnreachable outside the evaluated range.
    StepCount value(const DpState& s) const;
    std::uint8_t policy(const DpState& s) const;

    std::uint64_t expanded_states() const noexcept { return expanded_; }
    std::uint64_t pruned_states() const noexcept { return pruned_; }

    /// Follows stored actions from (start, 0, gain(start)); empty when infeasible.
    std::vector<CellIndex> extract_path(CellIndex start, int start_units) const;

private:
    friend DpTable solve_dp_table(const GridMap&, const PlanRequest&, int,
                                  std::span<const std::uint8_t>, bool, bool);

    std::size_t slot(CellIndex c) const noexcept;
    std::size_t offset(const DpState& s) const;

    int width_ = 0;
    int horizon_ = 0;
    double threshold_ = 0.0;
    CellIndex goal_;
    bool retained_ = false;
    std::vector<std::int32_t> slot_of_cell_;  // -1 when not admitted
    std::vector<std::uint8_t> cell_gain_;     // per slot, tenths
    std::size_t admitted_count_ = 0;
    std::vector<int> floor_;
    std::vector<std::size_t> layer_base_;     // offset of each layer in policy_/values_
    std::vector<std::uint8_t> policy_;
    std::vector<StepCount> values_;           // all layers when retained, else layer 0 only
    std::uint64_t expanded_ = 0;
    std::uint64_t pruned_ = 0;
};

/// Fills the DP table for a fixed horizon. `admitted` (cell-count bytes,
/// non-zero = admitted) restricts the positions; empty admits every
/// traversable cell. Diagonal moves still test corner cutting against the
/// map's obstacles only.
DpTable solve_dp_table(const GridMap& map, const PlanRequest& request, int horizon,
                       std::span<const std::uint8_t> admitted = {}, bool prune = true,
                       bool retain_values = false);

struct DpOptions {
    /// Fixed horizon; nullopt selects it automatically.
    std::optional<int> horizon;
    bool prune = true;
};

/// Initial horizon: ceil(2 * Euclidean cell distance), at least the Chebyshev distance.
int auto_horizon(CellIndex start, CellIndex goal) noexcept;

/// Shortest path of at most T steps whose average gain meets the threshold.
///
/// With an automatic horizon the search doubles T (capped at the admitted cell
/// count) until a feasible path appears or the threshold is provably out of
/// reach. Infeasibility results carry the best average gain any walk of the
/// final horizon could reach at the goal.
PlanResult plan_dpwa(const GridMap& map, const PlanRequest& request, const DpOptions& options = {});

/// plan_dpwa restricted to `mask` (cell-count bytes) intersected with the traversable cells.
PlanResult plan_dpwa_masked(const GridMap& map, const PlanRequest& request,
                            std::span<const std::uint8_t> mask, const DpOptions& options = {});
PlanResult plan_dpwa_masked(const GridMap& map, const PlanRequest& request,
                            const FocusAreaSet& mask, const DpOptions& options = {});

/// Full table capacity: traversable cells x (T + 1) steps x (10 (T + 1) + 1) gain levels.
std::uint64_t state_count(const GridMap& map, int horizon) noexcept;
/// Capacity of a single time layer: traversable cells x (10 (T + 1) + 1).
std::uint64_t layer_state_count(const GridMap& map, int horizon) noexcept;

}  // namespace wnav
