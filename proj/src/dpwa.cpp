#include "wnav/dpwa.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "wnav/error.hpp"
#include "wnav/focus.hpp"

namespace wnav {

namespace {

int required_units(double threshold, int waypoints) noexcept {
    // ceil(10 * G * n), robust to representation error in G.
    const double exact = threshold * kGainUnitsPerOne * waypoints;
    return static_cast<int>(std::ceil(exact - 1e-9));
}

bool unreachable(const StepCount& v) noexcept { return v == DpTable::kUnreachable; }

struct Neighbor {
    std::uint8_t action;
    std::uint32_t slot;
    std::uint8_t gain;
    StepCount step;
};

std::vector<std::uint8_t> admitted_cells(const GridMap& map, std::span<const std::uint8_t> mask) {
    if (!mask.empty() && mask.size() != map.cell_count()) {
        throw InputError("mask must have one entry per map cell");
    }
    std::vector<std::uint8_t> out(map.cell_count(), 0);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const CellIndex c = map.cell_at(i);
        out[i] = !map.is_obstacle(c) && (mask.empty() || mask[i] != 0) ? 1 : 0;
    }
    return out;
}

void require_admitted(const GridMap& map, const std::vector<std::uint8_t>& admitted, CellIndex c,
                      const char* which) {
    if (!admitted[map.index(c)]) {
        std::ostringstream os;
        os << which << " (" << c.col << ", " << c.row << ") lies outside the search mask";
        throw InputError(os.str());
    }
}

}  // namespace

int pruning_floor(double threshold, int horizon, int step) noexcept {
    return std::max(0, required_units(threshold, horizon + 1) - kGainUnitsPerOne * (horizon - step));
}

int termination_requirement(double threshold, int step) noexcept {
    return required_units(threshold, step + 1);
}

bool DpTable::admitted(CellIndex c) const noexcept {
    if (c.col < 0 || c.row < 0 || c.col >= width_) {
        return false;
    }
    const std::size_t i = static_cast<std::size_t>(c.row) * width_ + c.col;
    return i < slot_of_cell_.size() && slot_of_cell_[i] >= 0;
}

std::size_t DpTable::slot(CellIndex c) const noexcept {
    return static_cast<std::size_t>(slot_of_cell_[static_cast<std::size_t>(c.row) * width_ + c.col]);
}

std::size_t DpTable::offset(const DpState& s) const {
    const int lo = gain_floor(s.step);
    const int w = gain_ceiling(s.step) - lo + 1;
    return layer_base_[static_cast<std::size_t>(s.step)] + slot(s.cell) * static_cast<std::size_t>(w) +
           static_cast<std::size_t>(s.gain_units - lo);
}

StepCount DpTable::value(const DpState& s) const {
    if (s.step < 0 || s.step > horizon_) {
        throw std::out_of_range("DP step outside [0, T]");
    }
    if (!retained_ && s.step != 0) {
        throw std::logic_error("DP values beyond step 0 were not retained");
    }
    if (!admitted(s.cell) || s.gain_units < gain_floor(s.step) || s.gain_units > gain_ceiling(s.step)) {
        return kUnreachable;
    }
    return values_[offset(s)];
}

std::uint8_t DpTable::policy(const DpState& s) const {
    if (s.step < 0 || s.step > horizon_) {
        throw std::out_of_range("DP step outside [0, T]");
    }
    if (!admitted(s.cell) || s.gain_units < gain_floor(s.step) || s.gain_units > gain_ceiling(s.step)) {
        return kActionNone;
    }
    return policy_[offset(s)];
}

std::vector<CellIndex> DpTable::extract_path(CellIndex start, int start_units) const {
    std::vector<CellIndex> path;
    if (!admitted(start)) {
        return path;
    }
    DpState s{start, 0, start_units};
    if (unreachable(value(s))) {
        return path;
    }
    path.push_back(start);
    for (;;) {
        const std::uint8_t a = policy(s);
        if (a == kActionTerminate) {
            return path;
        }
        if (a == kActionNone || s.step >= horizon_) {
            throw std::logic_error("DP policy chain broken before termination");
        }
        const CellIndex next = apply_move(s.cell, kMoves[a - 1]);
        s = {next, s.step + 1, s.gain_units + cell_gain_[slot(next)]};
        path.push_back(next);
    }
}

DpTable solve_dp_table(const GridMap& map, const PlanRequest& request, int horizon,
                       std::span<const std::uint8_t> mask, bool prune, bool retain_values) {
    validate_request(map, request);
    if (horizon < 1) {
        throw InputError("DP horizon must be at least 1");
    }
    const std::vector<std::uint8_t> admitted = admitted_cells(map, mask);
    require_admitted(map, admitted, request.start, "start");
    require_admitted(map, admitted, request.goal, "goal");

    DpTable t;
    t.width_ = map.width();
    t.horizon_ = horizon;
    t.threshold_ = request.threshold;
    t.goal_ = request.goal;
    t.retained_ = retain_values;
    t.slot_of_cell_.assign(map.cell_count(), -1);
    std::vector<CellIndex> cells;
    for (std::size_t i = 0; i < admitted.size(); ++i) {
        if (admitted[i]) {
            t.slot_of_cell_[i] = static_cast<std::int32_t>(cells.size());
            cells.push_back(map.cell_at(i));
            t.cell_gain_.push_back(static_cast<std::uint8_t>(map.gain_units(map.cell_at(i))));
        }
    }
    t.admitted_count_ = cells.size();
    const std::size_t n = cells.size();

    std::vector<std::vector<Neighbor>> neighbors(n);
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t m = 0; m < kMoves.size(); ++m) {
            const Move& mv = kMoves[m];
            if (!can_step(map, cells[s], mv)) {
                continue;
            }
            const CellIndex to = apply_move(cells[s], mv);
            if (!admitted[map.index(to)]) {
                continue;
            }
            neighbors[s].push_back({static_cast<std::uint8_t>(m + 1),
                                    static_cast<std::uint32_t>(t.slot_of_cell_[map.index(to)]),
                                    static_cast<std::uint8_t>(map.gain_units(to)), step_of(mv)});
        }
    }

    const auto layers = static_cast<std::size_t>(horizon) + 1;
    t.floor_.resize(layers);
    t.layer_base_.resize(layers);
    std::vector<int> widths(layers);
    std::size_t total = 0;
    for (int k = 0; k <= horizon; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        t.floor_[ku] = prune ? pruning_floor(request.threshold, horizon, k) : 0;
        // A fully pruned layer keeps floor = ceiling + 1 (zero width).
        t.floor_[ku] = std::min(t.floor_[ku], t.gain_ceiling(k) + 1);
        widths[ku] = t.gain_ceiling(k) - t.floor_[ku] + 1;
        t.layer_base_[ku] = total;
        total += n * static_cast<std::size_t>(widths[ku]);
    }
    t.policy_.assign(total, kActionNone);
    if (retain_values) {
        t.values_.assign(total, DpTable::kUnreachable);
    }

    const std::size_t goal_slot = t.slot(request.goal);
    std::vector<StepCount> next;
    std::vector<StepCount> current;

    // Boundary layer: only the goal with a sufficient average has finite value.
    {
        const auto T = static_cast<std::size_t>(horizon);
        const int lo = t.floor_[T];
        const int w = widths[T];
        next.assign(n * static_cast<std::size_t>(w), DpTable::kUnreachable);
        const int need = termination_requirement(request.threshold, horizon);
        for (int W = std::max(lo, need); W <= t.gain_ceiling(horizon); ++W) {
            const std::size_t off = goal_slot * static_cast<std::size_t>(w) + static_cast<std::size_t>(W - lo);
            next[off] = {0, 0};
            t.policy_[t.layer_base_[T] + off] = kActionTerminate;
        }
        t.expanded_ += n * static_cast<std::uint64_t>(w);
        t.pruned_ += n * static_cast<std::uint64_t>(lo);
        if (retain_values) {
            std::copy(next.begin(), next.end(), t.values_.begin() + static_cast<std::ptrdiff_t>(t.layer_base_[T]));
        }
    }

    for (int k = horizon - 1; k >= 0; --k) {
        const auto ku = static_cast<std::size_t>(k);
        const int lo = t.floor_[ku];
        const int hi = t.gain_ceiling(k);
        const int w = widths[ku];
        const int next_lo = t.floor_[ku + 1];
        const int next_w = widths[ku + 1];
        const int need = termination_requirement(request.threshold, k);
        current.assign(n * static_cast<std::size_t>(w), DpTable::kUnreachable);
        std::uint8_t* policy = t.policy_.data() + t.layer_base_[ku];

        for (std::size_t s = 0; s < n; ++s) {
            const bool at_goal = s == goal_slot;
            for (int W = lo; W <= hi; ++W) {
                StepCount best = DpTable::kUnreachable;
                std::uint8_t action = kActionNone;
                if (at_goal && W >= need) {
                    best = {0, 0};
                    action = kActionTerminate;
                }
                for (const Neighbor& nb : neighbors[s]) {
                    const int W2 = W + nb.gain;
                    if (W2 < next_lo) {
                        continue;  // cannot reach the threshold by step T
                    }
                    const StepCount& v = next[nb.slot * static_cast<std::size_t>(next_w) +
                                              static_cast<std::size_t>(W2 - next_lo)];
                    if (unreachable(v)) {
                        continue;
                    }
                    const StepCount c = v + nb.step;
                    if (unreachable(best) || c < best) {
                        best = c;
                        action = nb.action;
                    }
                }
                const std::size_t off = s * static_cast<std::size_t>(w) + static_cast<std::size_t>(W - lo);
                current[off] = best;
                policy[off] = action;
            }
        }
        t.expanded_ += n * static_cast<std::uint64_t>(w);
        t.pruned_ += n * static_cast<std::uint64_t>(lo);
        if (retain_values) {
            std::copy(current.begin(), current.end(), t.values_.begin() + static_cast<std::ptrdiff_t>(t.layer_base_[ku]));
        }
        next.swap(current);
    }
    if (!retain_values) {
        t.values_ = std::move(next);  // layer 0
    }
    return t;
}

int auto_horizon(CellIndex start, CellIndex goal) noexcept {
    const int dc = std::abs(goal.col - start.col);
    const int dr = std::abs(goal.row - start.row);
    const int chebyshev = std::max(dc, dr);
    const int stretched = static_cast<int>(std::ceil(2.0 * std::hypot(dc, dr) - 1e-12));
    return std::max({1, chebyshev, stretched});
}

namespace {

/// Best average gain over walks start -> goal of at most `horizon` steps.
std::optional<double> best_reachable_average(const GridMap& map, const std::vector<std::uint8_t>& admitted,
                                             const PlanRequest& request, int horizon) {
    const std::size_t n = map.cell_count();
    std::vector<int> cur(n, -1);
    std::vector<int> nxt(n, -1);
    cur[map.index(request.start)] = map.gain_units(request.start);
    std::optional<double> best;
    const std::size_t goal = map.index(request.goal);
    for (int k = 1; k <= horizon; ++k) {
        std::fill(nxt.begin(), nxt.end(), -1);
        for (std::size_t i = 0; i < n; ++i) {
            if (cur[i] < 0) {
                continue;
            }
            const CellIndex c = map.cell_at(i);
            for (const Move& m : kMoves) {
                if (!can_step(map, c, m)) {
                    continue;
                }
                const CellIndex to = apply_move(c, m);
                const std::size_t j = map.index(to);
                if (admitted[j]) {
                    nxt[j] = std::max(nxt[j], cur[i] + map.gain_units(to));
                }
            }
        }
        cur.swap(nxt);
        if (cur[goal] >= 0) {
            const double avg = cur[goal] / (kGainUnitsPerOne * static_cast<double>(k + 1));
            best = best ? std::max(*best, avg) : avg;
        }
    }
    return best;
}

/// Largest gain sum over a legal edge in the start's component (tenths).
/// Long walks can push their average arbitrarily close to half of it, never beyond.
int best_edge_units(const GridMap& map, const std::vector<std::uint8_t>& admitted, CellIndex start) {
    std::vector<std::uint8_t> seen(map.cell_count(), 0);
    std::queue<CellIndex> queue;
    queue.push(start);
    seen[map.index(start)] = 1;
    int best = 0;
    while (!queue.empty()) {
        const CellIndex c = queue.front();
        queue.pop();
        for (const Move& m : kMoves) {
            if (!can_step(map, c, m)) {
                continue;
            }
            const CellIndex to = apply_move(c, m);
            const std::size_t j = map.index(to);
            if (!admitted[j]) {
                continue;
            }
            best = std::max(best, map.gain_units(c) + map.gain_units(to));
            if (!seen[j]) {
                seen[j] = 1;
                queue.push(to);
            }
        }
    }
    return best;
}

PlanResult plan_dp_impl(const GridMap& map, const PlanRequest& request,
                        std::span<const std::uint8_t> mask, const DpOptions& options,
                        const char* name) {
    validate_request(map, request);
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<std::uint8_t> admitted = admitted_cells(map, mask);
    require_admitted(map, admitted, request.start, "start");
    require_admitted(map, admitted, request.goal, "goal");
    const int start_units = map.gain_units(request.start);

    std::uint64_t expanded = 0;
    std::uint64_t pruned = 0;
    int horizon = options.horizon ? *options.horizon : auto_horizon(request.start, request.goal);
    const int cap = std::max<int>(horizon, static_cast<int>(std::count(admitted.begin(), admitted.end(), 1)));
    const bool reachable_in_limit =
        best_edge_units(map, admitted, request.start) >= required_units(request.threshold, 2);

    std::vector<CellIndex> path;
    for (;;) {
        const DpTable table = solve_dp_table(map, request, horizon, mask, options.prune, false);
        expanded += table.expanded_states();
        pruned += table.pruned_states();
        path = table.extract_path(request.start, start_units);
        if (!path.empty() || options.horizon || horizon >= cap || !reachable_in_limit) {
            break;
        }
        horizon = std::min(cap, 2 * horizon);
    }

    PlanResult result = make_result(map, name, std::move(path), request.threshold);
    if (!result.found) {
        result.best_avg_gain = best_reachable_average(map, admitted, request, horizon);
    }
    result.horizon = horizon;
    result.expanded_states = expanded;
    result.pruned_states = pruned;
    result.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

}  // namespace

PlanResult plan_dpwa(const GridMap& map, const PlanRequest& request, const DpOptions& options) {
    return plan_dp_impl(map, request, {}, options, "DP-WA*");
}

PlanResult plan_dpwa_masked(const GridMap& map, const PlanRequest& request,
                            std::span<const std::uint8_t> mask, const DpOptions& options) {
    if (mask.size() != map.cell_count()) {
        throw InputError("mask must have one entry per map cell");
    }
    if (std::none_of(mask.begin(), mask.end(), [](std::uint8_t v) { return v != 0; })) {
        throw InputError("search mask is empty");
    }
    return plan_dp_impl(map, request, mask, options, "SCoTT-DP-WA*");
}

PlanResult plan_dpwa_masked(const GridMap& map, const PlanRequest& request,
                            const FocusAreaSet& mask, const DpOptions& options) {
    const std::vector<std::uint8_t> cells = mask.mask(map);
    return plan_dpwa_masked(map, request, cells, options);
}

std::uint64_t state_count(const GridMap& map, int horizon) noexcept {
    const auto t1 = static_cast<std::uint64_t>(horizon) + 1;
    return map.traversable_count() * t1 * (kGainUnitsPerOne * t1 + 1);
}

std::uint64_t layer_state_count(const GridMap& map, int horizon) noexcept {
    const auto t1 = static_cast<std::uint64_t>(horizon) + 1;
    return map.traversable_count() * (kGainUnitsPerOne * t1 + 1);
}

}  // namespace wnav
