#include "wnav/plan.hpp"

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "wnav/error.hpp"

namespace wnav {

using nlohmann::json;

bool can_step(const GridMap& map, CellIndex from, const Move& move) noexcept {
    const CellIndex to = apply_move(from, move);
    if (!map.traversable(to)) {
        return false;
    }
    if (move.diagonal) {
        return map.traversable({from.col + move.dcol, from.row}) &&
               map.traversable({from.col, from.row + move.drow});
    }
    return true;
}

bool adjacent8(CellIndex a, CellIndex b) noexcept {
    const int dc = std::abs(a.col - b.col);
    const int dr = std::abs(a.row - b.row);
    return dc <= 1 && dr <= 1 && (dc + dr) > 0;
}

double StepCount::cells() const noexcept {
    return straight + diagonal * std::numbers::sqrt2;
}

bool operator<(const StepCount& a, const StepCount& b) noexcept {
    // a < b  <=>  x < d * sqrt(2) with x = a.straight - b.straight, d = b.diagonal - a.diagonal.
    const std::int64_t x = static_cast<std::int64_t>(a.straight) - b.straight;
    const std::int64_t d = static_cast<std::int64_t>(b.diagonal) - a.diagonal;
    if (d >= 0) {
        return x < 0 || x * x < 2 * d * d;
    }
    return x < 0 && x * x > 2 * d * d;
}

StepCount step_of(const Move& m) noexcept {
    return m.diagonal ? StepCount{0, 1} : StepCount{1, 0};
}

void validate_request(const GridMap& map, const PlanRequest& request) {
    auto check = [&](CellIndex c, const char* which) {
        std::ostringstream os;
        os << which << " (" << c.col << ", " << c.row << ")";
        if (!map.contains(c)) {
            throw InputError(os.str() + " lies outside the map");
        }
        if (map.is_obstacle(c)) {
            throw InputError(os.str() + " is an obstacle");
        }
    };
    check(request.start, "start");
    check(request.goal, "goal");
    if (request.start == request.goal) {
        throw InputError("start and goal must differ");
    }
    if (!(request.threshold >= 0.0 && request.threshold <= 1.0)) {
        throw InputError("threshold G must lie in [0, 1]");
    }
    if (!(request.epsilon > 0.0)) {
        throw InputError("epsilon must be positive");
    }
}

StepCount path_steps(std::span<const CellIndex> waypoints) {
    StepCount s;
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
        const int dc = std::abs(waypoints[i].col - waypoints[i - 1].col);
        const int dr = std::abs(waypoints[i].row - waypoints[i - 1].row);
        if (dc == 1 && dr == 1) {
            ++s.diagonal;
        } else if (dc + dr == 1) {
            ++s.straight;
        }
    }
    return s;
}

double path_length_m(const GridMap& map, std::span<const CellIndex> waypoints) {
    double total = 0.0;
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
        const double dc = waypoints[i].col - waypoints[i - 1].col;
        const double dr = waypoints[i].row - waypoints[i - 1].row;
        total += std::hypot(dc, dr) * map.cell_size();
    }
    return total;
}

double average_gain(const GridMap& map, std::span<const CellIndex> waypoints) {
    if (waypoints.empty()) {
        return 0.0;
    }
    long units = 0;
    for (const CellIndex& c : waypoints) {
        units += map.contains(c) ? map.gain_units(c) : 0;
    }
    return static_cast<double>(units) / (kGainUnitsPerOne * static_cast<double>(waypoints.size()));
}

bool meets_threshold(double avg_gain, double threshold) noexcept {
    return avg_gain >= threshold - 1e-9;
}

PlanResult make_result(const GridMap& map, std::string algorithm,
                       std::vector<CellIndex> waypoints, double threshold) {
    PlanResult r;
    r.algorithm = std::move(algorithm);
    r.found = !waypoints.empty();
    r.path_length_m = path_length_m(map, waypoints);
    r.avg_gain = average_gain(map, waypoints);
    r.feasible = r.found && meets_threshold(r.avg_gain, threshold);
    r.steps = path_steps(waypoints);
    r.objective = r.path_length_m;
    r.waypoints = std::move(waypoints);
    return r;
}

json to_json(const PlanResult& r) {
    json wps = json::array();
    for (const CellIndex& c : r.waypoints) {
        wps.push_back({c.col, c.row});
    }
    json j = {{"algorithm", r.algorithm},
              {"waypoints", std::move(wps)},
              {"path_length_m", r.path_length_m},
              {"avg_gain", r.avg_gain},
              {"runtime_s", r.runtime_s},
              {"feasible", r.feasible},
              {"expanded_states", r.expanded_states}};
    if (r.horizon) {
        j["horizon"] = *r.horizon;
        j["pruned_states"] = r.pruned_states;
    }
    if (r.best_avg_gain) {
        j["best_avg_gain"] = *r.best_avg_gain;
    }
    return j;
}

PlanResult plan_result_from_json(const json& j) {
    PlanResult r;
    try {
        r.algorithm = j.at("algorithm").get<std::string>();
        for (const json& w : j.at("waypoints")) {
            r.waypoints.push_back({w.at(0).get<int>(), w.at(1).get<int>()});
        }
        r.found = !r.waypoints.empty();
        r.path_length_m = j.at("path_length_m").get<double>();
        r.avg_gain = j.at("avg_gain").get<double>();
        r.runtime_s = j.at("runtime_s").get<double>();
        r.feasible = j.at("feasible").get<bool>();
        r.expanded_states = j.at("expanded_states").get<std::uint64_t>();
        r.steps = path_steps(r.waypoints);
        if (j.contains("horizon")) {
            r.horizon = j["horizon"].get<int>();
            r.pruned_states = j.value("pruned_states", std::uint64_t{0});
        }
        if (j.contains("best_avg_gain")) {
            r.best_avg_gain = j["best_avg_gain"].get<double>();
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("plan result: ") + e.what());
    }
    return r;
}

}  // namespace wnav
