#include "wnav/validate.hpp"

#include <algorithm>
#include <cstdlib>
#include <iomanip>
#include <sstream>

#include "wnav/plan.hpp"

namespace wnav {

namespace {

// round(num / den) with halves away from zero; den > 0.
int round_ratio(int num, int den) noexcept {
    const int twice = 2 * num + (num >= 0 ? den : -den);
    return twice / (2 * den);
}

std::string at_text(CellIndex c) {
    std::ostringstream os;
    os << "(" << c.col << ", " << c.row << ")";
    return os.str();
}

}  // namespace

const char* to_string(Violation::Kind kind) noexcept {
    switch (kind) {
        case Violation::Kind::kEmpty: return "empty";
        case Violation::Kind::kOutOfBounds: return "out-of-bounds";
        case Violation::Kind::kObstacle: return "obstacle";
        case Violation::Kind::kCornerCut: return "corner-cut";
        case Violation::Kind::kGap: return "gap";
        case Violation::Kind::kEndpoint: return "endpoint";
        case Violation::Kind::kThreshold: return "threshold";
    }
    return "unknown";
}

std::string Verdict::summary() const {
    if (valid) {
        return "valid";
    }
    std::ostringstream os;
    for (std::size_t i = 0; i < violations.size(); ++i) {
        os << (i ? "; " : "") << violations[i].message;
    }
    return os.str();
}

std::vector<CellIndex> rasterize_gap(CellIndex a, CellIndex b) {
    const int dx = b.col - a.col;
    const int dy = b.row - a.row;
    const int d = std::max(std::abs(dx), std::abs(dy));
    std::vector<CellIndex> cells;
    for (int i = 1; i < d; ++i) {
        cells.push_back({a.col + round_ratio(i * dx, d), a.row + round_ratio(i * dy, d)});
    }
    return cells;
}

Verdict validate_candidate(const GridMap& map, const std::vector<CellIndex>& waypoints,
                           double threshold, std::optional<CellIndex> start,
                           std::optional<CellIndex> goal) {
    Verdict v;
    auto add = [&](Violation::Kind kind, CellIndex at, std::string msg) {
        v.violations.push_back({kind, at, std::move(msg)});
    };
    if (waypoints.empty()) {
        add(Violation::Kind::kEmpty, {}, "candidate has no waypoints");
        return v;
    }

    for (const CellIndex& w : waypoints) {
        if (!v.path.empty() && v.path.back() == w) {
            continue;
        }
        if (!v.path.empty() && map.contains(w) && map.contains(v.path.back())) {
            const CellIndex prev = v.path.back();
            const int gap = std::max(std::abs(w.col - prev.col), std::abs(w.row - prev.row));
            if (gap > kMaxBridgedGap) {
                add(Violation::Kind::kGap, prev,
                    "gap of " + std::to_string(gap) + " cells from " + at_text(prev) + " to " +
                        at_text(w) + " exceeds " + std::to_string(kMaxBridgedGap));
            } else if (gap > 1) {
                for (const CellIndex& c : rasterize_gap(prev, w)) {
                    v.path.push_back(c);
                }
            }
        }
        v.path.push_back(w);
    }

    for (std::size_t i = 0; i < v.path.size(); ++i) {
        const CellIndex c = v.path[i];
        if (!map.contains(c)) {
            add(Violation::Kind::kOutOfBounds, c, "waypoint " + at_text(c) + " lies outside the map");
            continue;
        }
        if (map.is_obstacle(c)) {
            add(Violation::Kind::kObstacle, c, "waypoint " + at_text(c) + " is inside an obstacle");
            continue;
        }
        if (i == 0) {
            continue;
        }
        const CellIndex p = v.path[i - 1];
        const int dc = c.col - p.col;
        const int dr = c.row - p.row;
        if (std::abs(dc) == 1 && std::abs(dr) == 1 && map.contains(p) &&
            (!map.traversable({p.col + dc, p.row}) || !map.traversable({p.col, p.row + dr}))) {
            add(Violation::Kind::kCornerCut, c,
                "step " + at_text(p) + " -> " + at_text(c) + " cuts an obstacle corner");
        }
    }

    if (start && v.path.front() != *start) {
        add(Violation::Kind::kEndpoint, v.path.front(),
            "path starts at " + at_text(v.path.front()) + " instead of " + at_text(*start));
    }
    if (goal && v.path.back() != *goal) {
        add(Violation::Kind::kEndpoint, v.path.back(),
            "path ends at " + at_text(v.path.back()) + " instead of " + at_text(*goal));
    }

    v.avg_gain = average_gain(map, v.path);
    if (!meets_threshold(v.avg_gain, threshold)) {
        std::ostringstream os;
        os << std::fixed << std::setprecision(3) << "average gain " << v.avg_gain << " is below G="
           << threshold << " (deficit " << (threshold - v.avg_gain) << ")";
        add(Violation::Kind::kThreshold, v.path.back(), os.str());
    }
    v.valid = v.violations.empty();
    return v;
}

}  // namespace wnav
