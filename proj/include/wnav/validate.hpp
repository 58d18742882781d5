#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wnav/grid.hpp"

namespace wnav {

/// Largest Chebyshev gap between consecutive waypoints that is bridged by
/// straight-line rasterization.
inline constexpr int kMaxBridgedGap = 3;

struct Violation {
    enum class Kind { kEmpty, kOutOfBounds, kObstacle, kCornerCut, kGap, kEndpoint, kThreshold };
    Kind kind;
    CellIndex at;
    std::string message;
};

const char* to_string(Violation::Kind kind) noexcept;

struct Verdict {
    bool valid = false;
    std::vector<Violation> violations;
    /// Waypoints with consecutive duplicates removed and small gaps filled in.
    std::vector<CellIndex> path;
    double avg_gain = 0.0;

    /// One line listing every violation, used in retry prompts.
    std::string summary() const;
};

/// Cells strictly between `a` and `b` on the rounded straight line; each
/// consecutive pair of the result (with a and b) is 8-adjacent.
std::vector<CellIndex> rasterize_gap(CellIndex a, CellIndex b);

/// Checks a candidate path: bounds, obstacles (including bridged cells),
/// corner cutting, gaps wider than kMaxBridgedGap, optional endpoints, and
/// the average-gain threshold over the bridged path.
Verdict validate_candidate(const GridMap& map, const std::vector<CellIndex>& waypoints,
                           double threshold, std::optional<CellIndex> start = std::nullopt,
                           std::optional<CellIndex> goal = std::nullopt);

}  // namespace wnav
