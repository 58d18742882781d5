#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "wnav/grid.hpp"

namespace wnav {

/// Static 2-D kd-tree over cell centers, balanced by median splits.
class KdTree {
public:
    struct Item {
        WorldPoint point;
        CellIndex cell;
    };

    KdTree() = default;
    explicit KdTree(std::vector<Item> items);

    std::size_t size() const noexcept { return items_.size(); }
    bool empty() const noexcept { return items_.empty(); }

    /// Item closest to `p`; ties go to the lowest row-major cell.
    std::optional<Item> nearest(WorldPoint p) const;
    /// Items within `radius` of `p` (inclusive), in row-major cell order.
    std::vector<Item> within(WorldPoint p, double radius) const;

private:
    struct Node {
        std::size_t item;
        int axis;
        std::int32_t left = -1;
        std::int32_t right = -1;
    };

    std::int32_t build(std::span<std::size_t> order, int depth);
    void nearest_impl(std::int32_t node, WorldPoint p, std::optional<std::size_t>& best,
                      double& best_d2) const;
    void within_impl(std::int32_t node, WorldPoint p, double r2, std::vector<std::size_t>& out) const;

    std::vector<Item> items_;
    std::vector<Node> nodes_;
    std::int32_t root_ = -1;
};

}  // namespace wnav
