#include "wnav/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace wnav {

namespace {

double coord(const WorldPoint& p, int axis) noexcept { return axis == 0 ? p.x : p.y; }

double dist2(const WorldPoint& a, const WorldPoint& b) noexcept {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return dx * dx + dy * dy;
}

bool row_major_less(const CellIndex& a, const CellIndex& b) noexcept {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
}

}  // namespace

KdTree::KdTree(std::vector<Item> items) : items_(std::move(items)) {
    std::vector<std::size_t> order(items_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    nodes_.reserve(items_.size());
    root_ = build(order, 0);
}

std::int32_t KdTree::build(std::span<std::size_t> order, int depth) {
    if (order.empty()) {
        return -1;
    }
    const int axis = depth % 2;
    const std::size_t mid = order.size() / 2;
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(mid), order.end(),
                     [&](std::size_t a, std::size_t b) {
                         const double ca = coord(items_[a].point, axis);
                         const double cb = coord(items_[b].point, axis);
                         return ca != cb ? ca < cb : row_major_less(items_[a].cell, items_[b].cell);
                     });
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back({order[mid], axis});
    const std::int32_t left = build(order.subspan(0, mid), depth + 1);
    const std::int32_t right = build(order.subspan(mid + 1), depth + 1);
    nodes_[static_cast<std::size_t>(id)].left = left;
    nodes_[static_cast<std::size_t>(id)].right = right;
    return id;
}

void KdTree::nearest_impl(std::int32_t node, WorldPoint p, std::optional<std::size_t>& best,
                          double& best_d2) const {
    if (node < 0) {
        return;
    }
    const Node& n = nodes_[static_cast<std::size_t>(node)];
    const Item& item = items_[n.item];
    const double d2 = dist2(item.point, p);
    if (!best || d2 < best_d2 || (d2 == best_d2 && row_major_less(item.cell, items_[*best].cell))) {
        best = n.item;
        best_d2 = d2;
    }
    const double delta = coord(p, n.axis) - coord(item.point, n.axis);
    const std::int32_t near = delta < 0 ? n.left : n.right;
    const std::int32_t far = delta < 0 ? n.right : n.left;
    nearest_impl(near, p, best, best_d2);
    if (delta * delta <= best_d2) {
        nearest_impl(far, p, best, best_d2);
    }
}

std::optional<KdTree::Item> KdTree::nearest(WorldPoint p) const {
    std::optional<std::size_t> best;
    double best_d2 = std::numeric_limits<double>::infinity();
    nearest_impl(root_, p, best, best_d2);
    if (!best) {
        return std::nullopt;
    }
    return items_[*best];
}

void KdTree::within_impl(std::int32_t node, WorldPoint p, double r2, std::vector<std::size_t>& out) const {
    if (node < 0) {
        return;
    }
    const Node& n = nodes_[static_cast<std::size_t>(node)];
    const Item& item = items_[n.item];
    if (dist2(item.point, p) <= r2) {
        out.push_back(n.item);
    }
    const double delta = coord(p, n.axis) - coord(item.point, n.axis);
    if (delta <= 0 || delta * delta <= r2) {
        within_impl(n.left, p, r2, out);
    }
    if (delta >= 0 || delta * delta <= r2) {
        within_impl(n.right, p, r2, out);
    }
}

std::vector<KdTree::Item> KdTree::within(WorldPoint p, double radius) const {
    std::vector<std::size_t> hits;
    within_impl(root_, p, radius * radius * (1.0 + 1e-12), hits);
    std::vector<Item> out;
    out.reserve(hits.size());
    for (std::size_t i : hits) {
        out.push_back(items_[i]);
    }
    std::sort(out.begin(), out.end(),
              [](const Item& a, const Item& b) { return row_major_less(a.cell, b.cell); });
    return out;
}

}  // namespace wnav
