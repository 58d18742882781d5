#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "wnav/grid.hpp"
#include "wnav/kdtree.hpp"

namespace wnav {

struct FocusArea {
    WorldPoint center;
    double radius = 0.0;
    /// Traversable cells within `radius` of `center`, row-major.
    std::vector<CellIndex> members;
    KdTree index;
};

enum class FocusSource { kModelProposed, kAutoGenerated };

const char* to_string(FocusSource source) noexcept;

/// Identity of a cached focus-area set.
struct MaskKey {
    std::string map_hash;
    CellIndex start;
    CellIndex goal;
    double threshold = 0.0;

    std::string canonical() const;
    friend bool operator==(const MaskKey&, const MaskKey&) = default;
};

/// Union of N circular regions used as a reduced search space.
class FocusAreaSet {
public:
    FocusAreaSet() = default;
    FocusAreaSet(std::vector<FocusArea> areas, FocusSource source);

    const std::vector<FocusArea>& areas() const noexcept { return areas_; }
    FocusSource source() const noexcept { return source_; }
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }
    void add_warning(std::string w) { warnings_.push_back(std::move(w)); }
    const std::optional<MaskKey>& key() const noexcept { return key_; }
    void set_key(MaskKey key) { key_ = std::move(key); }

    /// One byte per map cell, 1 for members of any area.
    std::vector<std::uint8_t> mask(const GridMap& map) const;
    /// Distinct member cells, row-major.
    std::vector<CellIndex> member_cells() const;
    bool contains(CellIndex c) const;

private:
    std::vector<FocusArea> areas_;
    FocusSource source_ = FocusSource::kAutoGenerated;
    std::vector<std::string> warnings_;
    std::optional<MaskKey> key_;
};

/// Area around one center: slice_region members indexed by a kd-tree.
FocusArea make_focus_area(const GridMap& map, WorldPoint center, double max_distance);

/// Indices of `n` waypoints at uniform arc-length spacing along `path`,
/// including the first and last waypoint (n == 1 picks the arc midpoint).
std::vector<std::size_t> arc_length_samples(const GridMap& map, const std::vector<CellIndex>& path,
                                            std::size_t n);

/// Focus areas centered on arc-length samples of a coarse path. N larger than
/// the waypoint count is clamped with a warning; coverage gaps and a
/// disconnected union are reported as warnings.
FocusAreaSet build_focus_areas(const GridMap& map, const std::vector<CellIndex>& coarse_path,
                               std::size_t n_areas, double max_distance);

/// Focus areas around explicitly chosen centers (e.g. proposed by a model).
FocusAreaSet focus_areas_from_centers(const GridMap& map, const std::vector<WorldPoint>& centers,
                                      double max_distance, FocusSource source);

struct MaskStats {
    std::size_t mask_cells = 0;
    std::size_t traversable_cells = 0;
    double reduction_fraction = 0.0;
};

MaskStats mask_stats(const GridMap& map, const FocusAreaSet& set);

/// Smallest radius (bisection, 1e-3 m) whose arc-length focus areas reduce the
/// traversable cell count by at most `target_reduction`.
double tune_max_distance(const GridMap& map, const std::vector<CellIndex>& coarse_path,
                         std::size_t n_areas, double target_reduction);

// Serialization -----------------------------------------------------------------

inline constexpr int kMaskFormatVersion = 1;

nlohmann::json to_json(const FocusAreaSet& set);
/// Rebuilds a set from JSON; kd-trees are reconstructed from the member lists.
/// Throws VersionError for an unknown format version.
FocusAreaSet focus_from_json(const nlohmann::json& j, const GridMap& map);

/// Focus-area cache keyed by MaskKey. Access is serialized; an optional
/// directory persists entries as mask JSON files.
class FocusCache {
public:
    FocusCache() = default;
    explicit FocusCache(std::filesystem::path directory);

    using Builder = std::function<FocusAreaSet()>;
    FocusAreaSet get_or_build(const GridMap& map, const MaskKey& key, const Builder& build);
    std::optional<FocusAreaSet> find(const GridMap& map, const MaskKey& key);
    void put(const MaskKey& key, FocusAreaSet set);

    std::size_t builds() const noexcept { return builds_; }
    std::size_t hits() const noexcept { return hits_; }

private:
    std::filesystem::path file_for(const MaskKey& key) const;
    std::optional<FocusAreaSet> find_locked(const GridMap& map, const MaskKey& key);

    std::mutex mutex_;
    std::optional<std::filesystem::path> directory_;
    std::map<std::string, std::string> entries_;  // canonical key -> mask JSON
    std::size_t builds_ = 0;
    std::size_t hits_ = 0;
};

}  // namespace wnav
