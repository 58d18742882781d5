#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace wnav {

/// Column/row address of a grid cell. Row 0 is the top row of rendered images.
struct CellIndex {
    int col = 0;
    int row = 0;

    friend auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

/// Position in world coordinates, meters.
struct WorldPoint {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const WorldPoint&, const WorldPoint&) = default;
};

/// Number of gain quantization steps per unit gain (gains are multiples of 0.1).
inline constexpr int kGainUnitsPerOne = 10;

/// Discretized traversable area with per-cell normalized path gain.
///
/// Gains are stored as integer tenths so every consumer sees exactly the
/// 0.1-quantized value produced at construction. Cell (col, row) has its
/// center at origin + ((col + 0.5), (row + 0.5)) * cell_size, i.e. `origin`
/// is the outer corner of cell (0, 0). Immutable once built.
class GridMap {
public:
    GridMap(int width, int height, double cell_size, WorldPoint origin,
            std::vector<std::uint8_t> gain_units, std::vector<std::uint8_t> obstacles);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    double cell_size() const noexcept { return cell_size_; }
    WorldPoint origin() const noexcept { return origin_; }

    std::size_t cell_count() const noexcept { return gain_units_.size(); }
    std::size_t traversable_count() const noexcept { return traversable_count_; }

    bool contains(CellIndex c) const noexcept {
        return c.col >= 0 && c.row >= 0 && c.col < width_ && c.row < height_;
    }
    std::size_t index(CellIndex c) const noexcept {
        return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(c.col);
    }
    CellIndex cell_at(std::size_t index) const noexcept {
        return {static_cast<int>(index % static_cast<std::size_t>(width_)),
                static_cast<int>(index / static_cast<std::size_t>(width_))};
    }

    bool is_obstacle(CellIndex c) const noexcept { return obstacles_[index(c)] != 0; }
    /// In bounds and not an obstacle.
    bool traversable(CellIndex c) const noexcept { return contains(c) && !is_obstacle(c); }

    int gain_units(CellIndex c) const noexcept { return gain_units_[index(c)]; }
    double gain(CellIndex c) const noexcept {
        return static_cast<double>(gain_units_[index(c)]) / kGainUnitsPerOne;
    }

    std::span<const std::uint8_t> gain_units() const noexcept { return gain_units_; }
    std::span<const std::uint8_t> obstacles() const noexcept { return obstacles_; }

    WorldPoint center(CellIndex c) const noexcept;
    /// Cell containing `p`, or nullopt when `p` lies outside the grid.
    std::optional<CellIndex> world_to_cell(WorldPoint p) const noexcept;
    /// As world_to_cell, but throws InputError for points outside the grid.
    CellIndex cell_of(WorldPoint p) const;

private:
    int width_;
    int height_;
    double cell_size_;
    WorldPoint origin_;
    std::vector<std::uint8_t> gain_units_;
    std::vector<std::uint8_t> obstacles_;
    std::size_t traversable_count_ = 0;
};

/// Rounds a normalized gain in [0, 1] to integer tenths.
int quantize_gain(double normalized);

// Radio-map documents ---------------------------------------------------------

/// Parses a radio-map JSON document.
///
/// Cells may carry either raw `gain_db` values, which are min-max normalized
/// over the document, or already normalized `gain_norm` values. Gains are
/// then quantized to tenths. Lattice positions absent from the document
/// become obstacles. Optional `width_cells`/`height_cells` extend the grid
/// beyond the bounding box of the listed cells.
GridMap ingest_radio_map(std::string_view document);
GridMap load_radio_map(const std::filesystem::path& path);

/// Exports traversable cells with `gain_norm` values; re-ingesting the result
/// reproduces the map exactly.
nlohmann::json export_radio_map(const GridMap& map);
std::string export_radio_map_text(const GridMap& map, int indent = -1);

/// Content hash (FNV-1a, 64 bit, hex) of the compact exported document.
std::string map_hash(const GridMap& map);

// Synthetic maps -------------------------------------------------------------

struct AccessPoint {
    WorldPoint position;
    double tx_power_db = 0.0;
};

/// Inclusive cell rectangle.
struct CellRect {
    int col0 = 0;
    int row0 = 0;
    int col1 = 0;
    int row1 = 0;
};

enum class DecayModel { kLogDistance, kLinear };

struct SynthSpec {
    int width = 0;
    int height = 0;
    double cell_size = 1.0;
    WorldPoint origin{};
    std::vector<AccessPoint> access_points;
    std::vector<CellRect> obstacles;
    /// Extra access points placed uniformly at random from `seed`.
    int random_access_points = 0;
    /// Extra 1..3-cell obstacle blocks placed at random from `seed`.
    int random_obstacles = 0;
    DecayModel decay = DecayModel::kLogDistance;
    double path_loss_exponent = 2.0;  // log-distance model
    double slope_db_per_m = 6.0;      // linear model
    std::uint64_t seed = 0;
};

/// Builds a map whose raw gain is the strongest received power over all
/// access points, decaying monotonically with distance. Normalization and
/// quantization then follow the ingestion rules.
GridMap synthesize_map(const SynthSpec& spec);

SynthSpec synth_spec_from_json(const nlohmann::json& j);
nlohmann::json synth_spec_to_json(const SynthSpec& spec);

// Spatial queries -------------------------------------------------------------

struct CellGain {
    CellIndex cell;
    double gain = 0.0;

    friend bool operator==(const CellGain&, const CellGain&) = default;
};

/// Traversable cells whose center lies within `radius` meters of `center`,
/// in row-major order.
std::vector<CellGain> slice_region(const GridMap& map, WorldPoint center, double radius);

}  // namespace wnav
