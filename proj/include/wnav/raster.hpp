#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wnav/grid.hpp"

namespace wnav {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// 8-bit RGB image, row-major, origin at the top-left pixel.
class Raster {
public:
    Raster() = default;
    Raster(int width, int height, Rgb fill = {255, 255, 255});

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool contains(int x, int y) const noexcept {
        return x >= 0 && y >= 0 && x < width_ && y < height_;
    }
    Rgb at(int x, int y) const noexcept;
    void set(int x, int y, Rgb c) noexcept;
    void fill_rect(int x0, int y0, int x1, int y1, Rgb c) noexcept;

    std::span<const std::uint8_t> bytes() const noexcept { return pixels_; }

    friend bool operator==(const Raster&, const Raster&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> pixels_;
};

// Fixed palette: one band per gain decile, red (low) through blue (high).
inline constexpr int kGainBands = 10;
inline constexpr Rgb kObstacleColor{255, 255, 255};
inline constexpr Rgb kGridLineColor{0, 0, 0};

/// Band of a quantized gain: floor(gain * 10), with gain 1.0 sharing band 9.
int gain_band(int gain_units) noexcept;
Rgb band_color(int band);
/// Lower gain bound of a band, for legends and prompts.
double band_lower_bound(int band) noexcept;

struct ColorClass {
    enum class Kind { kBand, kObstacle, kGridLine, kOther };
    Kind kind = Kind::kOther;
    int band = -1;
};

/// Inverse of the palette: exact color match only.
ColorClass classify_color(Rgb c) noexcept;

struct RenderOptions {
    int pixels_per_cell = 8;
    bool grid_lines = true;
};

struct PathOverlay {
    std::vector<CellIndex> waypoints;
    Rgb color;
    int thickness = 2;
    std::string label;
};

/// Heatmap with row 0 at the top. Each cell is a pixels_per_cell square whose
/// last pixel row and column are grid lines (when enabled). Overlays are drawn
/// as polylines through cell centers; labeled overlays get a legend strip
/// below the map.
Raster render_heatmap(const GridMap& map, std::span<const PathOverlay> overlays = {},
                      const RenderOptions& options = {});

/// Pixel at the center of a cell in a render_heatmap image.
std::pair<int, int> cell_center_pixel(CellIndex c, const RenderOptions& options) noexcept;

/// Classifies the center pixel of every cell of a rendered heatmap.
std::vector<ColorClass> classify_cells(const Raster& image, int width_cells, int height_cells,
                                       const RenderOptions& options = {});

void draw_line(Raster& image, int x0, int y0, int x1, int y1, Rgb color, int thickness);
/// 5x7 bitmap text, upper-case ASCII letters, digits and a few symbols.
void draw_text(Raster& image, int x, int y, std::string_view text, Rgb color, int scale = 1);
int text_width(std::string_view text, int scale = 1) noexcept;

std::vector<std::uint8_t> encode_png(const Raster& image);
Raster decode_png(std::span<const std::uint8_t> data);
void write_png(const Raster& image, const std::filesystem::path& path);
Raster read_png(const std::filesystem::path& path);

}  // namespace wnav
