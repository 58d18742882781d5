#include "wnav/raster.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <sstream>

#include "wnav/error.hpp"

namespace wnav {

Raster::Raster(int width, int height, Rgb fill) : width_(width), height_(height) {
    if (width <= 0 || height <= 0) {
        throw InputError("raster dimensions must be positive");
    }
    pixels_.resize(static_cast<std::size_t>(width) * height * 3);
    for (std::size_t i = 0; i < pixels_.size(); i += 3) {
        pixels_[i] = fill.r;
        pixels_[i + 1] = fill.g;
        pixels_[i + 2] = fill.b;
    }
}

Rgb Raster::at(int x, int y) const noexcept {
    const std::size_t i = (static_cast<std::size_t>(y) * width_ + x) * 3;
    return {pixels_[i], pixels_[i + 1], pixels_[i + 2]};
}

void Raster::set(int x, int y, Rgb c) noexcept {
    if (!contains(x, y)) {
        return;
    }
    const std::size_t i = (static_cast<std::size_t>(y) * width_ + x) * 3;
    pixels_[i] = c.r;
    pixels_[i + 1] = c.g;
    pixels_[i + 2] = c.b;
}

void Raster::fill_rect(int x0, int y0, int x1, int y1, Rgb c) noexcept {
    for (int y = std::max(0, y0); y <= std::min(height_ - 1, y1); ++y) {
        for (int x = std::max(0, x0); x <= std::min(width_ - 1, x1); ++x) {
            set(x, y, c);
        }
    }
}

namespace {

constexpr std::array<Rgb, kGainBands> kPalette{{
    {215, 25, 28},    // 0.0
    {232, 85, 30},    // 0.1
    {244, 140, 40},   // 0.2
    {253, 190, 60},   // 0.3
    {250, 230, 100},  // 0.4
    {200, 230, 120},  // 0.5
    {140, 205, 110},  // 0.6
    {90, 180, 170},   // 0.7
    {60, 130, 210},   // 0.8
    {30, 60, 190},    // 0.9 and 1.0
}};

struct Glyph {
    char ch;
    std::array<std::uint8_t, 7> rows;
};

constexpr Glyph kFont[] = {
    {'A', {0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}}, {'B', {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E}},
    {'C', {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E}}, {'D', {0x1E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1E}},
    {'E', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F}}, {'F', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10}},
    {'G', {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F}}, {'H', {0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
    {'I', {0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}}, {'J', {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C}},
    {'K', {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11}}, {'L', {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F}},
    {'M', {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11}}, {'N', {0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11}},
    {'O', {0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}}, {'P', {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10}},
    {'Q', {0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D}}, {'R', {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11}},
    {'S', {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E}}, {'T', {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04}},
    {'U', {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}}, {'V', {0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04}},
    {'W', {0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A}}, {'X', {0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11}},
    {'Y', {0x11, 0x11, 0x11, 0x0A, 0x04, 0x04, 0x04}}, {'Z', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F}},
    {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}}, {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}}, {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
    {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}}, {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
    {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}}, {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
    {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}}, {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
    {'-', {0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00}}, {'*', {0x00, 0x04, 0x15, 0x0E, 0x15, 0x04, 0x00}},
    {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C}}, {'=', {0x00, 0x00, 0x1F, 0x00, 0x1F, 0x00, 0x00}},
    {':', {0x00, 0x0C, 0x0C, 0x00, 0x0C, 0x0C, 0x00}}, {'(', {0x02, 0x04, 0x08, 0x08, 0x08, 0x04, 0x02}},
    {')', {0x08, 0x04, 0x02, 0x02, 0x02, 0x04, 0x08}}, {'>', {0x08, 0x04, 0x02, 0x01, 0x02, 0x04, 0x08}},
    {'<', {0x02, 0x04, 0x08, 0x10, 0x08, 0x04, 0x02}},
};

const Glyph* find_glyph(char ch) noexcept {
    if (ch >= 'a' && ch <= 'z') {
        ch = static_cast<char>(ch - 'a' + 'A');
    }
    for (const Glyph& g : kFont) {
        if (g.ch == ch) {
            return &g;
        }
    }
    return nullptr;
}

constexpr int kLegendRow = 14;

}  // namespace

int gain_band(int gain_units) noexcept { return std::clamp(gain_units, 0, kGainBands - 1); }

Rgb band_color(int band) {
    if (band < 0 || band >= kGainBands) {
        throw InputError("gain band out of range");
    }
    return kPalette[static_cast<std::size_t>(band)];
}

double band_lower_bound(int band) noexcept {
    return static_cast<double>(std::clamp(band, 0, kGainBands - 1)) / kGainBands;
}

ColorClass classify_color(Rgb c) noexcept {
    for (int b = 0; b < kGainBands; ++b) {
        if (kPalette[static_cast<std::size_t>(b)] == c) {
            return {ColorClass::Kind::kBand, b};
        }
    }
    if (c == kObstacleColor) {
        return {ColorClass::Kind::kObstacle, -1};
    }
    if (c == kGridLineColor) {
        return {ColorClass::Kind::kGridLine, -1};
    }
    return {};
}

std::pair<int, int> cell_center_pixel(CellIndex c, const RenderOptions& options) noexcept {
    const int ppc = options.pixels_per_cell;
    const int inner = options.grid_lines && ppc >= 3 ? ppc - 1 : ppc;
    return {c.col * ppc + inner / 2, c.row * ppc + inner / 2};
}

void draw_line(Raster& image, int x0, int y0, int x1, int y1, Rgb color, int thickness) {
    const int lo = -(thickness - 1) / 2;
    const int hi = thickness / 2;
    auto stamp = [&](int x, int y) {
        image.fill_rect(x + lo, y + lo, x + hi, y + hi, color);
    };
    const int dx = std::abs(x1 - x0);
    const int dy = -std::abs(y1 - y0);
    const int sx = x0 < x1 ? 1 : -1;
    const int sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    for (;;) {
        stamp(x0, y0);
        if (x0 == x1 && y0 == y1) {
            break;
        }
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y0 += sy;
        }
    }
}

void draw_text(Raster& image, int x, int y, std::string_view text, Rgb color, int scale) {
    for (char ch : text) {
        if (const Glyph* g = find_glyph(ch)) {
            for (int row = 0; row < 7; ++row) {
                for (int col = 0; col < 5; ++col) {
                    if (g->rows[static_cast<std::size_t>(row)] & (0x10 >> col)) {
                        image.fill_rect(x + col * scale, y + row * scale,
                                        x + (col + 1) * scale - 1, y + (row + 1) * scale - 1,
                                        color);
                    }
                }
            }
        }
        x += 6 * scale;
    }
}

int text_width(std::string_view text, int scale) noexcept {
    return static_cast<int>(text.size()) * 6 * scale;
}

Raster render_heatmap(const GridMap& map, std::span<const PathOverlay> overlays,
                      const RenderOptions& options) {
    if (map.width() <= 0 || map.height() <= 0) {
        throw InputError("cannot render an empty map");
    }
    if (options.pixels_per_cell < 1) {
        throw InputError("pixels_per_cell must be positive");
    }
    const int ppc = options.pixels_per_cell;
    const bool lines = options.grid_lines && ppc >= 3;
    int labeled = 0;
    for (const PathOverlay& o : overlays) {
        for (const CellIndex& c : o.waypoints) {
            if (!map.contains(c)) {
                throw InputError("overlay waypoint lies outside the map");
            }
        }
        labeled += o.label.empty() ? 0 : 1;
    }
    const int map_w = map.width() * ppc;
    const int map_h = map.height() * ppc;
    const int legend_h = labeled > 0 ? labeled * kLegendRow + 6 : 0;
    int legend_w = 0;
    for (const PathOverlay& o : overlays) {
        legend_w = std::max(legend_w, 24 + text_width(o.label) + 4);
    }
    Raster image(std::max(map_w, legend_w), map_h + legend_h, kObstacleColor);

    for (int row = 0; row < map.height(); ++row) {
        for (int col = 0; col < map.width(); ++col) {
            const CellIndex c{col, row};
            const Rgb fill = map.is_obstacle(c) ? kObstacleColor : band_color(gain_band(map.gain_units(c)));
            image.fill_rect(col * ppc, row * ppc, col * ppc + ppc - 1, row * ppc + ppc - 1, fill);
            if (lines) {
                image.fill_rect(col * ppc + ppc - 1, row * ppc, col * ppc + ppc - 1,
                                row * ppc + ppc - 1, kGridLineColor);
                image.fill_rect(col * ppc, row * ppc + ppc - 1, col * ppc + ppc - 1,
                                row * ppc + ppc - 1, kGridLineColor);
            }
        }
    }

    for (const PathOverlay& o : overlays) {
        if (o.waypoints.size() == 1) {
            auto [x, y] = cell_center_pixel(o.waypoints.front(), options);
            draw_line(image, x, y, x, y, o.color, o.thickness + 2);
        }
        for (std::size_t i = 1; i < o.waypoints.size(); ++i) {
            auto [x0, y0] = cell_center_pixel(o.waypoints[i - 1], options);
            auto [x1, y1] = cell_center_pixel(o.waypoints[i], options);
            draw_line(image, x0, y0, x1, y1, o.color, o.thickness);
        }
    }

    int slot = 0;
    for (const PathOverlay& o : overlays) {
        if (o.label.empty()) {
            continue;
        }
        const int y = map_h + 4 + slot * kLegendRow;
        image.fill_rect(4, y + 1, 19, y + 7, o.color);
        draw_text(image, 24, y + 1, o.label, kGridLineColor);
        ++slot;
    }
    return image;
}

std::vector<ColorClass> classify_cells(const Raster& image, int width_cells, int height_cells,
                                       const RenderOptions& options) {
    std::vector<ColorClass> out;
    out.reserve(static_cast<std::size_t>(width_cells) * height_cells);
    for (int row = 0; row < height_cells; ++row) {
        for (int col = 0; col < width_cells; ++col) {
            auto [x, y] = cell_center_pixel({col, row}, options);
            out.push_back(image.contains(x, y) ? classify_color(image.at(x, y)) : ColorClass{});
        }
    }
    return out;
}

// PNG ---------------------------------------------------------------------------

namespace {

struct PngIo {
    std::vector<std::uint8_t>* out = nullptr;
    std::span<const std::uint8_t> in;
    std::size_t offset = 0;
    std::string error;
};

void png_error_handler(png_structp png, png_const_charp message) {
    static_cast<PngIo*>(png_get_error_ptr(png))->error = message;
    png_longjmp(png, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

void append_bytes(png_structp png, png_bytep data, png_size_t length) {
    auto* io = static_cast<PngIo*>(png_get_io_ptr(png));
    io->out->insert(io->out->end(), data, data + length);
}

void read_bytes(png_structp png, png_bytep out, png_size_t length) {
    auto* io = static_cast<PngIo*>(png_get_io_ptr(png));
    if (io->offset + length > io->in.size()) {
        png_error(png, "truncated stream");
    }
    std::memcpy(out, io->in.data() + io->offset, length);
    io->offset += length;
}

}  // namespace

std::vector<std::uint8_t> encode_png(const Raster& image) {
    if (image.width() <= 0 || image.height() <= 0) {
        throw InputError("cannot encode an empty raster");
    }
    std::vector<std::uint8_t> out;
    PngIo io;
    io.out = &out;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &io, png_error_handler,
                                              png_warning_handler);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("png: allocation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw InputError("png: " + io.error);
    }
    png_set_write_fn(png, &io, append_bytes, nullptr);
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width()),
                 static_cast<png_uint_32>(image.height()), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const auto bytes = image.bytes();
    for (int y = 0; y < image.height(); ++y) {
        png_write_row(png, const_cast<png_bytep>(bytes.data() +
                                                 static_cast<std::size_t>(y) * image.width() * 3));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

Raster decode_png(std::span<const std::uint8_t> data) {
    if (data.size() < 8 || png_sig_cmp(data.data(), 0, 8) != 0) {
        throw InputError("png: bad signature");
    }
    PngIo io;
    io.in = data;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &io, png_error_handler,
                                             png_warning_handler);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("png: allocation failed");
    }
    std::vector<std::uint8_t> pixels;
    int w = 0;
    int h = 0;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw InputError("png: " + io.error);
    }
    png_set_read_fn(png, &io, read_bytes);
    png_read_info(png, info);
    png_set_expand(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);
    w = static_cast<int>(png_get_image_width(png, info));
    h = static_cast<int>(png_get_image_height(png, info));
    pixels.resize(static_cast<std::size_t>(w) * h * 3);
    for (int y = 0; y < h; ++y) {
        png_read_row(png, pixels.data() + static_cast<std::size_t>(y) * w * 3, nullptr);
    }
    png_destroy_read_struct(&png, &info, nullptr);

    Raster image(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = (static_cast<std::size_t>(y) * w + x) * 3;
            image.set(x, y, {pixels[i], pixels[i + 1], pixels[i + 2]});
        }
    }
    return image;
}

void write_png(const Raster& image, const std::filesystem::path& path) {
    const auto bytes = encode_png(image);
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw InputError("cannot write '" + path.string() + "'");
        }
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    }
    std::filesystem::rename(tmp, path);
}

Raster read_png(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open '" + path.string() + "'");
    }
    std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_png(data);
}

}  // namespace wnav
