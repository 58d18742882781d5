#include "wnav/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "wnav/error.hpp"

namespace wnav {

using nlohmann::json;

GridMap::GridMap(int width, int height, double cell_size, WorldPoint origin,
                 std::vector<std::uint8_t> gain_units, std::vector<std::uint8_t> obstacles)
    : width_(width),
      height_(height),
      cell_size_(cell_size),
      origin_(origin),
      gain_units_(std::move(gain_units)),
      obstacles_(std::move(obstacles)) {
    if (width_ <= 0 || height_ <= 0) {
        throw EmptyMapError("grid must have at least one row and one column");
    }
    if (!(cell_size_ > 0.0) || !std::isfinite(cell_size_)) {
        throw GeometryError("cell size must be a positive finite number");
    }
    const auto n = static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
    if (gain_units_.size() != n || obstacles_.size() != n) {
        throw InputError("gain and obstacle arrays must have width*height entries");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (obstacles_[i] != 0) {
            obstacles_[i] = 1;
            gain_units_[i] = 0;
            continue;
        }
        if (gain_units_[i] > kGainUnitsPerOne) {
            throw InputError("gain units must lie in [0, 10]");
        }
        ++traversable_count_;
    }
}

WorldPoint GridMap::center(CellIndex c) const noexcept {
    return {origin_.x + (c.col + 0.5) * cell_size_, origin_.y + (c.row + 0.5) * cell_size_};
}

std::optional<CellIndex> GridMap::world_to_cell(WorldPoint p) const noexcept {
    const double fx = (p.x - origin_.x) / cell_size_;
    const double fy = (p.y - origin_.y) / cell_size_;
    if (!std::isfinite(fx) || !std::isfinite(fy) || fx < 0.0 || fy < 0.0 || fx >= width_ ||
        fy >= height_) {
        return std::nullopt;
    }
    return CellIndex{static_cast<int>(std::floor(fx)), static_cast<int>(std::floor(fy))};
}

CellIndex GridMap::cell_of(WorldPoint p) const {
    auto c = world_to_cell(p);
    if (!c) {
        std::ostringstream os;
        os << "world point (" << p.x << ", " << p.y << ") lies outside the grid";
        throw InputError(os.str());
    }
    return *c;
}

int quantize_gain(double normalized) {
    const double clamped = std::clamp(normalized, 0.0, 1.0);
    return static_cast<int>(std::lround(clamped * kGainUnitsPerOne));
}

namespace {

std::pair<int, int> line_and_column(std::string_view text, std::size_t byte) {
    int line = 1;
    int col = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

double require_number(const json& obj, const char* key, const char* where) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_number()) {
        throw InputError(std::string(where) + ": missing numeric field '" + key + "'");
    }
    const double v = it->get<double>();
    if (!std::isfinite(v)) {
        throw InputError(std::string(where) + ": field '" + key + "' is not finite");
    }
    return v;
}

int lattice_index(double coord, double origin, double cell, const char* axis) {
    const double f = (coord - origin) / cell - 0.5;
    const double r = std::round(f);
    if (std::abs(f - r) > 1e-6) {
        std::ostringstream os;
        os << "cell " << axis << "=" << coord << " is not on the lattice (offset "
           << (f - r) << " cells)";
        throw GeometryError(os.str());
    }
    if (r < 0.0) {
        std::ostringstream os;
        os << "cell " << axis << "=" << coord << " lies before the grid origin";
        throw GeometryError(os.str());
    }
    if (r > 1e7) {
        throw GeometryError("grid extent is unreasonably large");
    }
    return static_cast<int>(r);
}

std::string fnv1a_hex(std::string_view data) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

}  // namespace

GridMap ingest_radio_map(std::string_view document) {
    json doc;
    try {
        doc = json::parse(document.begin(), document.end());
    } catch (const json::parse_error& e) {
        auto [line, col] = line_and_column(document, e.byte > 0 ? e.byte - 1 : 0);
        std::ostringstream os;
        os << "radio map: malformed JSON at line " << line << ", column " << col << ": "
           << e.what();
        throw ParseError(os.str(), line, col);
    }
    if (!doc.is_object()) {
        throw InputError("radio map: document must be a JSON object");
    }
    const double cell = require_number(doc, "cell_size_m", "radio map");
    if (cell <= 0.0) {
        throw GeometryError("radio map: cell_size_m must be positive");
    }
    auto origin_it = doc.find("origin_m");
    if (origin_it == doc.end() || !origin_it->is_array() || origin_it->size() != 2 ||
        !(*origin_it)[0].is_number() || !(*origin_it)[1].is_number()) {
        throw InputError("radio map: origin_m must be an [x, y] pair");
    }
    const WorldPoint origin{(*origin_it)[0].get<double>(), (*origin_it)[1].get<double>()};

    auto cells_it = doc.find("cells");
    if (cells_it == doc.end() || !cells_it->is_array()) {
        throw InputError("radio map: 'cells' must be an array");
    }
    if (cells_it->empty()) {
        throw EmptyMapError("radio map: cell list is empty");
    }

    struct Raw {
        int col;
        int row;
        double value;
    };
    std::vector<Raw> raw;
    raw.reserve(cells_it->size());
    bool any_db = false;
    bool any_norm = false;
    int max_col = 0;
    int max_row = 0;
    for (std::size_t i = 0; i < cells_it->size(); ++i) {
        const json& c = (*cells_it)[i];
        const std::string where = "radio map: cells[" + std::to_string(i) + "]";
        if (!c.is_object()) {
            throw InputError(where + " must be an object");
        }
        const double x = require_number(c, "x", where.c_str());
        const double y = require_number(c, "y", where.c_str());
        double value = 0.0;
        if (c.contains("gain_db")) {
            value = require_number(c, "gain_db", where.c_str());
            any_db = true;
        } else if (c.contains("gain_norm")) {
            value = require_number(c, "gain_norm", where.c_str());
            if (value < -1e-9 || value > 1.0 + 1e-9) {
                throw InputError(where + ": gain_norm outside [0, 1]");
            }
            any_norm = true;
        } else {
            throw InputError(where + ": needs 'gain_db' or 'gain_norm'");
        }
        const int col = lattice_index(x, origin.x, cell, "x");
        const int row = lattice_index(y, origin.y, cell, "y");
        max_col = std::max(max_col, col);
        max_row = std::max(max_row, row);
        raw.push_back({col, row, value});
    }
    if (any_db && any_norm) {
        throw InputError("radio map: cells mix 'gain_db' and 'gain_norm'");
    }

    int width = max_col + 1;
    int height = max_row + 1;
    if (doc.contains("width_cells")) {
        const int w = doc["width_cells"].get<int>();
        if (w < width) {
            throw GeometryError("radio map: width_cells smaller than the cell extent");
        }
        width = w;
    }
    if (doc.contains("height_cells")) {
        const int h = doc["height_cells"].get<int>();
        if (h < height) {
            throw GeometryError("radio map: height_cells smaller than the cell extent");
        }
        height = h;
    }

    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const Raw& r : raw) {
        lo = std::min(lo, r.value);
        hi = std::max(hi, r.value);
    }

    const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    std::vector<std::uint8_t> units(n, 0);
    std::vector<std::uint8_t> obstacles(n, 1);
    for (const Raw& r : raw) {
        const std::size_t idx = static_cast<std::size_t>(r.row) * width + r.col;
        if (obstacles[idx] == 0) {
            std::ostringstream os;
            os << "radio map: duplicate cell at (" << r.col << ", " << r.row << ")";
            throw GeometryError(os.str());
        }
        obstacles[idx] = 0;
        double norm = r.value;
        if (any_db) {
            // All-equal raw gains normalize to 1.0.
            norm = hi > lo ? (r.value - lo) / (hi - lo) : 1.0;
        }
        units[idx] = static_cast<std::uint8_t>(quantize_gain(norm));
    }
    return GridMap(width, height, cell, origin, std::move(units), std::move(obstacles));
}

GridMap load_radio_map(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open radio map '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ingest_radio_map(ss.str());
}

json export_radio_map(const GridMap& map) {
    json cells = json::array();
    for (int row = 0; row < map.height(); ++row) {
        for (int col = 0; col < map.width(); ++col) {
            const CellIndex c{col, row};
            if (map.is_obstacle(c)) {
                continue;
            }
            const WorldPoint p = map.center(c);
            cells.push_back({{"x", p.x}, {"y", p.y}, {"gain_norm", map.gain(c)}});
        }
    }
    return {{"cell_size_m", map.cell_size()},
            {"origin_m", {map.origin().x, map.origin().y}},
            {"width_cells", map.width()},
            {"height_cells", map.height()},
            {"cells", std::move(cells)}};
}

std::string export_radio_map_text(const GridMap& map, int indent) {
    return export_radio_map(map).dump(indent);
}

std::string map_hash(const GridMap& map) { return fnv1a_hex(export_radio_map_text(map)); }

// Synthetic maps ---------------------------------------------------------------

GridMap synthesize_map(const SynthSpec& spec) {
    if (spec.width < 2 || spec.height < 2) {
        throw InputError("synthetic map must be at least 2x2 cells");
    }
    if (!(spec.cell_size > 0.0)) {
        throw InputError("synthetic map cell size must be positive");
    }
    const auto n = static_cast<std::size_t>(spec.width) * static_cast<std::size_t>(spec.height);
    std::vector<std::uint8_t> obstacles(n, 0);
    auto block = [&](const CellRect& r) {
        const int c0 = std::max(0, std::min(r.col0, r.col1));
        const int c1 = std::min(spec.width - 1, std::max(r.col0, r.col1));
        const int r0 = std::max(0, std::min(r.row0, r.row1));
        const int r1 = std::min(spec.height - 1, std::max(r.row0, r.row1));
        for (int row = r0; row <= r1; ++row) {
            for (int col = c0; col <= c1; ++col) {
                obstacles[static_cast<std::size_t>(row) * spec.width + col] = 1;
            }
        }
    };
    for (const CellRect& r : spec.obstacles) {
        block(r);
    }

    // Raw engine output only, so the same seed yields the same map everywhere.
    std::mt19937_64 rng(spec.seed);
    auto uniform_int = [&](int bound) { return static_cast<int>(rng() % static_cast<std::uint64_t>(bound)); };
    auto uniform_real = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

    std::vector<AccessPoint> aps = spec.access_points;
    const double extent_x = spec.width * spec.cell_size;
    const double extent_y = spec.height * spec.cell_size;
    for (int i = 0; i < spec.random_access_points; ++i) {
        aps.push_back({{spec.origin.x + uniform_real() * extent_x,
                        spec.origin.y + uniform_real() * extent_y},
                       0.0});
    }
    for (int i = 0; i < spec.random_obstacles; ++i) {
        const int w = 1 + uniform_int(3);
        const int h = 1 + uniform_int(3);
        const int c = uniform_int(spec.width);
        const int r = uniform_int(spec.height);
        block({c, r, c + w - 1, r + h - 1});
    }
    if (aps.empty()) {
        throw InputError("synthetic map needs at least one access point");
    }

    const GridMap frame(spec.width, spec.height, spec.cell_size, spec.origin,
                        std::vector<std::uint8_t>(n, 0), obstacles);
    const double d_ref = spec.cell_size / 2.0;
    std::vector<double> raw(n, 0.0);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        if (obstacles[i] != 0) {
            continue;
        }
        const WorldPoint p = frame.center(frame.cell_at(i));
        double best = -std::numeric_limits<double>::infinity();
        for (const AccessPoint& ap : aps) {
            const double d = std::hypot(p.x - ap.position.x, p.y - ap.position.y);
            double power = ap.tx_power_db;
            if (spec.decay == DecayModel::kLogDistance) {
                power -= 10.0 * spec.path_loss_exponent * std::log10(std::max(d, d_ref) / d_ref);
            } else {
                power -= spec.slope_db_per_m * d;
            }
            best = std::max(best, power);
        }
        raw[i] = best;
        lo = std::min(lo, best);
        hi = std::max(hi, best);
    }
    std::vector<std::uint8_t> units(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (obstacles[i] != 0) {
            continue;
        }
        const double norm = hi > lo ? (raw[i] - lo) / (hi - lo) : 1.0;
        units[i] = static_cast<std::uint8_t>(quantize_gain(norm));
    }
    return GridMap(spec.width, spec.height, spec.cell_size, spec.origin, std::move(units),
                   std::move(obstacles));
}

SynthSpec synth_spec_from_json(const json& j) {
    SynthSpec s;
    try {
        s.width = j.at("width_cells").get<int>();
        s.height = j.at("height_cells").get<int>();
        s.cell_size = j.value("cell_size_m", 1.0);
        if (j.contains("origin_m")) {
            s.origin = {j["origin_m"].at(0).get<double>(), j["origin_m"].at(1).get<double>()};
        }
        for (const json& ap : j.value("access_points", json::array())) {
            s.access_points.push_back({{ap.at("position_m").at(0).get<double>(),
                                        ap.at("position_m").at(1).get<double>()},
                                       ap.value("tx_power_db", 0.0)});
        }
        for (const json& r : j.value("obstacles", json::array())) {
            s.obstacles.push_back({r.at(0).get<int>(), r.at(1).get<int>(), r.at(2).get<int>(),
                                   r.at(3).get<int>()});
        }
        s.random_access_points = j.value("random_access_points", 0);
        s.random_obstacles = j.value("random_obstacles", 0);
        const std::string decay = j.value("decay", std::string("log"));
        if (decay == "log") {
            s.decay = DecayModel::kLogDistance;
        } else if (decay == "linear") {
            s.decay = DecayModel::kLinear;
        } else {
            throw InputError("synthetic map: unknown decay model '" + decay + "'");
        }
        s.path_loss_exponent = j.value("path_loss_exponent", 2.0);
        s.slope_db_per_m = j.value("slope_db_per_m", 6.0);
        s.seed = j.value("seed", std::uint64_t{0});
    } catch (const json::exception& e) {
        throw InputError(std::string("synthetic map spec: ") + e.what());
    }
    return s;
}

json synth_spec_to_json(const SynthSpec& s) {
    json aps = json::array();
    for (const AccessPoint& ap : s.access_points) {
        aps.push_back({{"position_m", {ap.position.x, ap.position.y}},
                       {"tx_power_db", ap.tx_power_db}});
    }
    json obstacles = json::array();
    for (const CellRect& r : s.obstacles) {
        obstacles.push_back({r.col0, r.row0, r.col1, r.row1});
    }
    return {{"width_cells", s.width},
            {"height_cells", s.height},
            {"cell_size_m", s.cell_size},
            {"origin_m", {s.origin.x, s.origin.y}},
            {"access_points", std::move(aps)},
            {"obstacles", std::move(obstacles)},
            {"random_access_points", s.random_access_points},
            {"random_obstacles", s.random_obstacles},
            {"decay", s.decay == DecayModel::kLogDistance ? "log" : "linear"},
            {"path_loss_exponent", s.path_loss_exponent},
            {"slope_db_per_m", s.slope_db_per_m},
            {"seed", s.seed}};
}

std::vector<CellGain> slice_region(const GridMap& map, WorldPoint center, double radius) {
    if (!(radius > 0.0)) {
        throw InputError("slice radius must be positive");
    }
    const double cs = map.cell_size();
    const WorldPoint o = map.origin();
    const int c0 = std::max(0, static_cast<int>(std::floor((center.x - radius - o.x) / cs)));
    const int c1 = std::min(map.width() - 1, static_cast<int>(std::floor((center.x + radius - o.x) / cs)));
    const int r0 = std::max(0, static_cast<int>(std::floor((center.y - radius - o.y) / cs)));
    const int r1 = std::min(map.height() - 1, static_cast<int>(std::floor((center.y + radius - o.y) / cs)));
    const double r2 = radius * radius * (1.0 + 1e-12);
    std::vector<CellGain> out;
    for (int row = r0; row <= r1; ++row) {
        for (int col = c0; col <= c1; ++col) {
            const CellIndex c{col, row};
            if (map.is_obstacle(c)) {
                continue;
            }
            const WorldPoint p = map.center(c);
            const double dx = p.x - center.x;
            const double dy = p.y - center.y;
            if (dx * dx + dy * dy <= r2) {
                out.push_back({c, map.gain(c)});
            }
        }
    }
    return out;
}

}  // namespace wnav
