#include <algorithm>
#include <cctype>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "wnav/error.hpp"
#include "wnav/raster.hpp"
#include "wnav/scott.hpp"

namespace wnav {

using nlohmann::json;

namespace {

std::string num(double v, int precision = 3) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(precision) << v;
    std::string s = os.str();
    if (s == "-0.000" || s == "-0.00" || s == "-0.0") {
        s.erase(0, 1);
    }
    return s;
}

std::string point_text(WorldPoint p) { return "(" + num(p.x) + ", " + num(p.y) + ")"; }

std::string point_list(const std::vector<WorldPoint>& pts) {
    std::string s = "[";
    for (std::size_t i = 0; i < pts.size(); ++i) {
        s += (i ? ", [" : "[") + num(pts[i].x) + ", " + num(pts[i].y) + "]";
    }
    return s + "]";
}

constexpr const char* kBandNames[kGainBands] = {
    "red",    "red-orange",   "orange", "amber",      "yellow",
    "yellow-green", "green", "teal", "light blue", "dark blue",
};

std::string correction_block(const std::string& correction) {
    if (correction.empty()) {
        return "";
    }
    return "<Correction>\nYour previous answer was rejected: " + correction +
           "\nFix these problems and answer again in the same format.\n</Correction>\n";
}

std::string stage1(const PromptContext& ctx) {
    const GridMap& map = *ctx.map;
    const WorldPoint lo = map.origin();
    const WorldPoint hi{lo.x + map.width() * map.cell_size(), lo.y + map.height() * map.cell_size()};
    std::ostringstream os;
    os << "<Task>\n"
       << "Plan a path for a ground robot across an indoor radio map.\n"
       << "Start: " << point_text(map.center(ctx.request.start)) << " m. Goal: "
       << point_text(map.center(ctx.request.goal)) << " m.\n"
       << "The path must keep an average normalized path gain of at least G = "
       << num(ctx.request.threshold, 2) << " over all of its waypoints while staying as short as possible.\n"
       << "</Task>\n"
       << "<Map>\n"
       << kImageAttachmentMarker << " Bird's-eye heatmap of normalized path gain.\n"
       << "Each square is one cell of " << num(map.cell_size(), 2) << " m; black lines are cell borders.\n"
       << "The top image row is y = " << num(lo.y + 0.5 * map.cell_size()) << " m and y grows downward; x grows to the right.\n"
       << "Map extent: x from " << num(lo.x) << " to " << num(hi.x) << " m, y from " << num(lo.y) << " to "
       << num(hi.y) << " m.\n"
       << "Color legend:\n";
    for (int b = 0; b < kGainBands; ++b) {
        os << "- " << kBandNames[b] << ": gain " << num(band_lower_bound(b), 1) << " to "
           << num(band_lower_bound(b) + 0.1, 1) << "\n";
    }
    os << "- white: obstacle\n"
       << "</Map>\n"
       << "<Workflow>\n"
       << "Subtask 1 of 3: coarse path.\n"
       << "1. Locate the start and the goal on the heatmap.\n"
       << "2. Look for corridors of green and blue cells that connect them.\n"
       << "3. Forbidden zones: white cells are obstacles and must be avoided. No waypoint may lie in a white "
          "cell and no straight segment between waypoints may cross one.\n"
       << "4. Place waypoints along the chosen corridor, closer together where it bends.\n"
       << "</Workflow>\n"
       << "<Reasoning Strategy>\n"
       << "Compare the direct route with detours through high-gain regions. A detour is worth taking only "
          "when it lifts the average gain to G or above. Explain which corridor you chose and why before "
          "giving the answer.\n"
       << "</Reasoning Strategy>\n"
       << "<Output>\n"
       << "Write your explanation first. Then give exactly one fenced JSON block:\n"
       << "```json\n{\"waypoints\": [[x, y], ...]}\n```\n"
       << "Coordinates are in meters. The first waypoint is the start and the last is the goal.\n"
       << "</Output>\n"
       << correction_block(ctx.correction);
    return os.str();
}

std::string stage2(const PromptContext& ctx) {
    std::ostringstream os;
    os << "<Task>\n"
       << "A coarse path from start " << point_text(ctx.map->center(ctx.request.start)) << " to goal "
       << point_text(ctx.map->center(ctx.request.goal)) << " has been chosen. Define focus areas around it "
       << "so that it can be refined piece by piece.\n"
       << "</Task>\n"
       << "<Coarse Path>\n"
       << point_list(ctx.coarse_path) << "\n"
       << "</Coarse Path>\n"
       << "<Workflow>\n"
       << "Subtask 2 of 3: focus areas.\n"
       << "1. Split the coarse path into N = " << ctx.config.n_areas << " consecutive stretches.\n"
       << "2. Choose one center per stretch. Every focus area is a circle of radius max_distance = "
       << num(ctx.config.max_distance, 2) << " m around its center.\n"
       << "3. The circles together must cover the whole coarse path, including the start and the goal.\n"
       << "4. Prefer centers where the path bends or passes through low-gain cells.\n"
       << "</Workflow>\n"
       << "<Reasoning Strategy>\n"
       << "Walk along the path from start to goal and explain where each stretch begins and ends before "
          "giving the answer.\n"
       << "</Reasoning Strategy>\n"
       << "<Output>\n"
       << "Write your explanation first. Then give exactly one fenced JSON block with " << ctx.config.n_areas
       << " entries ordered from start to goal:\n"
       << "```json\n{\"areas\": [{\"center\": [x, y]}, ...]}\n```\n"
       << "</Output>\n"
       << correction_block(ctx.correction);
    return os.str();
}

std::string stage3(const PromptContext& ctx, const std::vector<CellGain>& payload) {
    const GridMap& map = *ctx.map;
    const FocusArea& area = *ctx.area;
    const double r2 = area.radius * area.radius * (1.0 + 1e-12);
    auto inside = [&](WorldPoint p) {
        const double dx = p.x - area.center.x;
        const double dy = p.y - area.center.y;
        return dx * dx + dy * dy <= r2;
    };
    std::vector<WorldPoint> hint;
    for (const WorldPoint& p : ctx.coarse_path) {
        if (inside(p)) {
            hint.push_back(p);
        }
    }

    std::string cells = "[";
    for (std::size_t i = 0; i < payload.size(); ++i) {
        const WorldPoint c = map.center(payload[i].cell);
        cells += (i ? ",[" : "[") + num(c.x) + "," + num(c.y) + "," + num(payload[i].gain, 1) + "]";
    }
    cells += "]";

    std::ostringstream os;
    os << "<Task>\n"
       << "Refine focus area " << (ctx.area_index + 1) << " of " << ctx.area_count << ".\n"
       << "The complete path must keep an average normalized path gain of at least G = "
       << num(ctx.request.threshold, 2) << ".\n"
       << "</Task>\n"
       << "<Area>\n"
       << "Center " << point_text(area.center) << " m, radius " << num(area.radius, 2) << " m.\n"
       << "Coarse path waypoints inside this area: " << point_list(hint) << "\n";
    if (inside(map.center(ctx.request.start))) {
        os << "The start " << point_text(map.center(ctx.request.start)) << " lies in this area.\n";
    }
    if (inside(map.center(ctx.request.goal))) {
        os << "The goal " << point_text(map.center(ctx.request.goal)) << " lies in this area.\n";
    }
    os << "</Area>\n"
       << "<Data>\n"
       << "Gain of every traversable cell in this area as [x, y, gain] (meters, meters, normalized):\n"
       << "```data\n{\"area\":" << ctx.area_index << ",\"cells\":" << cells << "}\n```\n"
       << "</Data>\n"
       << "<Workflow>\n"
       << "Subtask 3 of 3: fine-grained refinement.\n"
       << "1. Follow the coarse path through this area from where it enters to where it leaves.\n"
       << "2. Replace it with waypoints on neighboring cells, at most " << kMaxBridgedGap
       << " cells apart, choosing higher-gain cells when the detour is short.\n"
       << "3. Forbidden zones: cells missing from the data block are obstacles or lie outside the area. "
          "Do not use them.\n"
       << "</Workflow>\n"
       << "<Reasoning Strategy>\n"
       << "Keep a running estimate of the average gain. Explain each deviation from the coarse path before "
          "giving the answer.\n"
       << "</Reasoning Strategy>\n"
       << "<Output>\n"
       << "Write your explanation first. Then give exactly one fenced JSON block, ordered in the direction "
          "of travel:\n"
       << "```json\n{\"waypoints\": [[x, y], ...]}\n```\n"
       << "</Output>\n"
       << correction_block(ctx.correction);
    return os.str();
}

std::string lower_trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    std::string out(s.substr(b, e - b));
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

json parse_block(std::string_view raw) {
    const auto block = last_fenced_block(raw, "json");
    if (!block) {
        throw ReplyError("no JSON block found in reply");
    }
    try {
        return json::parse(*block);
    } catch (const json::parse_error& e) {
        throw ReplyError(std::string("JSON block does not parse: ") + e.what());
    }
}

std::vector<WorldPoint> point_array(const json& j, const char* what) {
    if (!j.is_array()) {
        throw ReplyError(std::string("schema mismatch: ") + what + " must be a list of [x, y] pairs");
    }
    std::vector<WorldPoint> pts;
    for (const auto& p : j) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
            throw ReplyError(std::string("schema mismatch: ") + what + " entry " + p.dump() +
                             " is not an [x, y] pair");
        }
        pts.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    return pts;
}

}  // namespace

RenderedPrompt render_subtask_prompt(int stage, const PromptContext& ctx) {
    if (ctx.map == nullptr) {
        throw InputError("prompt context has no map");
    }
    RenderedPrompt p;
    switch (stage) {
        case 1:
            p.text = stage1(ctx);
            p.attach_image = true;
            p.image_ref = "heatmap.png";
            break;
        case 2:
            p.text = stage2(ctx);
            break;
        case 3: {
            if (ctx.area == nullptr) {
                throw InputError("stage 3 prompt needs a focus area");
            }
            for (const CellIndex& c : ctx.area->members) {
                p.payload.push_back({c, ctx.map->gain(c)});
            }
            p.text = stage3(ctx, p.payload);
            p.data_ref = "area-" + std::to_string(ctx.area_index) + ".json";
            break;
        }
        default:
            throw InputError("subtask stage must be 1, 2 or 3");
    }
    return p;
}

std::optional<std::string> last_fenced_block(std::string_view text, std::string_view tag) {
    std::optional<std::string> found;
    bool open = false;
    std::string info;
    std::string body;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        const std::string_view line = text.substr(pos, end - pos);
        const std::size_t first = line.find_first_not_of(" \t");
        const bool fence = first != std::string_view::npos && line.substr(first).starts_with("```");
        if (fence && !open) {
            open = true;
            info = lower_trim(line.substr(first + 3));
            body.clear();
        } else if (fence && open) {
            open = false;
            const bool match = tag.empty() || info == tag || (tag == "json" && info.empty());
            if (match) {
                found = body;
            }
        } else if (open) {
            body.append(line);
            body.push_back('\n');
        }
        pos = end + 1;
    }
    return found;
}

std::optional<CellIndex> snap_to_traversable(const GridMap& map, WorldPoint p) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        return std::nullopt;
    }
    const double cs = map.cell_size();
    const double fc = std::floor((p.x - map.origin().x) / cs);
    const double fr = std::floor((p.y - map.origin().y) / cs);
    if (fc < -2.0 || fr < -2.0 || fc > map.width() + 1.0 || fr > map.height() + 1.0) {
        return std::nullopt;
    }
    const double tol = cs * std::sqrt(2.0) / 2.0 * (1.0 + 1e-9);
    std::optional<CellIndex> best;
    double best_d = std::numeric_limits<double>::infinity();
    for (int r = static_cast<int>(fr) - 1; r <= static_cast<int>(fr) + 1; ++r) {
        for (int c = static_cast<int>(fc) - 1; c <= static_cast<int>(fc) + 1; ++c) {
            const CellIndex cell{c, r};
            if (!map.traversable(cell)) {
                continue;
            }
            const WorldPoint ctr = map.center(cell);
            const double d = std::hypot(ctr.x - p.x, ctr.y - p.y);
            if (d <= tol && d < best_d) {
                best = cell;
                best_d = d;
            }
        }
    }
    return best;
}

std::vector<CellIndex> parse_waypoint_reply(const GridMap& map, std::string_view raw) {
    const json j = parse_block(raw);
    std::vector<WorldPoint> pts;
    if (j.is_object()) {
        if (!j.contains("waypoints")) {
            throw ReplyError("schema mismatch: expected a \"waypoints\" field");
        }
        pts = point_array(j["waypoints"], "waypoints");
    } else {
        pts = point_array(j, "waypoints");
    }
    if (pts.empty()) {
        throw ReplyError("empty waypoint list");
    }
    std::vector<CellIndex> cells;
    std::vector<std::string> bad;
    for (const WorldPoint& p : pts) {
        if (auto c = snap_to_traversable(map, p)) {
            cells.push_back(*c);
        } else {
            bad.push_back(point_text(p));
        }
    }
    if (!bad.empty()) {
        std::string msg = "no traversable cell within half a cell diagonal of";
        for (std::size_t i = 0; i < bad.size(); ++i) {
            msg += (i ? ", " : " ") + bad[i];
        }
        throw ReplyError(msg);
    }
    return cells;
}

std::vector<WorldPoint> parse_area_centers(const GridMap& map, std::string_view raw, std::size_t max_areas) {
    const json j = parse_block(raw);
    std::vector<WorldPoint> centers;
    if (j.is_object() && j.contains("areas")) {
        if (!j["areas"].is_array()) {
            throw ReplyError("schema mismatch: \"areas\" must be a list");
        }
        json pts = json::array();
        for (const auto& a : j["areas"]) {
            if (!a.is_object() || !a.contains("center")) {
                throw ReplyError("schema mismatch: every area needs a \"center\"");
            }
            pts.push_back(a["center"]);
        }
        centers = point_array(pts, "area centers");
    } else if (j.is_object() && j.contains("centers")) {
        centers = point_array(j["centers"], "centers");
    } else {
        centers = point_array(j, "centers");
    }
    if (centers.empty()) {
        throw ReplyError("empty focus-area list");
    }
    if (centers.size() > max_areas) {
        throw ReplyError("expected at most " + std::to_string(max_areas) + " focus areas, got " +
                         std::to_string(centers.size()));
    }
    std::vector<std::string> bad;
    for (const WorldPoint& c : centers) {
        if (!map.world_to_cell(c)) {
            bad.push_back(point_text(c));
        }
    }
    if (!bad.empty()) {
        std::string msg = "focus-area centers outside the map:";
        for (std::size_t i = 0; i < bad.size(); ++i) {
            msg += (i ? ", " : " ") + bad[i];
        }
        throw ReplyError(msg);
    }
    return centers;
}

std::vector<std::size_t> order_along_path(const std::vector<WorldPoint>& centers,
                                          const std::vector<WorldPoint>& coarse_path) {
    std::vector<std::size_t> nearest(centers.size(), 0);
    for (std::size_t i = 0; i < centers.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < coarse_path.size(); ++k) {
            const double d = std::hypot(coarse_path[k].x - centers[i].x, coarse_path[k].y - centers[i].y);
            if (d < best) {
                best = d;
                nearest[i] = k;
            }
        }
    }
    std::vector<std::size_t> order(centers.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return nearest[a] < nearest[b]; });
    return order;
}

}  // namespace wnav
