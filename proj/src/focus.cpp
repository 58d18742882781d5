#include "wnav/focus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <queue>
#include <sstream>

#include <nlohmann/json.hpp>

#include "wnav/error.hpp"

namespace wnav {

using nlohmann::json;

const char* to_string(FocusSource source) noexcept {
    return source == FocusSource::kModelProposed ? "model-proposed" : "auto-generated";
}

std::string MaskKey::canonical() const {
    std::ostringstream os;
    os << map_hash << '|' << start.col << ',' << start.row << '|' << goal.col << ',' << goal.row
       << '|' << std::fixed << std::setprecision(6) << threshold;
    return os.str();
}

FocusAreaSet::FocusAreaSet(std::vector<FocusArea> areas, FocusSource source)
    : areas_(std::move(areas)), source_(source) {
    if (areas_.empty()) {
        throw InputError("a focus-area set needs at least one area");
    }
}

std::vector<std::uint8_t> FocusAreaSet::mask(const GridMap& map) const {
    std::vector<std::uint8_t> out(map.cell_count(), 0);
    for (const FocusArea& a : areas_) {
        for (const CellIndex& c : a.members) {
            if (map.contains(c)) {
                out[map.index(c)] = 1;
            }
        }
    }
    return out;
}

std::vector<CellIndex> FocusAreaSet::member_cells() const {
    std::vector<CellIndex> cells;
    for (const FocusArea& a : areas_) {
        cells.insert(cells.end(), a.members.begin(), a.members.end());
    }
    std::sort(cells.begin(), cells.end(), [](const CellIndex& a, const CellIndex& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
    return cells;
}

bool FocusAreaSet::contains(CellIndex c) const {
    return std::any_of(areas_.begin(), areas_.end(), [&](const FocusArea& a) {
        return std::binary_search(a.members.begin(), a.members.end(), c,
                                  [](const CellIndex& x, const CellIndex& y) {
                                      return x.row != y.row ? x.row < y.row : x.col < y.col;
                                  });
    });
}

FocusArea make_focus_area(const GridMap& map, WorldPoint center, double max_distance) {
    if (!(max_distance > 0.0)) {
        throw InputError("max_distance must be positive");
    }
    FocusArea area;
    area.center = center;
    area.radius = max_distance;
    std::vector<KdTree::Item> items;
    for (const CellGain& cg : slice_region(map, center, max_distance)) {
        area.members.push_back(cg.cell);
        items.push_back({map.center(cg.cell), cg.cell});
    }
    area.index = KdTree(std::move(items));
    return area;
}

std::vector<std::size_t> arc_length_samples(const GridMap& map, const std::vector<CellIndex>& path,
                                            std::size_t n) {
    std::vector<std::size_t> picks;
    if (path.empty() || n == 0) {
        return picks;
    }
    std::vector<double> s(path.size(), 0.0);
    for (std::size_t i = 1; i < path.size(); ++i) {
        const WorldPoint a = map.center(path[i - 1]);
        const WorldPoint b = map.center(path[i]);
        s[i] = s[i - 1] + std::hypot(b.x - a.x, b.y - a.y);
    }
    const double total = s.back();
    auto closest = [&](double target) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < s.size(); ++i) {
            if (std::abs(s[i] - target) < std::abs(s[best] - target)) {
                best = i;
            }
        }
        return best;
    };
    if (n == 1) {
        picks.push_back(closest(total / 2.0));
        return picks;
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (j == 0) {
            picks.push_back(0);
        } else if (j + 1 == n) {
            picks.push_back(path.size() - 1);
        } else {
            picks.push_back(closest(total * static_cast<double>(j) / static_cast<double>(n - 1)));
        }
    }
    return picks;
}

namespace {

void check_union(const GridMap& map, FocusAreaSet& set, const std::vector<CellIndex>* source_path) {
    const std::vector<std::uint8_t> m = set.mask(map);
    if (source_path) {
        for (const CellIndex& c : *source_path) {
            if (map.contains(c) && !m[map.index(c)]) {
                std::ostringstream os;
                os << "coarse-path waypoint (" << c.col << ", " << c.row << ") is outside every focus area";
                set.add_warning(os.str());
                break;
            }
        }
    }
    // Connectivity of the union under 8-adjacency.
    std::vector<std::uint8_t> seen(m.size(), 0);
    std::size_t components = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (!m[i] || seen[i]) {
            continue;
        }
        ++components;
        std::queue<std::size_t> q;
        q.push(i);
        seen[i] = 1;
        while (!q.empty()) {
            const CellIndex c = map.cell_at(q.front());
            q.pop();
            for (int dr = -1; dr <= 1; ++dr) {
                for (int dc = -1; dc <= 1; ++dc) {
                    const CellIndex nb{c.col + dc, c.row + dr};
                    if (!map.contains(nb)) {
                        continue;
                    }
                    const std::size_t j = map.index(nb);
                    if (m[j] && !seen[j]) {
                        seen[j] = 1;
                        q.push(j);
                    }
                }
            }
        }
    }
    if (components > 1) {
        set.add_warning("focus-area union is disconnected (" + std::to_string(components) + " components)");
    }
}

}  // namespace

FocusAreaSet build_focus_areas(const GridMap& map, const std::vector<CellIndex>& coarse_path,
                               std::size_t n_areas, double max_distance) {
    if (coarse_path.empty()) {
        throw InputError("coarse path is empty");
    }
    if (n_areas == 0) {
        throw InputError("need at least one focus area");
    }
    if (!(max_distance > 0.0)) {
        throw InputError("max_distance must be positive");
    }
    for (const CellIndex& c : coarse_path) {
        if (!map.traversable(c)) {
            std::ostringstream os;
            os << "coarse-path waypoint (" << c.col << ", " << c.row << ") is not traversable";
            throw InputError(os.str());
        }
    }
    std::vector<std::string> warnings;
    std::size_t n = n_areas;
    if (n > coarse_path.size()) {
        warnings.push_back("N=" + std::to_string(n_areas) + " exceeds the " +
                           std::to_string(coarse_path.size()) + " coarse-path waypoints; clamped");
        n = coarse_path.size();
    }
    std::vector<FocusArea> areas;
    for (std::size_t i : arc_length_samples(map, coarse_path, n)) {
        areas.push_back(make_focus_area(map, map.center(coarse_path[i]), max_distance));
    }
    FocusAreaSet set(std::move(areas), FocusSource::kAutoGenerated);
    for (std::string& w : warnings) {
        set.add_warning(std::move(w));
    }
    check_union(map, set, &coarse_path);
    return set;
}

FocusAreaSet focus_areas_from_centers(const GridMap& map, const std::vector<WorldPoint>& centers,
                                      double max_distance, FocusSource source) {
    if (centers.empty()) {
        throw InputError("need at least one focus-area center");
    }
    std::vector<FocusArea> areas;
    for (const WorldPoint& c : centers) {
        areas.push_back(make_focus_area(map, c, max_distance));
    }
    FocusAreaSet set(std::move(areas), source);
    check_union(map, set, nullptr);
    return set;
}

MaskStats mask_stats(const GridMap& map, const FocusAreaSet& set) {
    MaskStats s;
    const std::vector<std::uint8_t> m = set.mask(map);
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (m[i] && !map.is_obstacle(map.cell_at(i))) {
            ++s.mask_cells;
        }
    }
    s.traversable_cells = map.traversable_count();
    s.reduction_fraction =
        s.traversable_cells == 0 ? 0.0
                                 : 1.0 - static_cast<double>(s.mask_cells) / static_cast<double>(s.traversable_cells);
    return s;
}

double tune_max_distance(const GridMap& map, const std::vector<CellIndex>& coarse_path,
                         std::size_t n_areas, double target_reduction) {
    double lo = map.cell_size() * 1e-3;
    double hi = std::hypot(map.width(), map.height()) * map.cell_size();
    auto reduction = [&](double r) {
        return mask_stats(map, build_focus_areas(map, coarse_path, n_areas, r)).reduction_fraction;
    };
    if (reduction(hi) > target_reduction) {
        return hi;
    }
    // reduction(r) is non-increasing in r.
    while (hi - lo > 1e-3) {
        const double mid = 0.5 * (lo + hi);
        if (reduction(mid) > target_reduction) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return hi;
}

// Serialization -----------------------------------------------------------------

json to_json(const FocusAreaSet& set) {
    json areas = json::array();
    for (const FocusArea& a : set.areas()) {
        json members = json::array();
        for (const CellIndex& c : a.members) {
            members.push_back({c.col, c.row});
        }
        areas.push_back({{"center_m", {a.center.x, a.center.y}},
                         {"radius_m", a.radius},
                         {"members", std::move(members)}});
    }
    json j = {{"version", kMaskFormatVersion},
              {"source", to_string(set.source())},
              {"areas", std::move(areas)},
              {"warnings", set.warnings()}};
    if (const auto& k = set.key()) {
        j["key"] = {{"map_hash", k->map_hash},
                    {"start", {k->start.col, k->start.row}},
                    {"goal", {k->goal.col, k->goal.row}},
                    {"G", k->threshold}};
    }
    return j;
}

FocusAreaSet focus_from_json(const json& j, const GridMap& map) {
    try {
        const int version = j.at("version").get<int>();
        if (version != kMaskFormatVersion) {
            throw VersionError("mask format version " + std::to_string(version) +
                               " is not supported (expected " + std::to_string(kMaskFormatVersion) + ")");
        }
        std::vector<FocusArea> areas;
        for (const json& a : j.at("areas")) {
            FocusArea area;
            area.center = {a.at("center_m").at(0).get<double>(), a.at("center_m").at(1).get<double>()};
            area.radius = a.at("radius_m").get<double>();
            std::vector<KdTree::Item> items;
            for (const json& m : a.at("members")) {
                const CellIndex c{m.at(0).get<int>(), m.at(1).get<int>()};
                if (!map.traversable(c)) {
                    throw InputError("mask member is not a traversable cell of this map");
                }
                area.members.push_back(c);
                items.push_back({map.center(c), c});
            }
            area.index = KdTree(std::move(items));
            areas.push_back(std::move(area));
        }
        const std::string source = j.value("source", std::string("auto-generated"));
        FocusAreaSet set(std::move(areas), source == "model-proposed" ? FocusSource::kModelProposed
                                                                      : FocusSource::kAutoGenerated);
        for (const json& w : j.value("warnings", json::array())) {
            set.add_warning(w.get<std::string>());
        }
        if (j.contains("key")) {
            const json& k = j["key"];
            set.set_key({k.at("map_hash").get<std::string>(),
                         {k.at("start").at(0).get<int>(), k.at("start").at(1).get<int>()},
                         {k.at("goal").at(0).get<int>(), k.at("goal").at(1).get<int>()},
                         k.at("G").get<double>()});
        }
        return set;
    } catch (const json::exception& e) {
        throw InputError(std::string("mask JSON: ") + e.what());
    }
}

FocusCache::FocusCache(std::filesystem::path directory) : directory_(std::move(directory)) {
    std::filesystem::create_directories(*directory_);
}

std::filesystem::path FocusCache::file_for(const MaskKey& key) const {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : key.canonical()) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << "mask-" << std::hex << std::setw(16) << std::setfill('0') << h << ".json";
    return *directory_ / os.str();
}

std::optional<FocusAreaSet> FocusCache::find_locked(const GridMap& map, const MaskKey& key) {
    const std::string k = key.canonical();
    auto it = entries_.find(k);
    if (it == entries_.end() && directory_) {
        std::ifstream in(file_for(key));
        if (in) {
            std::ostringstream ss;
            ss << in.rdbuf();
            it = entries_.emplace(k, ss.str()).first;
        }
    }
    if (it == entries_.end()) {
        return std::nullopt;
    }
    FocusAreaSet set = focus_from_json(json::parse(it->second), map);
    if (!set.key() || !(*set.key() == key)) {
        return std::nullopt;
    }
    return set;
}

std::optional<FocusAreaSet> FocusCache::find(const GridMap& map, const MaskKey& key) {
    std::lock_guard lock(mutex_);
    auto found = find_locked(map, key);
    if (found) {
        ++hits_;
    }
    return found;
}

void FocusCache::put(const MaskKey& key, FocusAreaSet set) {
    std::lock_guard lock(mutex_);
    set.set_key(key);
    const std::string text = to_json(set).dump();
    entries_[key.canonical()] = text;
    if (directory_) {
        const auto path = file_for(key);
        auto tmp = path;
        tmp += ".tmp";
        {
            std::ofstream out(tmp, std::ios::trunc);
            out << text;
        }
        std::filesystem::rename(tmp, path);
    }
}

FocusAreaSet FocusCache::get_or_build(const GridMap& map, const MaskKey& key, const Builder& build) {
    {
        std::lock_guard lock(mutex_);
        if (auto found = find_locked(map, key)) {
            ++hits_;
            return *found;
        }
        ++builds_;
    }
    FocusAreaSet set = build();
    put(key, set);
    set.set_key(key);
    return set;
}

}  // namespace wnav
