#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "wnav/focus.hpp"
#include "wnav/grid.hpp"
#include "wnav/plan.hpp"
#include "wnav/raster.hpp"
#include "wnav/scott.hpp"

namespace wnav {

/// Algorithm keys used in scenario files, in table order.
inline constexpr const char* kAlgorithmKeys[] = {"astar", "nwa", "dpwa", "scott", "scott-dpwa"};

/// Display name ("A*", "N-WA*", ...) for a key. Throws InputError for unknown keys.
std::string algorithm_display_name(const std::string& key);
/// Accepts a key or a display name.
std::string algorithm_key(const std::string& name);

struct Scenario {
    std::string name;
    /// Exactly one of map_file / synthetic is set.
    std::optional<std::filesystem::path> map_file;
    std::optional<SynthSpec> synthetic;
    WorldPoint start;
    WorldPoint goal;
    double threshold = 0.0;
    double epsilon = 1e-6;
    int runs = 10;
    std::vector<std::string> algorithms;
    ScottConfig scott;
    /// Mock script for the SCoTT rows; without one the DP-WA* oracle script is used.
    std::optional<std::filesystem::path> mock_script;
    std::uint64_t seed = 0;
};

/// Parses a scenario document; relative paths resolve against `base_dir`.
Scenario scenario_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& path);
nlohmann::json to_json(const Scenario& scenario);

GridMap load_scenario_map(const Scenario& scenario);
/// Snaps the scenario's start/goal; throws InputError when either is not on a
/// traversable cell.
PlanRequest scenario_request(const GridMap& map, const Scenario& scenario);

struct RunRecord {
    std::string algorithm;
    int run = 0;
    std::uint64_t seed = 0;
    /// Path valid for the request: obstacle-free, connected, endpoints, avg >= G.
    bool success = false;
    std::optional<PlanResult> result;
    std::string error;
};

struct MetricsRow {
    std::string algorithm;
    int runs = 0;
    int successes = 0;
    /// Means over runs that produced a path.
    double avg_path_gain = 0.0;
    double path_length_m = 0.0;
    /// Mean over all runs.
    double runtime_s = 0.0;
    double success_rate_percent = 0.0;
    double expanded_states = 0.0;
    /// DP-WA* expanded states over this row's, for the DP-based rows.
    std::optional<double> speedup_vs_reference;
    double avg_path_gain_stddev = 0.0;
    double path_length_stddev = 0.0;
    double expanded_states_stddev = 0.0;
};

struct ScenarioReport {
    Scenario scenario;
    std::string map_hash;
    std::vector<RunRecord> records;
    std::vector<MetricsRow> rows;
    std::optional<FocusAreaSet> focus;
    std::optional<MaskStats> mask;
    /// Transcript of the first SCoTT run.
    std::optional<ScottTranscript> transcript;
};

/// Runs every selected algorithm `runs` times. Input errors abort only the
/// affected row (its runs are recorded as failures). The SCoTT-DP-WA* row uses
/// the focus areas cached by the SCoTT row, building them if needed.
ScenarioReport run_scenario(const Scenario& scenario, const GridMap& map, FocusCache& cache);
ScenarioReport run_scenario(const Scenario& scenario);

/// Aggregates records of one algorithm (exposed for tests).
MetricsRow aggregate(const std::string& algorithm, const std::vector<RunRecord>& records);

nlohmann::json to_json(const RunRecord& record);
nlohmann::json to_json(const MetricsRow& row);

enum class TableFormat { kCsv, kMarkdown, kJson };

TableFormat parse_table_format(const std::string& name);
const char* file_extension(TableFormat format) noexcept;

/// Fixed columns: algorithm, avg_path_gain, path_length_m, runtime_s,
/// success_rate_percent, expanded_states, speedup_vs_reference. Floats use
/// two decimals in CSV and Markdown.
std::string emit_table(const std::vector<MetricsRow>& rows, TableFormat format);

struct FigurePath {
    std::string algorithm;
    std::vector<CellIndex> waypoints;
};

/// Overlay color for an algorithm key or display name. Throws InputError for unknown names.
Rgb algorithm_color(const std::string& algorithm);

/// Heatmap with one labeled overlay per path.
Raster render_figure(const GridMap& map, const std::vector<FigurePath>& paths,
                     const RenderOptions& options = {});
void emit_figure(const GridMap& map, const std::vector<FigurePath>& paths,
                 const std::filesystem::path& output, const RenderOptions& options = {});

/// First-run path of every algorithm that produced one, in table order.
std::vector<FigurePath> figure_paths(const ScenarioReport& report);

/// Writes tables, per-run records, the figure and the SCoTT transcript into
/// `out_dir` (file names prefixed by the scenario name). Returns written paths.
std::vector<std::filesystem::path> write_report(const ScenarioReport& report, const GridMap& map,
                                                const std::filesystem::path& out_dir,
                                                const std::vector<TableFormat>& formats);

/// Writes `content` to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace wnav
