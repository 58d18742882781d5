#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "wnav/focus.hpp"
#include "wnav/grid.hpp"
#include "wnav/model_client.hpp"
#include "wnav/plan.hpp"
#include "wnav/validate.hpp"

namespace wnav {

struct ScottConfig {
    /// Number of focus areas requested in subtask 2. Five to seven work best.
    std::size_t n_areas = 6;
    /// Focus-area radius in meters.
    double max_distance = 1.0;
    int max_retries_per_subtask = 2;
    /// Client identifier recorded in transcripts ("mock" or an endpoint URL).
    std::string model_endpoint = "mock";
    double temperature = 0.0;
    /// Heatmap resolution for the subtask-1 image.
    int pixels_per_cell = 8;
};

/// Throws InputError for a zero area count, non-positive radius or negative retries.
void validate_config(const ScottConfig& config);

nlohmann::json to_json(const ScottConfig& config);
ScottConfig scott_config_from_json(const nlohmann::json& j);

// Prompts ------------------------------------------------------------------------

inline constexpr std::string_view kImageAttachmentMarker = "[attached image: radio heatmap]";

struct PromptContext {
    const GridMap* map = nullptr;
    PlanRequest request;
    ScottConfig config;
    /// Subtask-1 result in world coordinates (stages 2 and 3).
    std::vector<WorldPoint> coarse_path;
    /// Stage 3: the area being refined and its position in the stitching order.
    const FocusArea* area = nullptr;
    std::size_t area_index = 0;
    std::size_t area_count = 0;
    /// One-line summary of the previous attempt's problems; empty on first attempts.
    std::string correction;
};

struct RenderedPrompt {
    std::string text;
    bool attach_image = false;
    std::string image_ref;
    std::string data_ref;
    /// Stage 3: the gain data serialized into the prompt.
    std::vector<CellGain> payload;
};

RenderedPrompt render_subtask_prompt(int stage, const PromptContext& context);

// Reply parsing ----------------------------------------------------------------

/// Contents of the last fenced block whose info string is `tag` (any tag when
/// `tag` is empty, plain ``` counts as "json" too).
std::optional<std::string> last_fenced_block(std::string_view text, std::string_view tag = "json");

/// Nearest traversable cell whose center lies within half a cell diagonal of `p`.
std::optional<CellIndex> snap_to_traversable(const GridMap& map, WorldPoint p);

/// Waypoints from the last fenced JSON block: either [[x, y], ...] or
/// {"waypoints": [[x, y], ...]}. Throws ReplyError listing every unsnappable point.
std::vector<CellIndex> parse_waypoint_reply(const GridMap& map, std::string_view raw);

/// Focus-area centers: {"areas": [{"center": [x, y]}, ...]}, {"centers": [[x, y], ...]}
/// or a bare point list. Throws ReplyError for bad schemas, points outside the
/// map, or more than `max_areas` centers.
std::vector<WorldPoint> parse_area_centers(const GridMap& map, std::string_view raw,
                                           std::size_t max_areas);

/// Stable order of focus-area centers along `coarse_path`: by the index of the
/// nearest waypoint (first index wins ties).
std::vector<std::size_t> order_along_path(const std::vector<WorldPoint>& centers,
                                          const std::vector<WorldPoint>& coarse_path);

// Pipeline -----------------------------------------------------------------------

struct SubtaskRecord {
    int stage = 0;
    int area = -1;
    int attempt = 0;
    std::string prompt;
    std::string image_ref;
    std::string data_ref;
    std::string reply;
    /// Compact JSON of the structured output, empty when parsing failed.
    std::string parsed;
    /// "accepted", "rejected", "parse-error" or "transport-error".
    std::string verdict;
    std::vector<std::string> violations;
    double duration_s = 0.0;
};

enum class ScottStatus { kSuccess, kSubtaskFailure, kValidationFailure, kTransportFailure };

const char* to_string(ScottStatus status) noexcept;

struct ScottTranscript {
    std::string client;
    std::vector<SubtaskRecord> records;
    std::vector<std::string> notes;
    ScottStatus status = ScottStatus::kSuccess;
    std::string message;
    std::optional<PlanResult> result;
};

/// With `durations` false, timing fields are omitted so transcripts of
/// deterministic runs compare equal.
nlohmann::json to_json(const ScottTranscript& transcript, bool durations = true);

struct ScottOutcome {
    ScottStatus status = ScottStatus::kSuccess;
    /// Subtask that failed (1-3), 0 on success or for final validation failures.
    int failed_stage = 0;
    std::string message;
    PlanResult result;
    ScottTranscript transcript;
    /// Focus areas used for subtask 3 (present once subtask 2 completed).
    std::optional<FocusAreaSet> focus;
    /// Closest-to-valid stitched path when validation never succeeded.
    std::vector<CellIndex> best_candidate;

    bool ok() const noexcept { return status == ScottStatus::kSuccess; }
};

/// Runs the three subtasks: coarse path from the heatmap, focus areas,
/// per-area refinement. Replies that fail parsing or validation are retried up
/// to `max_retries_per_subtask` times with a violation summary appended. A
/// successful outcome always passes validate_candidate. Invalid requests or
/// configs throw InputError.
ScottOutcome run_scott(const GridMap& map, const PlanRequest& request, const ScottConfig& config,
                       ModelClient& client);

/// Mock script whose replies reproduce the DP-WA* path: the full path as the
/// coarse path, arc-length samples of it as area centers, and consecutive path
/// segments as the per-area refinements. Throws InputError when DP-WA* finds no
/// feasible path.
nlohmann::json make_oracle_script(const GridMap& map, const PlanRequest& request,
                                  const ScottConfig& config);

}  // namespace wnav
