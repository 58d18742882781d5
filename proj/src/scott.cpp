#include "wnav/scott.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "wnav/dpwa.hpp"
#include "wnav/error.hpp"
#include "wnav/raster.hpp"

namespace wnav {

using nlohmann::json;

void validate_config(const ScottConfig& config) {
    if (config.n_areas == 0) {
        throw InputError("n_areas must be at least 1");
    }
    if (!(config.max_distance > 0.0)) {
        throw InputError("max_distance must be positive");
    }
    if (config.max_retries_per_subtask < 0) {
        throw InputError("max_retries_per_subtask must be non-negative");
    }
    if (config.pixels_per_cell < 2) {
        throw InputError("pixels_per_cell must be at least 2");
    }
}

json to_json(const ScottConfig& c) {
    return json{{"n_areas", c.n_areas},
                {"max_distance_m", c.max_distance},
                {"max_retries_per_subtask", c.max_retries_per_subtask},
                {"model_endpoint", c.model_endpoint},
                {"temperature", c.temperature},
                {"pixels_per_cell", c.pixels_per_cell}};
}

ScottConfig scott_config_from_json(const json& j) {
    ScottConfig c;
    try {
        c.n_areas = j.value("n_areas", c.n_areas);
        c.max_distance = j.value("max_distance_m", c.max_distance);
        c.max_retries_per_subtask = j.value("max_retries_per_subtask", c.max_retries_per_subtask);
        c.model_endpoint = j.value("model_endpoint", c.model_endpoint);
        c.temperature = j.value("temperature", c.temperature);
        c.pixels_per_cell = j.value("pixels_per_cell", c.pixels_per_cell);
    } catch (const json::exception& e) {
        throw InputError(std::string("bad scott config: ") + e.what());
    }
    validate_config(c);
    return c;
}

const char* to_string(ScottStatus status) noexcept {
    switch (status) {
        case ScottStatus::kSuccess: return "success";
        case ScottStatus::kSubtaskFailure: return "subtask-failure";
        case ScottStatus::kValidationFailure: return "validation-failure";
        case ScottStatus::kTransportFailure: return "transport-failure";
    }
    return "unknown";
}

json to_json(const ScottTranscript& t, bool durations) {
    json records = json::array();
    for (const SubtaskRecord& r : t.records) {
        json jr{{"stage", r.stage},       {"area", r.area},
                {"attempt", r.attempt},   {"prompt", r.prompt},
                {"image_ref", r.image_ref}, {"data_ref", r.data_ref},
                {"reply", r.reply},       {"verdict", r.verdict},
                {"violations", r.violations}};
        jr["parsed"] = r.parsed.empty() ? json(nullptr) : json::parse(r.parsed);
        if (durations) {
            jr["duration_s"] = r.duration_s;
        }
        records.push_back(std::move(jr));
    }
    json j{{"client", t.client},
           {"status", to_string(t.status)},
           {"message", t.message},
           {"notes", t.notes},
           {"records", records}};
    if (t.result) {
        json r = to_json(*t.result);
        if (!durations) {
            r.erase("runtime_s");
        }
        j["result"] = r;
    } else {
        j["result"] = nullptr;
    }
    return j;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

json points_json(const GridMap& map, const std::vector<CellIndex>& cells) {
    json a = json::array();
    for (const CellIndex& c : cells) {
        const WorldPoint p = map.center(c);
        a.push_back({p.x, p.y});
    }
    return a;
}

std::vector<WorldPoint> centers_of(const GridMap& map, const std::vector<CellIndex>& cells) {
    std::vector<WorldPoint> out;
    out.reserve(cells.size());
    for (const CellIndex& c : cells) {
        out.push_back(map.center(c));
    }
    return out;
}

// Fewer violations first, then higher average gain.
bool closer_to_valid(const Verdict& a, const Verdict& b) {
    if (a.violations.size() != b.violations.size()) {
        return a.violations.size() < b.violations.size();
    }
    return a.avg_gain > b.avg_gain;
}

class Pipeline {
public:
    Pipeline(const GridMap& map, const PlanRequest& request, const ScottConfig& config, ModelClient& client)
        : map_(map), request_(request), config_(config), client_(client) {
        out_.transcript.client = client.name();
        ctx_.map = &map;
        ctx_.request = request;
        ctx_.config = config;
    }

    ScottOutcome run() {
        const auto t0 = Clock::now();
        try {
            if (subtask1() && subtask2() && subtask3()) {
                out_.result.runtime_s = seconds_since(t0);
                out_.transcript.result = out_.result;
            }
        } catch (const TransportError& e) {
            if (!out_.transcript.records.empty()) {
                out_.transcript.records.back().verdict = "transport-error";
                out_.transcript.records.back().violations = {e.what()};
            }
            fail(ScottStatus::kTransportFailure, current_stage_, std::string("model client error: ") + e.what());
        }
        out_.transcript.status = out_.status;
        out_.transcript.message = out_.message;
        return std::move(out_);
    }

private:
    int attempts() const { return config_.max_retries_per_subtask + 1; }

    void fail(ScottStatus status, int stage, std::string message) {
        out_.status = status;
        out_.failed_stage = stage;
        out_.message = std::move(message);
    }

    SubtaskRecord& ask(int stage, int area, int attempt, const RenderedPrompt& prompt) {
        current_stage_ = stage;
        SubtaskRecord& rec = out_.transcript.records.emplace_back();
        rec.stage = stage;
        rec.area = area;
        rec.attempt = attempt;
        rec.prompt = prompt.text;
        rec.image_ref = prompt.image_ref;
        rec.data_ref = prompt.data_ref;
        ModelRequest req;
        req.text = prompt.text;
        if (prompt.attach_image) {
            req.image_png = heatmap_png();
        }
        req.image_ref = prompt.image_ref;
        req.data_ref = prompt.data_ref;
        req.stage = stage;
        req.area = area;
        req.attempt = attempt;
        const auto t0 = Clock::now();
        rec.reply = client_.complete(req);
        rec.duration_s = seconds_since(t0);
        return rec;
    }

    const std::vector<std::uint8_t>& heatmap_png() {
        if (png_.empty()) {
            RenderOptions opts;
            opts.pixels_per_cell = config_.pixels_per_cell;
            png_ = encode_png(render_heatmap(map_, {}, opts));
        }
        return png_;
    }

    bool subtask1() {
        std::string correction;
        for (int a = 0; a < attempts(); ++a) {
            ctx_.correction = correction;
            SubtaskRecord& rec = ask(1, -1, a, render_subtask_prompt(1, ctx_));
            try {
                std::vector<CellIndex> cells = parse_waypoint_reply(map_, rec.reply);
                if (cells.front() != request_.start) {
                    cells.insert(cells.begin(), request_.start);
                }
                if (cells.back() != request_.goal) {
                    cells.push_back(request_.goal);
                }
                coarse_ = std::move(cells);
                rec.parsed = json{{"waypoints", points_json(map_, coarse_)}}.dump();
                rec.verdict = "accepted";
                ctx_.coarse_path = centers_of(map_, coarse_);
                return true;
            } catch (const ReplyError& e) {
                rec.verdict = "parse-error";
                rec.violations = {e.what()};
                correction = e.what();
            }
        }
        fail(ScottStatus::kSubtaskFailure, 1,
             "subtask 1 (coarse path) failed after " + std::to_string(attempts()) +
                 " attempts: " + correction);
        return false;
    }

    bool subtask2() {
        std::string correction;
        std::optional<FocusAreaSet> set;
        for (int a = 0; a < attempts() && !set; ++a) {
            ctx_.correction = correction;
            SubtaskRecord& rec = ask(2, -1, a, render_subtask_prompt(2, ctx_));
            try {
                std::vector<WorldPoint> centers = parse_area_centers(map_, rec.reply, config_.n_areas);
                std::vector<WorldPoint> ordered;
                for (std::size_t i : order_along_path(centers, ctx_.coarse_path)) {
                    ordered.push_back(centers[i]);
                }
                FocusAreaSet candidate =
                    focus_areas_from_centers(map_, ordered, config_.max_distance, FocusSource::kModelProposed);
                std::vector<std::string> problems;
                for (std::size_t k = 0; k < candidate.areas().size(); ++k) {
                    if (candidate.areas()[k].members.empty()) {
                        problems.push_back("focus area " + std::to_string(k + 1) + " contains no traversable cell");
                    }
                }
                if (!candidate.contains(request_.start)) {
                    problems.push_back("no focus area contains the start");
                }
                if (!candidate.contains(request_.goal)) {
                    problems.push_back("no focus area contains the goal");
                }
                json parsed = json::array();
                for (const WorldPoint& c : ordered) {
                    parsed.push_back({{"center", {c.x, c.y}}});
                }
                rec.parsed = json{{"areas", parsed}}.dump();
                if (problems.empty()) {
                    rec.verdict = "accepted";
                    set = std::move(candidate);
                } else {
                    rec.verdict = "rejected";
                    rec.violations = problems;
                    correction.clear();
                    for (std::size_t i = 0; i < problems.size(); ++i) {
                        correction += (i ? "; " : "") + problems[i];
                    }
                }
            } catch (const ReplyError& e) {
                rec.verdict = "parse-error";
                rec.violations = {e.what()};
                correction = e.what();
            }
        }
        if (!set) {
            out_.transcript.notes.push_back("subtask 2 produced no usable focus areas (" + correction +
                                            "); fell back to arc-length sampling of the coarse path");
            set = build_focus_areas(map_, coarse_, config_.n_areas, config_.max_distance);
        }
        for (const std::string& w : set->warnings()) {
            out_.transcript.notes.push_back("focus areas: " + w);
        }
        set->set_key(MaskKey{map_hash(map_), request_.start, request_.goal, request_.threshold});
        out_.focus = std::move(set);
        return true;
    }

    bool subtask3() {
        const std::vector<FocusArea>& areas = out_.focus->areas();
        const std::size_t n = areas.size();
        std::vector<std::optional<std::vector<CellIndex>>> parts(n);
        std::vector<int> asked(n, 0);
        std::vector<std::string> correction(n);
        std::optional<Verdict> best;
        bool last_round_parse_failed = false;
        std::string last_error;

        for (int round = 0; round < attempts(); ++round) {
            last_round_parse_failed = false;
            std::vector<std::size_t> round_records;
            for (std::size_t k = 0; k < n; ++k) {
                if (parts[k]) {
                    continue;
                }
                ctx_.area = &areas[k];
                ctx_.area_index = k;
                ctx_.area_count = n;
                ctx_.correction = correction[k];
                SubtaskRecord& rec = ask(3, static_cast<int>(k), asked[k]++, render_subtask_prompt(3, ctx_));
                round_records.push_back(out_.transcript.records.size() - 1);
                try {
                    std::vector<CellIndex> cells = parse_waypoint_reply(map_, rec.reply);
                    rec.parsed = json{{"waypoints", points_json(map_, cells)}}.dump();
                    rec.verdict = "accepted";
                    parts[k] = std::move(cells);
                    correction[k].clear();
                } catch (const ReplyError& e) {
                    rec.verdict = "parse-error";
                    rec.violations = {e.what()};
                    correction[k] = e.what();
                    last_error = "focus area " + std::to_string(k + 1) + ": " + e.what();
                    last_round_parse_failed = true;
                }
            }
            ctx_.area = nullptr;
            if (last_round_parse_failed) {
                continue;
            }

            std::vector<CellIndex> stitched{request_.start};
            for (const auto& part : parts) {
                stitched.insert(stitched.end(), part->begin(), part->end());
            }
            stitched.push_back(request_.goal);
            Verdict verdict = validate_candidate(map_, stitched, request_.threshold, request_.start, request_.goal);
            if (!best || closer_to_valid(verdict, *best)) {
                best = verdict;
            }
            if (verdict.valid) {
                out_.result = make_result(map_, "SCoTT", verdict.path, request_.threshold);
                return true;
            }
            std::vector<std::string> messages;
            for (const Violation& v : verdict.violations) {
                messages.push_back(v.message);
            }
            for (std::size_t i : round_records) {
                out_.transcript.records[i].verdict = "rejected";
                out_.transcript.records[i].violations = messages;
            }
            last_error = verdict.summary();
            for (std::size_t k = 0; k < n; ++k) {
                parts[k].reset();
                correction[k] = "the stitched path is invalid: " + last_error;
            }
        }

        if (best) {
            out_.best_candidate = best->path;
        }
        if (last_round_parse_failed) {
            fail(ScottStatus::kSubtaskFailure, 3,
                 "subtask 3 (refinement) failed after " + std::to_string(attempts()) + " attempts: " + last_error);
        } else {
            fail(ScottStatus::kValidationFailure, 0,
                 "no valid path after " + std::to_string(attempts()) + " attempts: " + last_error);
        }
        return false;
    }

    const GridMap& map_;
    const PlanRequest& request_;
    const ScottConfig& config_;
    ModelClient& client_;
    PromptContext ctx_;
    ScottOutcome out_;
    std::vector<std::uint8_t> png_;
    std::vector<CellIndex> coarse_;
    int current_stage_ = 0;
};

std::string fenced(const std::string& explanation, const json& body) {
    return explanation + "\n\n```json\n" + body.dump() + "\n```\n";
}

}  // namespace

ScottOutcome run_scott(const GridMap& map, const PlanRequest& request, const ScottConfig& config,
                       ModelClient& client) {
    validate_request(map, request);
    validate_config(config);
    return Pipeline(map, request, config, client).run();
}

json make_oracle_script(const GridMap& map, const PlanRequest& request, const ScottConfig& config) {
    validate_config(config);
    const PlanResult dp = plan_dpwa(map, request);
    if (!dp.found) {
        throw InputError("DP-WA* found no path meeting the threshold; cannot script an oracle reply");
    }
    const std::vector<CellIndex>& path = dp.waypoints;
    const std::vector<WorldPoint> world = centers_of(map, path);

    std::vector<WorldPoint> centers;
    for (std::size_t i : arc_length_samples(map, path, config.n_areas)) {
        centers.push_back(world[i]);
    }
    // Same ordering the pipeline applies, so per-area keys line up.
    std::vector<std::size_t> nearest;
    for (std::size_t i : order_along_path(centers, world)) {
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < world.size(); ++k) {
            const double d = std::hypot(world[k].x - centers[i].x, world[k].y - centers[i].y);
            if (d < best_d) {
                best_d = d;
                best = k;
            }
        }
        nearest.push_back(best);
    }

    json replies = json::object();
    replies["1"] = json::array({fenced(
        "The direct route crosses low-gain cells, so the path follows the strongest corridor that still "
        "reaches the goal with the required average gain.",
        json{{"waypoints", points_json(map, path)}})});

    json areas = json::array();
    for (const WorldPoint& c : centers) {
        areas.push_back({{"center", {c.x, c.y}}});
    }
    replies["2"] = json::array({fenced("Centers are spaced evenly along the coarse path from start to goal.",
                                       json{{"areas", areas}})});

    const std::size_t n = nearest.size();
    std::vector<std::size_t> bound(n + 1, 0);
    bound[n] = path.size();
    for (std::size_t k = 1; k < n; ++k) {
        bound[k] = std::max(bound[k - 1], (nearest[k - 1] + nearest[k] + 1) / 2);
    }
    for (std::size_t k = 0; k < n; ++k) {
        std::vector<CellIndex> seg(path.begin() + static_cast<std::ptrdiff_t>(bound[k]),
                                   path.begin() + static_cast<std::ptrdiff_t>(bound[k + 1]));
        if (seg.empty()) {
            seg.push_back(bound[k] == 0 ? path.front() : path[bound[k] - 1]);
        }
        replies["3/" + std::to_string(k)] = json::array({fenced(
            "Inside this area the path keeps to the highest-gain neighbors along the coarse route.",
            json{{"waypoints", points_json(map, seg)}})});
    }
    return json{{"replies", replies}};
}

}  // namespace wnav
