#include "wnav/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "wnav/classic.hpp"
#include "wnav/dpwa.hpp"
#include "wnav/error.hpp"
#include "wnav/validate.hpp"

namespace wnav {

using nlohmann::json;

namespace {

// Thicker strokes are drawn first so coincident paths stay visible.
struct AlgorithmInfo {
    const char* key;
    const char* display;
    Rgb color;
    int thickness;
};

constexpr AlgorithmInfo kAlgorithms[] = {
    {"astar", "A*", {150, 40, 200}, 6},
    {"nwa", "N-WA*", {40, 40, 40}, 5},
    {"dpwa", "DP-WA*", {0, 255, 255}, 4},
    {"scott", "SCoTT", {0, 120, 0}, 3},
    {"scott-dpwa", "SCoTT-DP-WA*", {255, 0, 255}, 1},
};

const AlgorithmInfo* find_algorithm(const std::string& name) {
    for (const AlgorithmInfo& a : kAlgorithms) {
        if (name == a.key || name == a.display) {
            return &a;
        }
    }
    return nullptr;
}

const AlgorithmInfo& require_algorithm(const std::string& name) {
    const AlgorithmInfo* a = find_algorithm(name);
    if (a == nullptr) {
        throw InputError("unknown algorithm \"" + name + "\"");
    }
    return *a;
}

int table_rank(const std::string& key) {
    for (std::size_t i = 0; i < std::size(kAlgorithms); ++i) {
        if (key == kAlgorithms[i].key) {
            return static_cast<int>(i);
        }
    }
    return static_cast<int>(std::size(kAlgorithms));
}

WorldPoint point_from_json(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw InputError(std::string(what) + " must be an [x, y] pair in meters");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

double mean(const std::vector<double>& v) {
    if (v.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double stddev(const std::vector<double>& v) {
    if (v.size() < 2) {
        return 0.0;
    }
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

std::string fixed2(double v) {
    if (std::isnan(v)) {
        return "";
    }
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << v;
    return os.str();
}

json number_or_null(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

}  // namespace

std::string algorithm_display_name(const std::string& key) { return require_algorithm(key).display; }

std::string algorithm_key(const std::string& name) { return require_algorithm(name).key; }

// Scenarios ------------------------------------------------------------------------

Scenario scenario_from_json(const json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) {
        throw InputError("scenario must be a JSON object");
    }
    Scenario s;
    try {
        s.name = j.at("name").get<std::string>();
        const json& m = j.at("map");
        if (m.contains("file") == m.contains("synthetic")) {
            throw InputError("scenario map needs exactly one of \"file\" or \"synthetic\"");
        }
        if (m.contains("file")) {
            std::filesystem::path p = m["file"].get<std::string>();
            s.map_file = p.is_relative() ? base_dir / p : p;
        } else {
            s.synthetic = synth_spec_from_json(m["synthetic"]);
        }
        s.start = point_from_json(j.at("start_m"), "start_m");
        s.goal = point_from_json(j.at("goal_m"), "goal_m");
        s.threshold = j.at("threshold").get<double>();
        s.epsilon = j.value("epsilon", s.epsilon);
        s.runs = j.value("runs", s.runs);
        if (j.contains("algorithms")) {
            for (const auto& a : j["algorithms"]) {
                s.algorithms.push_back(algorithm_key(a.get<std::string>()));
            }
        } else {
            s.algorithms.assign(std::begin(kAlgorithmKeys), std::end(kAlgorithmKeys));
        }
        if (j.contains("scott")) {
            s.scott = scott_config_from_json(j["scott"]);
        }
        if (j.contains("mock_script")) {
            std::filesystem::path p = j["mock_script"].get<std::string>();
            s.mock_script = p.is_relative() ? base_dir / p : p;
        }
        s.seed = j.value("seed", std::uint64_t{0});
    } catch (const json::exception& e) {
        throw InputError("scenario \"" + s.name + "\": " + e.what());
    }
    if (s.name.empty()) {
        throw InputError("scenario name must not be empty");
    }
    if (s.runs < 1) {
        throw InputError("scenario runs must be at least 1");
    }
    if (s.algorithms.empty()) {
        throw InputError("scenario selects no algorithms");
    }
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open scenario " + path.string());
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError("scenario " + path.string() + ": " + e.what(), 0, 0);
    }
    return scenario_from_json(j, path.parent_path());
}

json to_json(const Scenario& s) {
    json j{{"name", s.name},
           {"start_m", {s.start.x, s.start.y}},
           {"goal_m", {s.goal.x, s.goal.y}},
           {"threshold", s.threshold},
           {"epsilon", s.epsilon},
           {"runs", s.runs},
           {"algorithms", s.algorithms},
           {"scott", to_json(s.scott)},
           {"seed", s.seed}};
    if (s.map_file) {
        j["map"] = {{"file", s.map_file->string()}};
    } else if (s.synthetic) {
        j["map"] = {{"synthetic", synth_spec_to_json(*s.synthetic)}};
    }
    if (s.mock_script) {
        j["mock_script"] = s.mock_script->string();
    }
    return j;
}

GridMap load_scenario_map(const Scenario& s) {
    if (s.map_file) {
        return load_radio_map(*s.map_file);
    }
    if (s.synthetic) {
        return synthesize_map(*s.synthetic);
    }
    throw InputError("scenario \"" + s.name + "\" has no map");
}

PlanRequest scenario_request(const GridMap& map, const Scenario& s) {
    PlanRequest req;
    req.start = map.cell_of(s.start);
    req.goal = map.cell_of(s.goal);
    req.threshold = s.threshold;
    req.epsilon = s.epsilon;
    validate_request(map, req);
    return req;
}

// Running ---------------------------------------------------------------------------

MetricsRow aggregate(const std::string& algorithm, const std::vector<RunRecord>& records) {
    MetricsRow row;
    row.algorithm = algorithm;
    std::vector<double> gains, lengths, runtimes, expanded;
    for (const RunRecord& r : records) {
        if (r.algorithm != algorithm) {
            continue;
        }
        ++row.runs;
        row.successes += r.success ? 1 : 0;
        if (r.result) {
            runtimes.push_back(r.result->runtime_s);
            expanded.push_back(static_cast<double>(r.result->expanded_states));
            if (r.result->found) {
                gains.push_back(r.result->avg_gain);
                lengths.push_back(r.result->path_length_m);
            }
        } else {
            runtimes.push_back(0.0);
        }
    }
    row.avg_path_gain = mean(gains);
    row.path_length_m = mean(lengths);
    row.runtime_s = runtimes.empty() ? 0.0 : mean(runtimes);
    row.expanded_states = expanded.empty() ? 0.0 : mean(expanded);
    row.avg_path_gain_stddev = stddev(gains);
    row.path_length_stddev = stddev(lengths);
    row.expanded_states_stddev = stddev(expanded);
    row.success_rate_percent =
        row.runs == 0 ? 0.0 : 100.0 * static_cast<double>(row.successes) / static_cast<double>(row.runs);
    return row;
}

namespace {

class ScenarioRunner {
public:
    ScenarioRunner(const Scenario& s, const GridMap& map, FocusCache& cache)
        : s_(s), map_(map), cache_(cache), req_(scenario_request(map, s)) {
        report_.scenario = s;
        report_.map_hash = map_hash(map);
    }

    ScenarioReport run() {
        std::vector<std::string> algorithms = s_.algorithms;
        std::stable_sort(algorithms.begin(), algorithms.end(),
                         [](const std::string& a, const std::string& b) { return table_rank(a) < table_rank(b); });
        algorithms.erase(std::unique(algorithms.begin(), algorithms.end()), algorithms.end());

        for (const std::string& alg : algorithms) {
            for (int run = 0; run < s_.runs; ++run) {
                RunRecord rec;
                rec.algorithm = alg;
                rec.run = run;
                rec.seed = s_.seed + static_cast<std::uint64_t>(run);
                bool aborted = false;
                try {
                    rec.result = run_once(alg, run, rec);
                } catch (const InputError& e) {
                    rec.error = e.what();
                    aborted = true;
                }
                if (rec.result && rec.result->found) {
                    rec.success =
                        validate_candidate(map_, rec.result->waypoints, req_.threshold, req_.start, req_.goal).valid;
                }
                report_.records.push_back(std::move(rec));
                if (aborted) {
                    // The error is not run-specific; record the remaining runs as failures too.
                    for (int rest = run + 1; rest < s_.runs; ++rest) {
                        RunRecord fail = report_.records.back();
                        fail.run = rest;
                        fail.seed = s_.seed + static_cast<std::uint64_t>(rest);
                        report_.records.push_back(std::move(fail));
                    }
                    break;
                }
            }
            report_.rows.push_back(aggregate(alg, report_.records));
        }

        double reference = 0.0;
        for (const MetricsRow& r : report_.rows) {
            if (r.algorithm == "dpwa") {
                reference = r.expanded_states;
            }
        }
        for (MetricsRow& r : report_.rows) {
            if ((r.algorithm == "dpwa" || r.algorithm == "scott-dpwa") && reference > 0.0 && r.expanded_states > 0.0) {
                r.speedup_vs_reference = reference / r.expanded_states;
            }
        }
        return std::move(report_);
    }

private:
    MockClient make_client() {
        if (!script_) {
            if (s_.mock_script) {
                std::ifstream in(*s_.mock_script);
                if (!in) {
                    throw InputError("cannot open mock script " + s_.mock_script->string());
                }
                try {
                    script_ = json::parse(in);
                } catch (const json::parse_error& e) {
                    throw ParseError("mock script " + s_.mock_script->string() + ": " + e.what(), 0, 0);
                }
            } else {
                script_ = make_oracle_script(map_, req_, s_.scott);
            }
        }
        return MockClient::from_json(*script_);
    }

    ScottOutcome run_pipeline() {
        MockClient client = make_client();
        return run_scott(map_, req_, s_.scott, client);
    }

    MaskKey key() const { return MaskKey{report_.map_hash, req_.start, req_.goal, req_.threshold}; }

    std::optional<PlanResult> run_once(const std::string& alg, int run, RunRecord& rec) {
        if (alg == "astar") return plan_astar(map_, req_);
        if (alg == "nwa") return plan_nwa(map_, req_);
        if (alg == "dpwa") return plan_dpwa(map_, req_);
        if (alg == "scott") {
            ScottOutcome out = run_pipeline();
            if (run == 0) {
                report_.transcript = out.transcript;
                if (out.focus) {
                    cache_.put(key(), *out.focus);
                }
            }
            if (!out.ok()) {
                rec.error = std::string(to_string(out.status)) + ": " + out.message;
                return std::nullopt;
            }
            return out.result;
        }
        if (alg == "scott-dpwa") {
            if (!report_.focus) {
                report_.focus = cache_.get_or_build(map_, key(), [&] {
                    ScottOutcome out = run_pipeline();
                    if (!out.focus) {
                        throw InputError("SCoTT produced no focus areas: " + out.message);
                    }
                    return *out.focus;
                });
                report_.mask = mask_stats(map_, *report_.focus);
            }
            return plan_dpwa_masked(map_, req_, *report_.focus);
        }
        throw InputError("unknown algorithm \"" + alg + "\"");
    }

    const Scenario& s_;
    const GridMap& map_;
    FocusCache& cache_;
    PlanRequest req_;
    ScenarioReport report_;
    std::optional<json> script_;
};

}  // namespace

ScenarioReport run_scenario(const Scenario& scenario, const GridMap& map, FocusCache& cache) {
    return ScenarioRunner(scenario, map, cache).run();
}

ScenarioReport run_scenario(const Scenario& scenario) {
    const GridMap map = load_scenario_map(scenario);
    FocusCache cache;
    return run_scenario(scenario, map, cache);
}

json to_json(const RunRecord& r) {
    json j{{"algorithm", algorithm_display_name(r.algorithm)},
           {"run", r.run},
           {"seed", r.seed},
           {"success", r.success}};
    j["result"] = r.result ? to_json(*r.result) : json(nullptr);
    if (!r.error.empty()) {
        j["error"] = r.error;
    }
    return j;
}

json to_json(const MetricsRow& r) {
    return json{{"algorithm", algorithm_display_name(r.algorithm)},
                {"avg_path_gain", number_or_null(r.avg_path_gain)},
                {"path_length_m", number_or_null(r.path_length_m)},
                {"runtime_s", r.runtime_s},
                {"success_rate_percent", r.success_rate_percent},
                {"expanded_states", r.expanded_states},
                {"speedup_vs_reference",
                 r.speedup_vs_reference ? json(*r.speedup_vs_reference) : json(nullptr)},
                {"runs", r.runs},
                {"successes", r.successes},
                {"avg_path_gain_stddev", r.avg_path_gain_stddev},
                {"path_length_stddev", r.path_length_stddev},
                {"expanded_states_stddev", r.expanded_states_stddev}};
}

// Output -----------------------------------------------------------------------------

TableFormat parse_table_format(const std::string& name) {
    if (name == "csv") return TableFormat::kCsv;
    if (name == "md" || name == "markdown") return TableFormat::kMarkdown;
    if (name == "json") return TableFormat::kJson;
    throw InputError("unknown table format \"" + name + "\" (expected csv, md or json)");
}

const char* file_extension(TableFormat format) noexcept {
    switch (format) {
        case TableFormat::kCsv: return "csv";
        case TableFormat::kMarkdown: return "md";
        case TableFormat::kJson: return "json";
    }
    return "txt";
}

std::string emit_table(const std::vector<MetricsRow>& rows, TableFormat format) {
    static constexpr const char* kColumns[] = {"algorithm",       "avg_path_gain",       "path_length_m",
                                               "runtime_s",       "success_rate_percent", "expanded_states",
                                               "speedup_vs_reference"};
    if (format == TableFormat::kJson) {
        json a = json::array();
        for (const MetricsRow& r : rows) {
            a.push_back(to_json(r));
        }
        return a.dump(2) + "\n";
    }
    auto cells = [](const MetricsRow& r) {
        return std::vector<std::string>{
            algorithm_display_name(r.algorithm), fixed2(r.avg_path_gain),       fixed2(r.path_length_m),
            fixed2(r.runtime_s),                 fixed2(r.success_rate_percent), fixed2(r.expanded_states),
            r.speedup_vs_reference ? fixed2(*r.speedup_vs_reference) : std::string()};
    };
    std::ostringstream os;
    if (format == TableFormat::kCsv) {
        for (std::size_t i = 0; i < std::size(kColumns); ++i) {
            os << (i ? "," : "") << kColumns[i];
        }
        os << "\n";
        for (const MetricsRow& r : rows) {
            const auto c = cells(r);
            for (std::size_t i = 0; i < c.size(); ++i) {
                os << (i ? "," : "") << c[i];
            }
            os << "\n";
        }
        return os.str();
    }
    os << "|";
    for (const char* c : kColumns) os << " " << c << " |";
    os << "\n|";
    for (std::size_t i = 0; i < std::size(kColumns); ++i) os << (i ? " ---: |" : " --- |");
    os << "\n";
    for (const MetricsRow& r : rows) {
        os << "|";
        for (const std::string& c : cells(r)) os << " " << (c.empty() ? "-" : c) << " |";
        os << "\n";
    }
    return os.str();
}

Rgb algorithm_color(const std::string& algorithm) { return require_algorithm(algorithm).color; }

Raster render_figure(const GridMap& map, const std::vector<FigurePath>& paths, const RenderOptions& options) {
    std::vector<PathOverlay> overlays;
    for (const FigurePath& p : paths) {
        const AlgorithmInfo& a = require_algorithm(p.algorithm);
        overlays.push_back({p.waypoints, a.color, a.thickness, a.display});
    }
    std::stable_sort(overlays.begin(), overlays.end(),
                     [](const PathOverlay& a, const PathOverlay& b) { return a.thickness > b.thickness; });
    return render_heatmap(map, overlays, options);
}

void emit_figure(const GridMap& map, const std::vector<FigurePath>& paths, const std::filesystem::path& output,
                 const RenderOptions& options) {
    write_png(render_figure(map, paths, options), output);
}

std::vector<FigurePath> figure_paths(const ScenarioReport& report) {
    std::vector<FigurePath> out;
    for (const MetricsRow& row : report.rows) {
        for (const RunRecord& r : report.records) {
            if (r.algorithm == row.algorithm && r.result && r.result->found) {
                out.push_back({r.algorithm, r.result->waypoints});
                break;
            }
        }
    }
    return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw InputError("cannot write " + tmp.string());
        }
        out << content;
        if (!out) {
            throw InputError("write failed for " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

std::vector<std::filesystem::path> write_report(const ScenarioReport& report, const GridMap& map,
                                                const std::filesystem::path& out_dir,
                                                const std::vector<TableFormat>& formats) {
    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> written;
    const std::string& name = report.scenario.name;
    for (TableFormat f : formats) {
        const auto p = out_dir / (name + "_table." + file_extension(f));
        write_file_atomic(p, emit_table(report.rows, f));
        written.push_back(p);
    }

    json runs{{"scenario", to_json(report.scenario)}, {"map_hash", report.map_hash}, {"records", json::array()}};
    for (const RunRecord& r : report.records) {
        runs["records"].push_back(to_json(r));
    }
    if (report.mask) {
        runs["mask"] = {{"mask_cells", report.mask->mask_cells},
                        {"traversable_cells", report.mask->traversable_cells},
                        {"reduction_fraction", report.mask->reduction_fraction}};
    }
    const auto runs_path = out_dir / (name + "_runs.json");
    write_file_atomic(runs_path, runs.dump(2) + "\n");
    written.push_back(runs_path);

    const auto fig = out_dir / (name + "_figure.png");
    emit_figure(map, figure_paths(report), fig);
    written.push_back(fig);

    if (report.transcript) {
        const auto p = out_dir / (name + "_transcript.json");
        write_file_atomic(p, to_json(*report.transcript).dump(2) + "\n");
        written.push_back(p);
    }
    if (report.focus) {
        const auto p = out_dir / (name + "_mask.json");
        write_file_atomic(p, to_json(*report.focus).dump(2) + "\n");
        written.push_back(p);
    }
    return written;
}

}  // namespace wnav
