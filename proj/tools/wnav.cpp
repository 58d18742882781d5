// Command-line front end: plan, bench, render, gen-map, scott, mock-script.

#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "wnav/bench.hpp"
#include "wnav/classic.hpp"
#include "wnav/dpwa.hpp"
#include "wnav/error.hpp"
#include "wnav/raster.hpp"
#include "wnav/scott.hpp"

namespace {

using namespace wnav;
using nlohmann::json;

enum Exit { kOk = 0, kInfeasible = 1, kInputError = 2, kTransportError = 3 };

struct Globals {
    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";
    std::vector<std::string> formats{"csv", "md"};
};

// Where a map and request come from: a scenario file or explicit flags.
struct Source {
    std::string scenario;
    std::string map;
    std::vector<double> start;
    std::vector<double> goal;
    std::optional<double> threshold;
    std::optional<double> epsilon;

    void add_options(CLI::App* app) {
        app->add_option("--scenario", scenario, "Scenario JSON file");
        app->add_option("--map", map, "Radio-map JSON file");
        app->add_option("--start", start, "Start x y in meters")->expected(2);
        app->add_option("--goal", goal, "Goal x y in meters")->expected(2);
        app->add_option("--threshold,-G", threshold, "Average-gain threshold G");
        app->add_option("--epsilon", epsilon, "N-WA* inverse-gain offset");
    }
};

struct Loaded {
    Scenario scenario;
    std::optional<GridMap> map;
    PlanRequest request;
};

void apply_seed(Scenario& s, const Globals& g) {
    if (g.seed) {
        s.seed = *g.seed;
        if (s.synthetic) {
            s.synthetic->seed = *g.seed;
        }
    }
}

Loaded load(const Source& src, const Globals& g) {
    Loaded l;
    if (!src.scenario.empty()) {
        l.scenario = load_scenario(src.scenario);
        apply_seed(l.scenario, g);
        // Explicit flags override the scenario file.
        if (src.start.size() == 2) l.scenario.start = {src.start[0], src.start[1]};
        if (src.goal.size() == 2) l.scenario.goal = {src.goal[0], src.goal[1]};
        if (src.threshold) l.scenario.threshold = *src.threshold;
        if (src.epsilon) l.scenario.epsilon = *src.epsilon;
        l.map = load_scenario_map(l.scenario);
        l.request = scenario_request(*l.map, l.scenario);
        return l;
    }
    if (src.map.empty() || src.start.size() != 2 || src.goal.size() != 2) {
        throw InputError("give --scenario, or --map with --start X Y and --goal X Y");
    }
    l.scenario.name = std::filesystem::path(src.map).stem().string();
    l.scenario.map_file = src.map;
    l.scenario.start = {src.start[0], src.start[1]};
    l.scenario.goal = {src.goal[0], src.goal[1]};
    l.scenario.threshold = src.threshold.value_or(0.0);
    l.scenario.epsilon = src.epsilon.value_or(1e-6);
    l.map = load_radio_map(src.map);
    l.request = scenario_request(*l.map, l.scenario);
    return l;
}

void write_or_print(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    write_file_atomic(path, content);
}

int exit_for(const PlanResult& r) { return r.found && r.feasible ? kOk : kInfeasible; }

std::vector<TableFormat> formats_of(const Globals& g) {
    std::vector<TableFormat> out;
    for (const std::string& f : g.formats) {
        out.push_back(parse_table_format(f));
    }
    return out;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open " + path);
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": " + e.what(), 0, 0);
    }
}

std::unique_ptr<ModelClient> make_client(const std::string& mock_script, const std::string& client_config,
                                         const Loaded& l) {
    if (!mock_script.empty()) {
        return std::make_unique<MockClient>(MockClient::from_file(mock_script));
    }
    if (!client_config.empty()) {
        return std::make_unique<HttpChatClient>(HttpClientConfig::from_file(client_config));
    }
    if (l.scenario.mock_script) {
        return std::make_unique<MockClient>(MockClient::from_file(*l.scenario.mock_script));
    }
    HttpClientConfig env = HttpClientConfig::from_env();
    if (env.endpoint.empty()) {
        throw InputError("no model client: pass --mock-script, --client-config, or set WNAV_MODEL_ENDPOINT");
    }
    return std::make_unique<HttpChatClient>(env);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wireless-aware path planning on radio maps"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--seed", g.seed, "Override scenario and synthetic-map seeds");
    app.add_option("--out-dir", g.out_dir, "Directory for generated files");
    app.add_option("--format", g.formats, "Table formats: csv, md, json")->delimiter(',');

    // plan
    auto* plan = app.add_subcommand("plan", "Run one planner and print its result as JSON");
    Source plan_src;
    plan_src.add_options(plan);
    std::string algorithm = "dpwa";
    std::optional<int> horizon;
    bool no_prune = false;
    std::string plan_mock;
    plan->add_option("--algorithm,-a", algorithm, "astar, nwa, dpwa, scott or scott-dpwa");
    plan->add_option("--horizon,-T", horizon, "Fixed DP horizon (default: automatic)");
    plan->add_flag("--no-prune", no_prune, "Disable feasibility pruning");
    plan->add_option("--mock-script", plan_mock, "Mock script for the SCoTT algorithms");

    // bench
    auto* bench = app.add_subcommand("bench", "Run scenario files and write tables and figures");
    std::vector<std::string> scenario_files;
    std::optional<int> runs;
    int jobs = 1;
    bench->add_option("scenarios", scenario_files, "Scenario JSON files")->required()->check(CLI::ExistingFile);
    bench->add_option("--runs", runs, "Override the run count");
    bench->add_option("--jobs,-j", jobs, "Scenarios run in parallel")->check(CLI::PositiveNumber);

    // render
    auto* render = app.add_subcommand("render", "Render a map as a heatmap PNG");
    Source render_src;
    render_src.add_options(render);
    std::string render_out;
    std::vector<std::string> overlays;
    int ppc = 8;
    render->add_option("--out,-o", render_out, "Output PNG (default: <out-dir>/<name>.png)");
    render->add_option("--overlay", overlays, "Plan-result JSON files to draw");
    render->add_option("--pixels-per-cell", ppc)->check(CLI::Range(2, 64));

    // gen-map
    auto* gen = app.add_subcommand("gen-map", "Synthesize a radio map from a spec");
    std::string spec_file;
    std::string gen_out;
    gen->add_option("spec", spec_file, "Synthetic map spec JSON")->required()->check(CLI::ExistingFile);
    gen->add_option("--out,-o", gen_out, "Output file (default: stdout)");

    // scott
    auto* scott = app.add_subcommand("scott", "Run the SCoTT pipeline with a mock or live client");
    Source scott_src;
    scott_src.add_options(scott);
    std::string mock_script;
    std::string client_config;
    std::string transcript_out;
    bool oracle = false;
    scott->add_option("--mock-script", mock_script, "Scripted replies (MockClient)");
    scott->add_option("--client-config", client_config, "HTTP client config JSON");
    scott->add_flag("--oracle", oracle, "Use the DP-WA* oracle script");
    scott->add_option("--transcript", transcript_out, "Transcript JSON (default: <out-dir>/<name>_transcript.json)");

    // mock-script
    auto* mock = app.add_subcommand("mock-script", "Write the DP-WA* oracle mock script for a scenario");
    Source mock_src;
    mock_src.add_options(mock);
    std::string mock_out;
    mock->add_option("--out,-o", mock_out, "Output file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInputError;
    }

    try {
        if (plan->parsed()) {
            Loaded l = load(plan_src, g);
            const std::string key = algorithm_key(algorithm);
            PlanResult r;
            if (key == "astar") {
                r = plan_astar(*l.map, l.request);
            } else if (key == "nwa") {
                r = plan_nwa(*l.map, l.request);
            } else if (key == "dpwa") {
                r = plan_dpwa(*l.map, l.request, DpOptions{horizon, !no_prune});
            } else {
                std::unique_ptr<ModelClient> client;
                if (!plan_mock.empty()) {
                    client = std::make_unique<MockClient>(MockClient::from_file(plan_mock));
                } else {
                    client = std::make_unique<MockClient>(
                        MockClient::from_json(make_oracle_script(*l.map, l.request, l.scenario.scott)));
                }
                ScottOutcome out = run_scott(*l.map, l.request, l.scenario.scott, *client);
                if (out.status == ScottStatus::kTransportFailure) {
                    std::cerr << "error: " << out.message << "\n";
                    return kTransportError;
                }
                if (key == "scott") {
                    if (!out.ok()) {
                        std::cerr << "SCoTT failed: " << out.message << "\n";
                        return kInfeasible;
                    }
                    r = out.result;
                } else {
                    if (!out.focus) {
                        std::cerr << "SCoTT produced no focus areas: " << out.message << "\n";
                        return kInfeasible;
                    }
                    r = plan_dpwa_masked(*l.map, l.request, *out.focus, DpOptions{horizon, !no_prune});
                }
            }
            std::cout << to_json(r).dump(2) << "\n";
            return exit_for(r);
        }

        if (bench->parsed()) {
            const auto fmts = formats_of(g);
            std::vector<Scenario> scenarios;
            for (const std::string& f : scenario_files) {
                Scenario s = load_scenario(f);
                apply_seed(s, g);
                if (runs) {
                    s.runs = *runs;
                }
                scenarios.push_back(std::move(s));
            }
            FocusCache cache(std::filesystem::path(g.out_dir) / "mask-cache");
            auto one = [&](const Scenario& s) {
                const GridMap map = load_scenario_map(s);
                ScenarioReport rep = run_scenario(s, map, cache);
                write_report(rep, map, g.out_dir, fmts);
                return "## " + s.name + "\n\n" + emit_table(rep.rows, TableFormat::kMarkdown);
            };
            std::vector<std::string> tables(scenarios.size());
            for (std::size_t i = 0; i < scenarios.size(); i += static_cast<std::size_t>(jobs)) {
                std::vector<std::future<std::string>> batch;
                for (std::size_t k = i; k < std::min(scenarios.size(), i + static_cast<std::size_t>(jobs)); ++k) {
                    batch.push_back(std::async(std::launch::async, one, std::cref(scenarios[k])));
                }
                for (std::size_t k = 0; k < batch.size(); ++k) {
                    tables[i + k] = batch[k].get();
                }
            }
            for (const std::string& t : tables) {
                std::cout << t << "\n";
            }
            std::cout << "wrote results to " << g.out_dir << "\n";
            return kOk;
        }

        if (render->parsed()) {
            std::string name;
            std::optional<GridMap> map;
            if (!render_src.scenario.empty()) {
                Scenario s = load_scenario(render_src.scenario);
                apply_seed(s, g);
                name = s.name;
                map = load_scenario_map(s);
            } else if (!render_src.map.empty()) {
                name = std::filesystem::path(render_src.map).stem().string();
                map = load_radio_map(render_src.map);
            } else {
                throw InputError("render needs --scenario or --map");
            }
            std::vector<FigurePath> paths;
            for (const std::string& f : overlays) {
                const PlanResult r = plan_result_from_json(load_json_file(f));
                paths.push_back({r.algorithm, r.waypoints});
            }
            if (render_out.empty()) {
                std::filesystem::create_directories(g.out_dir);
                render_out = (std::filesystem::path(g.out_dir) / (name + ".png")).string();
            }
            RenderOptions opts;
            opts.pixels_per_cell = ppc;
            emit_figure(*map, paths, render_out, opts);
            std::cout << render_out << "\n";
            return kOk;
        }

        if (gen->parsed()) {
            SynthSpec spec = synth_spec_from_json(load_json_file(spec_file));
            if (g.seed) {
                spec.seed = *g.seed;
            }
            write_or_print(gen_out, export_radio_map_text(synthesize_map(spec), 2) + "\n");
            return kOk;
        }

        if (scott->parsed()) {
            Loaded l = load(scott_src, g);
            std::unique_ptr<ModelClient> client;
            if (oracle) {
                client = std::make_unique<MockClient>(
                    MockClient::from_json(make_oracle_script(*l.map, l.request, l.scenario.scott)));
            } else {
                client = make_client(mock_script, client_config, l);
            }
            ScottOutcome out = run_scott(*l.map, l.request, l.scenario.scott, *client);
            if (transcript_out.empty()) {
                std::filesystem::create_directories(g.out_dir);
                transcript_out = (std::filesystem::path(g.out_dir) / (l.scenario.name + "_transcript.json")).string();
            }
            write_file_atomic(transcript_out, to_json(out.transcript).dump(2) + "\n");
            std::cerr << "transcript: " << transcript_out << "\n";
            switch (out.status) {
                case ScottStatus::kSuccess:
                    std::cout << to_json(out.result).dump(2) << "\n";
                    return kOk;
                case ScottStatus::kTransportFailure:
                    std::cerr << "error: " << out.message << "\n";
                    return kTransportError;
                default:
                    std::cerr << "SCoTT failed: " << out.message << "\n";
                    return kInfeasible;
            }
        }

        if (mock->parsed()) {
            Loaded l = load(mock_src, g);
            write_or_print(mock_out, make_oracle_script(*l.map, l.request, l.scenario.scott).dump(2) + "\n");
            return kOk;
        }
    } catch (const TransportError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kTransportError;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    }
    return kOk;
}
