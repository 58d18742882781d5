#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <gtest/gtest.h>

#include <thread>

#include <nlohmann/json.hpp>

#include "wnav/dpwa.hpp"
#include "wnav/error.hpp"
#include "wnav/scott.hpp"

using namespace wnav;
using nlohmann::json;

namespace {

// 10 x 6 cells of 0.5 m. The top row is strong, the rest weak.
GridMap bright_ceiling() {
    std::vector<std::uint8_t> units(60, 2);
    for (int c = 0; c < 10; ++c) units[static_cast<std::size_t>(c)] = 10;
    std::vector<std::uint8_t> obs(60, 0);
    obs[3 * 10 + 5] = 1;  // (5,3)
    return GridMap(10, 6, 0.5, {0, 0}, units, obs);
}

const PlanRequest kRequest{{0, 5}, {9, 5}, 0.5};

ScottConfig small_config() {
    ScottConfig c;
    c.n_areas = 4;
    c.max_distance = 1.2;
    c.max_retries_per_subtask = 2;
    return c;
}

std::string fence(const json& j) { return "Reasoning first.\n```json\n" + j.dump() + "\n```\n"; }

std::string waypoints_reply(const GridMap& m, const std::vector<CellIndex>& cells) {
    json pts = json::array();
    for (const CellIndex& c : cells) {
        const WorldPoint p = m.center(c);
        pts.push_back({p.x, p.y});
    }
    return fence({{"waypoints", pts}});
}

MockClient oracle_mock(const GridMap& m, const ScottConfig& cfg) {
    return MockClient::from_json(make_oracle_script(m, kRequest, cfg));
}

}  // namespace

TEST(Prompts, StageOneStructure) {
    const GridMap m = bright_ceiling();
    PromptContext ctx;
    ctx.map = &m;
    ctx.request = kRequest;
    ctx.config = small_config();
    const RenderedPrompt p = render_subtask_prompt(1, ctx);
    EXPECT_TRUE(p.attach_image);
    EXPECT_EQ(p.image_ref, "heatmap.png");
    for (const char* needle : {"<Task>", "<Map>", "<Workflow>", "<Reasoning Strategy>", "<Output>",
                               "Subtask 1 of 3", "G = 0.50", "Forbidden zones", "white", "```json"}) {
        EXPECT_NE(p.text.find(needle), std::string::npos) << needle;
    }
    EXPECT_NE(p.text.find(kImageAttachmentMarker), std::string::npos);
    EXPECT_EQ(p.text.find("<Correction>"), std::string::npos);
    ctx.correction = "waypoint (2, 3) is inside an obstacle";
    EXPECT_NE(render_subtask_prompt(1, ctx).text.find("<Correction>"), std::string::npos);
}

TEST(Prompts, StageTwoMentionsCountAndRadius) {
    const GridMap m = bright_ceiling();
    PromptContext ctx;
    ctx.map = &m;
    ctx.request = kRequest;
    ctx.config = small_config();
    ctx.config.max_distance = 1.4;
    ctx.coarse_path = {m.center({0, 5}), m.center({9, 5})};
    const RenderedPrompt p = render_subtask_prompt(2, ctx);
    EXPECT_FALSE(p.attach_image);
    EXPECT_NE(p.text.find("N = 4"), std::string::npos);
    EXPECT_NE(p.text.find("max_distance = 1.40 m"), std::string::npos);
    EXPECT_NE(p.text.find("Subtask 2 of 3"), std::string::npos);
}

TEST(Prompts, StageThreePayloadIsTheAreaSlice) {
    const GridMap m = bright_ceiling();
    const FocusArea area = make_focus_area(m, m.center({5, 2}), 1.1);
    PromptContext ctx;
    ctx.map = &m;
    ctx.request = kRequest;
    ctx.config = small_config();
    ctx.area = &area;
    ctx.area_index = 2;
    ctx.area_count = 4;
    const RenderedPrompt p = render_subtask_prompt(3, ctx);
    EXPECT_EQ(p.data_ref, "area-2.json");
    ASSERT_EQ(p.payload.size(), area.members.size());
    for (std::size_t i = 0; i < p.payload.size(); ++i) {
        EXPECT_EQ(p.payload[i].cell, area.members[i]);
        EXPECT_DOUBLE_EQ(p.payload[i].gain, m.gain(area.members[i]));
    }
    const auto block = last_fenced_block(p.text, "data");
    ASSERT_TRUE(block);
    const json data = json::parse(*block);
    EXPECT_EQ(data["area"], 2);
    EXPECT_EQ(data["cells"].size(), area.members.size());
    // The obstacle never appears in the data.
    const WorldPoint wall = m.center({5, 3});
    for (const auto& c : data["cells"]) {
        EXPECT_FALSE(std::abs(c[0].get<double>() - wall.x) < 1e-9 && std::abs(c[1].get<double>() - wall.y) < 1e-9);
    }
    EXPECT_NE(p.text.find("Refine focus area 3 of 4"), std::string::npos);
    EXPECT_THROW(render_subtask_prompt(4, ctx), InputError);
}

TEST(Parsing, LastFencedBlockWins) {
    const std::string text = "a\n```json\n[1]\n```\nb\n```\n[2]\n```\n```python\nx\n```\n";
    EXPECT_EQ(last_fenced_block(text), "[2]\n");
    EXPECT_EQ(last_fenced_block(text, "python"), "x\n");
    EXPECT_EQ(last_fenced_block(text, ""), "x\n");
    EXPECT_FALSE(last_fenced_block("no fences here"));
}

TEST(Parsing, SnapWithinHalfDiagonal) {
    const GridMap m = bright_ceiling();
    const WorldPoint c = m.center({2, 2});
    EXPECT_EQ(snap_to_traversable(m, {c.x + 0.4 * 0.5, c.y}), (CellIndex{2, 2}));
    EXPECT_EQ(snap_to_traversable(m, {c.x + 0.2 * 0.5, c.y - 0.3 * 0.5}), (CellIndex{2, 2}));
    // Obstacle center: every traversable neighbor is a full cell away.
    EXPECT_FALSE(snap_to_traversable(m, m.center({5, 3})));
    EXPECT_FALSE(snap_to_traversable(m, {-3.0, 1.0}));
}

TEST(Parsing, WaypointReplyErrors) {
    const GridMap m = bright_ceiling();
    EXPECT_THROW(parse_waypoint_reply(m, "I think we should go left."), ReplyError);
    EXPECT_THROW(parse_waypoint_reply(m, fence({{"path", json::array()}})), ReplyError);
    EXPECT_THROW(parse_waypoint_reply(m, fence({{"waypoints", json::array()}})), ReplyError);
    EXPECT_THROW(parse_waypoint_reply(m, "```json\n{\"waypoints\": [[0.25, \n```"), ReplyError);
    try {
        parse_waypoint_reply(m, waypoints_reply(m, {{4, 3}, {5, 3}}));
        FAIL();
    } catch (const ReplyError& e) {
        EXPECT_NE(std::string(e.what()).find("half a cell diagonal"), std::string::npos);
    }
    const auto ok = parse_waypoint_reply(m, fence(json::array({json::array({0.25, 2.75}), json::array({0.75, 2.75})})));
    EXPECT_EQ(ok, (std::vector<CellIndex>{{0, 5}, {1, 5}}));
}

TEST(Parsing, AreaCentersAndOrdering) {
    const GridMap m = bright_ceiling();
    const json reply = {{"areas", {{{"center", {4.0, 0.5}}}, {{"center", {0.5, 0.5}}}}}};
    const auto centers = parse_area_centers(m, fence(reply), 6);
    ASSERT_EQ(centers.size(), 2u);
    EXPECT_THROW(parse_area_centers(m, fence(reply), 1), ReplyError);
    EXPECT_THROW(parse_area_centers(m, fence({{"centers", {{40.0, 0.5}}}}), 6), ReplyError);
    const std::vector<WorldPoint> path{{0.25, 0.25}, {2.0, 0.25}, {4.75, 0.25}};
    EXPECT_EQ(order_along_path(centers, path), (std::vector<std::size_t>{1, 0}));
}

TEST(Config, JsonRoundTripAndValidation) {
    ScottConfig c = small_config();
    c.model_endpoint = "http://localhost:9/v1/chat/completions";
    const ScottConfig back = scott_config_from_json(to_json(c));
    EXPECT_EQ(back.n_areas, c.n_areas);
    EXPECT_EQ(back.max_distance, c.max_distance);
    EXPECT_EQ(back.model_endpoint, c.model_endpoint);
    c.n_areas = 0;
    EXPECT_THROW(validate_config(c), InputError);
    c = small_config();
    c.max_distance = -1;
    EXPECT_THROW(validate_config(c), InputError);
}

TEST(Mock, RepeatsLastReplyAndMissingKeyIsTransport) {
    MockClient mock = MockClient::from_json(json{{"replies", {{"1", {"a", "b"}}, {"2", "only"}}}});
    ModelRequest r;
    r.stage = 1;
    r.attempt = 0;
    EXPECT_EQ(mock.complete(r), "a");
    r.attempt = 5;
    EXPECT_EQ(mock.complete(r), "b");
    r.stage = 2;
    EXPECT_EQ(mock.complete(r), "only");
    r.stage = 3;
    r.area = 0;
    EXPECT_THROW(mock.complete(r), TransportError);
    EXPECT_EQ(mock.calls(), 4u);
}

TEST(Pipeline, OracleScriptReproducesDpPath) {
    const GridMap m = bright_ceiling();
    const ScottConfig cfg = small_config();
    MockClient mock = oracle_mock(m, cfg);
    const ScottOutcome out = run_scott(m, kRequest, cfg, mock);
    ASSERT_TRUE(out.ok()) << out.message;
    const Verdict v = validate_candidate(m, out.result.waypoints, kRequest.threshold, kRequest.start, kRequest.goal);
    EXPECT_TRUE(v.valid) << v.summary();
    EXPECT_EQ(out.result.algorithm, "SCoTT");
    const PlanResult dp = plan_dpwa(m, kRequest);
    EXPECT_NEAR(out.result.path_length_m, dp.path_length_m, 1e-9);
    ASSERT_TRUE(out.focus);
    EXPECT_EQ(out.focus->source(), FocusSource::kModelProposed);
    EXPECT_EQ(out.transcript.status, ScottStatus::kSuccess);
    EXPECT_EQ(out.transcript.records.front().image_ref, "heatmap.png");
}

TEST(Pipeline, ObstacleWaypointIsRetried) {
    const GridMap m = bright_ceiling();
    const ScottConfig cfg = small_config();
    json script = make_oracle_script(m, kRequest, cfg);
    const std::string good = script["replies"]["1"][0];
    script["replies"]["1"] = {waypoints_reply(m, {{0, 5}, {5, 3}, {9, 5}}), good};
    MockClient mock = MockClient::from_json(script);
    const ScottOutcome out = run_scott(m, kRequest, cfg, mock);
    ASSERT_TRUE(out.ok()) << out.message;
    const auto& recs = out.transcript.records;
    ASSERT_GE(recs.size(), 2u);
    EXPECT_EQ(recs[0].stage, 1);
    EXPECT_EQ(recs[0].verdict, "parse-error");
    EXPECT_EQ(recs[1].stage, 1);
    EXPECT_EQ(recs[1].attempt, 1);
    EXPECT_EQ(recs[1].verdict, "accepted");
    EXPECT_NE(recs[1].prompt.find("<Correction>"), std::string::npos);
    EXPECT_NE(recs[1].prompt.find("(2.750, 1.750)"), std::string::npos);
}

TEST(Pipeline, MalformedRepliesExhaustRetries) {
    const GridMap m = bright_ceiling();
    ScottConfig cfg = small_config();
    cfg.max_retries_per_subtask = 1;
    MockClient mock(std::map<std::string, std::vector<std::string>>{{"1", {"not json", "still not json"}}});
    const ScottOutcome out = run_scott(m, kRequest, cfg, mock);
    EXPECT_EQ(out.status, ScottStatus::kSubtaskFailure);
    EXPECT_EQ(out.failed_stage, 1);
    EXPECT_EQ(out.transcript.records.size(), 2u);
    EXPECT_EQ(mock.calls(), 2u);
    EXPECT_NE(out.message.find("after 2 attempts"), std::string::npos);
    EXPECT_NE(out.message.find("no JSON block"), std::string::npos);
}

TEST(Pipeline, UnusableAreasFallBackToArcLength) {
    const GridMap m = bright_ceiling();
    const ScottConfig cfg = small_config();
    json script = make_oracle_script(m, kRequest, cfg);
    script["replies"]["2"] = {"no areas today"};
    MockClient mock = MockClient::from_json(script);
    const ScottOutcome out = run_scott(m, kRequest, cfg, mock);
    ASSERT_TRUE(out.ok()) << out.message;
    ASSERT_TRUE(out.focus);
    EXPECT_EQ(out.focus->source(), FocusSource::kAutoGenerated);
    bool noted = false;
    for (const auto& n : out.transcript.notes) noted = noted || n.find("fell back") != std::string::npos;
    EXPECT_TRUE(noted);
    int stage2 = 0;
    for (const auto& r : out.transcript.records) stage2 += r.stage == 2;
    EXPECT_EQ(stage2, cfg.max_retries_per_subtask + 1);
}

TEST(Pipeline, LowGainRefinementIsAValidationFailure) {
    const GridMap m = bright_ceiling();
    const ScottConfig cfg = small_config();
    json script = make_oracle_script(m, kRequest, cfg);
    // Every area answers with the straight bottom row, which never meets G.
    json replies = script["replies"];
    for (auto it = replies.begin(); it != replies.end(); ++it) {
        if (it.key().starts_with("3/")) {
            *it = json::array({waypoints_reply(m, {{0, 5}, {3, 5}, {6, 5}, {9, 5}})});
        }
    }
    script["replies"] = replies;
    MockClient mock = MockClient::from_json(script);
    const ScottOutcome out = run_scott(m, kRequest, cfg, mock);
    EXPECT_EQ(out.status, ScottStatus::kValidationFailure);
    EXPECT_FALSE(out.best_candidate.empty());
    EXPECT_NE(out.message.find("average gain"), std::string::npos);
    int rejected = 0;
    for (const auto& r : out.transcript.records) rejected += r.verdict == "rejected";
    EXPECT_EQ(rejected, static_cast<int>(out.focus->areas().size()) * (cfg.max_retries_per_subtask + 1));
}

TEST(Pipeline, MissingScriptKeyIsTransportFailure) {
    const GridMap m = bright_ceiling();
    json script = make_oracle_script(m, kRequest, small_config());
    script["replies"].erase("2");
    MockClient mock = MockClient::from_json(script);
    const ScottOutcome out = run_scott(m, kRequest, small_config(), mock);
    EXPECT_EQ(out.status, ScottStatus::kTransportFailure);
    EXPECT_EQ(out.failed_stage, 2);
    EXPECT_EQ(out.transcript.records.back().verdict, "transport-error");
}

TEST(Pipeline, DeterministicTranscripts) {
    const GridMap m = bright_ceiling();
    const ScottConfig cfg = small_config();
    json script = make_oracle_script(m, kRequest, cfg);
    script["replies"]["1"] = {"garbage", script["replies"]["1"][0]};
    MockClient a = MockClient::from_json(script);
    MockClient b = MockClient::from_json(script);
    const json ta = to_json(run_scott(m, kRequest, cfg, a).transcript, false);
    const json tb = to_json(run_scott(m, kRequest, cfg, b).transcript, false);
    EXPECT_EQ(ta, tb);
    EXPECT_EQ(ta["status"], "success");
}

TEST(Pipeline, OracleScriptNeedsFeasibleRequest) {
    const GridMap m = bright_ceiling();
    EXPECT_THROW(make_oracle_script(m, {{0, 5}, {9, 5}, 0.99}, small_config()), InputError);
}

TEST(HttpClient, RequestBodyCarriesImageAndText) {
    HttpClientConfig cfg;
    cfg.endpoint = "http://127.0.0.1:1/v1/chat/completions";
    cfg.model = "test-model";
    const HttpChatClient client(cfg);
    ModelRequest r;
    r.text = "hello";
    r.image_png = {1, 2, 3};
    const json body = client.request_body(r);
    EXPECT_EQ(body["model"], "test-model");
    const json content = body["messages"][0]["content"];
    std::string url;
    std::string text;
    for (const auto& part : content) {
        if (part["type"] == "image_url") url = part["image_url"]["url"];
        if (part["type"] == "text") text = part["text"];
    }
    EXPECT_EQ(text, "hello");
    EXPECT_EQ(url, "data:image/png;base64," + base64_encode({1, 2, 3}));
    EXPECT_EQ(base64_encode({'M', 'a', 'n'}), "TWFu");
    EXPECT_EQ(base64_encode({'M'}), "TQ==");
}

TEST(HttpClient, TalksToLocalServer) {
    httplib::Server server;
    std::string seen_auth;
    json seen_body;
    server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        seen_auth = req.get_header_value("Authorization");
        seen_body = json::parse(req.body);
        res.set_content(json{{"choices", {{{"message", {{"content", "```json\n[[0.25, 2.75]]\n```"}}}}}}}.dump(),
                        "application/json");
    });
    server.Post("/broken", [](const httplib::Request&, httplib::Response& res) { res.status = 500; });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread worker([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    HttpClientConfig cfg;
    cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
    cfg.model = "m";
    cfg.api_key = "secret";
    cfg.timeout = std::chrono::seconds(5);
    HttpChatClient client(cfg);
    ModelRequest r;
    r.text = "plan";
    EXPECT_EQ(client.complete(r), "```json\n[[0.25, 2.75]]\n```");
    EXPECT_EQ(seen_auth, "Bearer secret");
    EXPECT_EQ(seen_body["model"], "m");

    cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/broken";
    HttpChatClient broken(cfg);
    EXPECT_THROW(broken.complete(r), TransportError);

    server.stop();
    worker.join();

    cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
    cfg.timeout = std::chrono::seconds(1);
    HttpChatClient gone(cfg);
    EXPECT_THROW(gone.complete(r), TransportError);
}
