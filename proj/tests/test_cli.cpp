#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kScenarios = fs::path(WNAV_SOURCE_DIR) / "scenarios";

struct CliRun {
    int code;
    std::string out;
};

CliRun cli(const std::string& args) {
    const fs::path out = fs::temp_directory_path() / ("wnav_cli_stdout_" + std::to_string(::getpid()) + ".txt");
    const std::string cmd = std::string("\"") + WNAV_CLI + "\" " + args + " > \"" + out.string() + "\" 2>/dev/null";
    const int status = std::system(cmd.c_str());
    std::ifstream in(out);
    std::stringstream ss;
    ss << in.rdbuf();
    fs::remove(out);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / (name + "_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

}  // namespace

TEST(Cli, PlanPrintsResultJson) {
    const CliRun r = cli("plan --scenario " + (kScenarios / "path2_wall_to_wall.json").string() + " -a dpwa");
    ASSERT_EQ(r.code, 0) << r.out;
    const json j = json::parse(r.out);
    EXPECT_EQ(j["algorithm"], "DP-WA*");
    EXPECT_TRUE(j["feasible"].get<bool>());
    EXPECT_GE(j["avg_gain"].get<double>(), 0.4 - 1e-9);
}

TEST(Cli, InfeasibleThresholdExitsOne) {
    const CliRun r = cli("plan --scenario " + (kScenarios / "path2_wall_to_wall.json").string() + " -a dpwa -G 0.99");
    EXPECT_EQ(r.code, 1);
}

TEST(Cli, BadInputExitsTwo) {
    EXPECT_EQ(cli("plan --scenario /nonexistent/scenario.json").code, 2);
    EXPECT_EQ(cli("plan --frobnicate").code, 2);
    EXPECT_EQ(cli("plan --scenario " + (kScenarios / "path1_across_the_room.json").string() + " -a bfs").code, 2);
}

TEST(Cli, MissingMockReplyExitsThree) {
    const fs::path d = scratch("wnav_cli_mock");
    std::ofstream(d / "script.json") << R"({"replies": {"1": ["```json\n[[0, 0]]\n```"]}})";
    const CliRun r = cli("plan --scenario " + (kScenarios / "path2_wall_to_wall.json").string() +
                      " -a scott --mock-script " + (d / "script.json").string());
    EXPECT_EQ(r.code, 3);
    fs::remove_all(d);
}

TEST(Cli, GenMapRenderAndMockScript) {
    const fs::path d = scratch("wnav_cli_files");
    ASSERT_EQ(cli("gen-map " + (kScenarios / "room_spec.json").string() + " -o " + (d / "room.json").string()).code, 0);
    ASSERT_TRUE(fs::exists(d / "room.json"));
    const CliRun png = cli("render --map " + (d / "room.json").string() + " -o " + (d / "room.png").string());
    EXPECT_EQ(png.code, 0);
    EXPECT_TRUE(fs::exists(d / "room.png"));
    const CliRun ms = cli("mock-script --scenario " + (kScenarios / "path3_extreme_case.json").string() + " -o " +
                       (d / "mock.json").string());
    EXPECT_EQ(ms.code, 0);
    std::ifstream in(d / "mock.json");
    const json script = json::parse(in);
    EXPECT_TRUE(script["replies"].contains("1"));
    fs::remove_all(d);
}

TEST(Cli, BenchWritesTables) {
    const fs::path d = scratch("wnav_cli_bench");
    const CliRun r = cli("--out-dir " + d.string() + " --format csv,md,json bench --runs 1 " +
                      (kScenarios / "path2_wall_to_wall.json").string());
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("| DP-WA* |"), std::string::npos);
    for (const char* f : {"path2_wall_to_wall_table.csv", "path2_wall_to_wall_table.md",
                          "path2_wall_to_wall_table.json", "path2_wall_to_wall_figure.png"}) {
        EXPECT_TRUE(fs::exists(d / f)) << f;
    }
    fs::remove_all(d);
}
