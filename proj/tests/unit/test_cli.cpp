#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "pmdata/commands.hpp"
#include "pmdata/config.hpp"
#include "pmdata/csv.hpp"
#include "pmdata/errors.hpp"
#include "support/builders.hpp"

namespace pmdata::cli {
namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "pmdata");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::filesystem::path write_config(const test::TempDir& dir, const nlohmann::json& j) {
    const auto path = dir / "config.json";
    std::ofstream(path) << j.dump(2);
    return path;
}

nlohmann::json small_sim(int n = 30) {
    return {{"storage", "store.db"},
            {"source", "simulator"},
            {"simulator", {{"seed", 7}, {"n_markets", n}, {"horizon_days", 5}, {"withheld_fraction", 0.2}}},
            {"output_dir", "out"}};
}

TEST(Config, ParsesKeysAndResolvesPaths) {
    const auto c = config_from_json(
        {{"storage", "db/x.db"},
         {"source", "fixtures"},
         {"fixtures_dir", "fx"},
         {"confirmation_depth", 4},
         {"toggles", {{"retry", false}, {"bridge_paths", {"direct"}}}},
         {"backfill", {{"window", 100}, {"step", 50}}}},
        "/base");
    EXPECT_EQ(c.source, SourceKind::fixtures);
    EXPECT_EQ(c.storage, "/base/db/x.db");
    EXPECT_EQ(c.fixtures_dir, std::filesystem::path("/base/fx"));
    EXPECT_EQ(c.engine.confirmation_depth, 4u);
    EXPECT_FALSE(c.engine.retry);
    EXPECT_TRUE(c.engine.bridge_paths.direct);
    EXPECT_FALSE(c.engine.bridge_paths.adapter);
    EXPECT_EQ(c.backfill_window, 100u);
    EXPECT_EQ(c.cycle_interval_seconds, 30.0);
}

TEST(Config, RejectsUnknownAndInvalid) {
    EXPECT_THROW(config_from_json({{"storge", "x"}}), InvalidConfig);
    EXPECT_THROW(config_from_json({{"source", "carrier-pigeon"}}), InvalidConfig);
    EXPECT_THROW(config_from_json({{"simulator", {{"n_markets", "many"}}}}), InvalidConfig);
    EXPECT_THROW(config_from_json({{"source", "fixtures"}}).validate(), InvalidConfig);
    EXPECT_THROW(load_config("/nonexistent/config.json"), InvalidConfig);
}

TEST(Config, RoundTripsThroughJson) {
    auto c = config_from_json(small_sim(), "/base");
    EXPECT_EQ(to_json(config_from_json(to_json(c))), to_json(c));
}

TEST(Config, Toggles) {
    EngineConfig c;
    apply_toggle(c, "onchain_recovery=off");
    apply_toggle(c, "bridge_negrisk=off");
    apply_toggle(c, "timestamp_cache=off");
    EXPECT_FALSE(c.engine.onchain_recovery);
    EXPECT_FALSE(c.engine.bridge_paths.negrisk);
    EXPECT_FALSE(c.engine.timestamp_cache);
    apply_toggle(c, "onchain_recovery=on");
    EXPECT_TRUE(c.engine.onchain_recovery);
    EXPECT_THROW(apply_toggle(c, "warp=on"), InvalidConfig);
    EXPECT_THROW(apply_toggle(c, "retry=maybe"), InvalidConfig);
    EXPECT_THROW(apply_toggle(c, "retry"), InvalidConfig);
}

TEST(Csv, NumberFormatting) {
    EXPECT_EQ(fmt(0.1), "0.1");
    EXPECT_EQ(fmt(2.0), "2");
    EXPECT_EQ(fmt(std::optional<double>{}), "");
}

TEST(Cli, ParseAnalysis) {
    EXPECT_EQ(parse_analysis("fees"), Analysis::fees);
    EXPECT_EQ(parse_analysis("cpi"), Analysis::cpi);
    EXPECT_FALSE(parse_analysis("weather"));
}

TEST(Cli, SimulateIsDeterministic) {
    test::TempDir dir;
    const auto cfg = write_config(dir, small_sim());
    const auto a = invoke({"--config", cfg.string(), "simulate", "--out", (dir / "a").string()});
    const auto b = invoke({"simulate", "--config", cfg.string(), "--out", (dir / "b").string()});
    ASSERT_EQ(a.code, kExitOk) << a.err;
    ASSERT_EQ(b.code, kExitOk) << b.err;
    EXPECT_EQ(a.out, b.out);
    std::size_t files = 0;
    for (const auto& entry : std::filesystem::directory_iterator(dir / "a")) {
        ++files;
        EXPECT_EQ(slurp(entry.path()), slurp(dir / "b" / entry.path().filename())) << entry.path();
    }
    EXPECT_GT(files, 0u);
    const auto other = invoke({"--config", cfg.string(), "--seed", "8", "simulate", "--out", (dir / "c").string()});
    EXPECT_NE(other.out, a.out);
}

TEST(Cli, SimulateEmptyUniverse) {
    test::TempDir dir;
    const auto cfg = write_config(dir, small_sim(0));
    const auto r = invoke({"--config", cfg.string(), "simulate"});
    EXPECT_EQ(r.code, kExitOk) << r.err;
    EXPECT_EQ(nlohmann::json::parse(r.out).at("fills"), 0);
}

TEST(Cli, DisputeShareTracksRate) {
    EngineConfig c;
    c.simulator.n_markets = 1000;
    c.simulator.dispute_rate = 0.5;
    c.simulator.horizon_days = 10;
    test::TempDir dir;
    const auto stats = cmd_simulate(c, dir.path());
    EXPECT_GE(stats.disputed_markets, 450u);
    EXPECT_LE(stats.disputed_markets, 550u);
}

TEST(Cli, BackfillIsIdempotent) {
    test::TempDir dir;
    const auto config = config_from_json(small_sim(), dir.path());
    std::size_t first = 0, second = 0;
    for (const auto& r : cmd_backfill(config, std::nullopt, std::nullopt)) first += r.fills.inserted;
    for (const auto& r : cmd_backfill(config, std::nullopt, std::nullopt)) {
        second += r.fills.inserted + r.markets.inserted + r.oracle.inserted;
    }
    EXPECT_GT(first, 0u);
    EXPECT_EQ(second, 0u);
}

TEST(Cli, SyncRunsRequestedCycles) {
    test::TempDir dir;
    auto j = small_sim();
    j["head_step_blocks"] = 20000;
    j["cycle_interval_seconds"] = 0;
    const auto cfg = write_config(dir, j);
    const auto r = invoke({"--config", cfg.string(), "sync", "--cycles", "3"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    std::istringstream lines(r.out);
    std::string line;
    std::vector<std::uint64_t> cycles;
    while (std::getline(lines, line)) cycles.push_back(nlohmann::json::parse(line).at("cycle"));
    EXPECT_EQ(cycles, (std::vector<std::uint64_t>{1, 2, 3}));
}

TEST(Cli, QualityAndAnalyzeWriteFiles) {
    test::TempDir dir;
    const auto cfg = write_config(dir, small_sim());
    ASSERT_EQ(invoke({"--config", cfg.string(), "backfill"}).code, kExitOk);
    const auto q = invoke({"--config", cfg.string(), "quality"});
    ASSERT_EQ(q.code, kExitOk) << q.err;
    EXPECT_NE(q.out.find("Linked fill-level trades"), std::string::npos);
    EXPECT_NE(q.out.find("100.00%"), std::string::npos);
    EXPECT_TRUE(std::filesystem::exists(dir / "out" / "quality.csv"));
    EXPECT_TRUE(std::filesystem::exists(dir / "out" / "quality.json"));
    for (const char* name : {"activity", "fees", "oracle", "nba", "cpi"}) {
        const auto r = invoke({"--config", cfg.string(), "analyze", name});
        ASSERT_EQ(r.code, kExitOk) << name << ": " << r.err;
        std::istringstream files(r.out);
        std::string path;
        while (std::getline(files, path)) EXPECT_TRUE(std::filesystem::exists(path)) << path;
    }
}

TEST(Cli, AnalyzeIsReproducible) {
    test::TempDir dir;
    const auto cfg = write_config(dir, small_sim());
    ASSERT_EQ(invoke({"--config", cfg.string(), "backfill"}).code, kExitOk);
    ASSERT_EQ(invoke({"--config", cfg.string(), "analyze", "oracle", "--out", (dir / "a").string()}).code, kExitOk);
    ASSERT_EQ(invoke({"--config", cfg.string(), "analyze", "oracle", "--out", (dir / "b").string()}).code, kExitOk);
    EXPECT_EQ(slurp(dir / "a" / "oracle_anchors.csv"), slurp(dir / "b" / "oracle_anchors.csv"));
}

TEST(Cli, ExitCodes) {
    test::TempDir dir;
    EXPECT_EQ(invoke({}).code, kExitConfig);
    EXPECT_EQ(invoke({"frobnicate"}).code, kExitConfig);
    EXPECT_EQ(invoke({"--config", (dir / "missing.json").string(), "quality"}).code, kExitConfig);
    EXPECT_EQ(invoke({"--toggle", "warp=on", "quality"}).code, kExitConfig);

    auto fx = small_sim();
    fx["source"] = "fixtures";
    fx["fixtures_dir"] = "nowhere";
    EXPECT_EQ(invoke({"--config", write_config(dir, fx).string(), "backfill"}).code, kExitSource);

    auto bad_store = small_sim();
    bad_store["storage"] = "/nonexistent-dir/pmdata/store.db";
    EXPECT_EQ(invoke({"--config", write_config(dir, bad_store).string(), "quality"}).code, kExitStorage);

    const auto cfg = write_config(dir, small_sim());
    EXPECT_EQ(invoke({"--config", cfg.string(), "analyze", "astrology"}).code, kExitConfig);
}

TEST(Cli, StopFlag) {
    clear_stop();
    EXPECT_FALSE(stop_requested());
    request_stop();
    EXPECT_TRUE(stop_requested());
    clear_stop();
}

}  // namespace
}  // namespace pmdata::cli
