#include <catch_amalgamated.hpp>

#include <fstream>
#include <sstream>

#include "support.hpp"

using namespace wavescope;
using namespace wavescope::testing;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

nlohmann::json btc_only(const fs::path& root)
{
    return {{"output_dir", (root / "out").string()},
            {"cache_dir", (root / "cache").string()},
            {"window", {{"from", "2021-01-01"}, {"to", "2021-12-31"}}},
            {"endpoint", "mock://histoday"},
            {"wavelets", {"morl"}},
            {"instruments", {{{"source", "cryptocompare"}, {"base", "BTC"}, {"quote", "USD"}}}}};
}

std::map<std::string, std::string> snapshot(const fs::path& dir)
{
    std::map<std::string, std::string> files;
    for (const auto& e : fs::directory_iterator(dir))
        files[e.path().filename().string()] = slurp(e.path());
    return files;
}

} // namespace

TEST_CASE("single instrument run")
{
    const auto root = scratch_dir("pipe1");
    MockHistoryServer server;
    server.by_symbol["BTC"] = random_walk_closes(every_day(Date(2020, 12, 1), Date(2022, 1, 31)), 11, 29000.0, 0.04);
    const auto cfg = parse_pipeline_config(btc_only(root));
    const auto result = run_pipeline(cfg, server, no_sleep_retry());

    CHECK(result.failures.empty());
    for (const char* name : {"BTC-USD_morl_power.png", "BTC-USD_morl_power.csv", "BTC-USD_morl_hotspots.json",
                             "BTC-USD_morl_ridges.json", "manifest.json"})
        CHECK(fs::exists(root / "out" / name));
    CHECK(server.requests().size() == 1);

    const auto manifest = nlohmann::json::parse(slurp(root / "out" / "manifest.json"));
    REQUIRE(manifest["artifacts"].size() == 4);
    for (const auto& a : manifest["artifacts"]) {
        CHECK(a["sha256"] == sha256_file(root / "out" / a["path"].get<std::string>()));
        CHECK(a["subject"] == "BTC/USD");
        CHECK(a["wavelet"] == "morl");
        REQUIRE(a["inputs"].size() == 1);
    }
    CHECK(manifest["window"]["from"] == "2021-01-01");

    const auto power_csv = import_matrix(root / "out" / "BTC-USD_morl_power.csv");
    CHECK(power_csv.values.cols() == 364); // 365 closes, 364 returns
    CHECK(power_csv.axes.time_labels.front() == "2021-01-02");

    const auto hot = nlohmann::json::parse(slurp(root / "out" / "BTC-USD_morl_hotspots.json"));
    CHECK(hot["quantile"] == 0.95);
    CHECK(hot["max_scale"].get<double>() == Catch::Approx(frequency_to_scale(MotherWavelet::morlet(), 0.125, 1.0)));

    SECTION("second run is served from the cache and is byte identical")
    {
        const auto first = snapshot(root / "out");
        const auto again = run_pipeline(cfg, server, no_sleep_retry());
        CHECK(server.requests().size() == 1);
        CHECK(snapshot(root / "out") == first);
    }
}

TEST_CASE("empty instrument list still writes a manifest")
{
    const auto root = scratch_dir("pipe2");
    auto j = btc_only(root);
    j["instruments"] = nlohmann::json::array();
    MockHistoryServer server;
    const auto result = run_pipeline(parse_pipeline_config(j), server, no_sleep_retry());
    const auto manifest = nlohmann::json::parse(slurp(result.manifest));
    CHECK(manifest["artifacts"].empty());
    CHECK(manifest["failures"].empty());
    CHECK(manifest["config_sha256"].get<std::string>().size() == 64);
    CHECK(server.calls() == 0);
}

TEST_CASE("failures are recorded and the rest continues")
{
    const auto root = scratch_dir("pipe3");
    MockHistoryServer server;
    server.by_symbol["BTC"] = random_walk_closes(every_day(Date(2020, 12, 1), Date(2022, 1, 31)), 11, 29000.0, 0.04);
    server.by_symbol["ETH"] = random_walk_closes(every_day(Date(2021, 1, 1), Date(2021, 5, 1)), 12, 700.0, 0.05);
    server.withheld = {Date(2021, 3, 3)};
    write_fred_csv(root / "SP500.csv", "SP500", random_walk_closes(weekdays(Date(2021, 1, 1), Date(2021, 12, 31)), 4, 3700.0, 0.01));

    auto j = btc_only(root);
    j["wavelets"] = {"morl", "cmor1.5-1.0"};
    j["instruments"] = {
        {{"source", "cryptocompare"}, {"base", "ETH"}},
        {{"source", "csv"}, {"name", "S&P500"}, {"path", (root / "SP500.csv").string()}, {"schema", {{"preset", "fred"}, {"price_column", "SP500"}}}},
        {{"source", "csv"}, {"name", "missing"}, {"path", (root / "nope.csv").string()}, {"schema", "investing"}},
    };
    j["pairs"] = nlohmann::json::array({nlohmann::json::array({"S&P500", "ETH/USD"}), nlohmann::json::array({"S&P500", "nobody"})});
    const auto result = run_pipeline(parse_pipeline_config(j), server, no_sleep_retry());

    std::map<std::string, FailureRecord> by_subject;
    for (const auto& f : result.failures)
        by_subject[f.subject] = f;
    REQUIRE(by_subject.count("ETH/USD"));
    CHECK(by_subject["ETH/USD"].kind == ErrorKind::Data);
    CHECK(by_subject["ETH/USD"].message.find("2021-03-03") != std::string::npos);
    REQUIRE(by_subject.count("missing"));
    CHECK(by_subject["missing"].kind == ErrorKind::Io);
    CHECK(by_subject.count("S&P500 vs ETH/USD"));
    CHECK(by_subject["S&P500 vs nobody"].stage == "config");

    // S&P500 went through both wavelets untouched.
    for (const char* name : {"SandP500_morl_power.png", "SandP500_cmor1.5-1.0_power.png",
                             "SandP500_cmor1.5-1.0_hotspots.json"})
        CHECK(fs::exists(root / "out" / name));
    const auto manifest = nlohmann::json::parse(slurp(result.manifest));
    CHECK(manifest["failures"].size() == 4);
    CHECK(manifest["artifacts"].size() == 8);
}

TEST_CASE("pairs produce coherence artifacts")
{
    const auto root = scratch_dir("pipe4");
    MockHistoryServer server;
    server.by_symbol["BTC"] = random_walk_closes(every_day(Date(2020, 12, 1), Date(2022, 1, 31)), 11, 29000.0, 0.04);
    write_investing_csv(root / "gold.csv", random_walk_closes(weekdays(Date(2020, 6, 1), Date(2022, 6, 1)), 5, 1800.0, 0.01));
    auto j = btc_only(root);
    j["instruments"].push_back({{"source", "csv"}, {"name", "GOLD/USD"}, {"path", "gold.csv"}, {"schema", "investing"}});
    j["pairs"] = nlohmann::json::array({nlohmann::json::array({"BTC/USD", "GOLD/USD"})});
    const auto result = run_pipeline(parse_pipeline_config(j, root), server, no_sleep_retry());
    CHECK(result.failures.empty());

    const auto r2 = import_matrix(root / "out" / "BTC-USD__GOLD-USD_morl_coherence.csv");
    CHECK(r2.values.cols() == weekdays(Date(2021, 1, 1), Date(2021, 12, 31)).size() - 1);
    for (double v : r2.values.data()) {
        REQUIRE(v >= 0.0);
        REQUIRE(v <= 1.0);
    }
    const auto phase = import_matrix(root / "out" / "BTC-USD__GOLD-USD_morl_phase.csv");
    for (double v : phase.values.data())
        REQUIRE(std::abs(v) <= std::numbers::pi);
    CHECK(fs::exists(root / "out" / "BTC-USD__GOLD-USD_morl_coherence.png"));
}

TEST_CASE("config parsing")
{
    const auto root = scratch_dir("pipe5");
    SECTION("relative paths resolve against the config file")
    {
        std::ofstream(root / "run.json") << R"({"output_dir": "o", "cache_dir": "c", "grid": {"s0": 4, "voices": 8},
            "hotspots": {"quantile": 0.9, "max_freq": 0.2}, "ridges": {"min_run": 20}, "workers": 2,
            "instruments": [{"source": "csv", "path": "x.csv", "schema": {"preset": "fred", "price_column": "X"}}]})";
        const auto cfg = load_pipeline_config(root / "run.json");
        CHECK(cfg.output_dir == root / "o");
        CHECK(cfg.instruments[0].path == root / "x.csv");
        CHECK(cfg.instruments[0].name == "x");
        CHECK(cfg.instruments[0].schema.price_column == "X");
        CHECK(cfg.s0 == 4.0);
        CHECK(cfg.voices == 8);
        CHECK(cfg.hotspot_quantile == 0.9);
        CHECK(cfg.hotspot_max_frequency == 0.2);
        CHECK(cfg.ridge_min_run == 20);
        CHECK(cfg.workers == 2);
        CHECK(cfg.from_date == Date(2017, 7, 10));
        CHECK(cfg.to_date == Date(2022, 12, 31));
    }
    SECTION("errors")
    {
        CHECK_THROWS_AS(parse_pipeline_config({{"wavelets", {"haar"}}}), ParseError);
        CHECK_THROWS_AS(parse_pipeline_config({{"window", {{"from", "2022-01-01"}, {"to", "2021-01-01"}}}}), ParseError);
        CHECK_THROWS_AS(parse_pipeline_config({{"instruments", {{{"source", "ftp"}}}}}), ParseError);
        CHECK_THROWS_AS(parse_pipeline_config({{"instruments", {{{"base", "BTC"}}, {{"base", "BTC"}}}}}), ParseError);
        CHECK_THROWS_AS(parse_pipeline_config({{"pairs", nlohmann::json::array({nlohmann::json::array({"a"})})}}), ParseError);
        CHECK_THROWS_AS(parse_pipeline_config({{"dt", "one"}}), ParseError);
        std::ofstream(root / "broken.json") << "{";
        CHECK_THROWS_AS(load_pipeline_config(root / "broken.json"), ParseError);
    }
}

TEST_CASE("seven instruments, two wavelets")
{
    const auto root = scratch_dir("pipe6");
    MockHistoryServer server;
    auto j = seven_instrument_config(root, server, Date(2021, 1, 1), Date(2021, 9, 30));
    j["output_dir"] = (root / "out").string();
    j["cache_dir"] = (root / "cache").string();
    const auto result = run_pipeline(parse_pipeline_config(j), server, no_sleep_retry());
    CHECK(result.failures.empty());
    std::map<std::string, int> kinds;
    for (const auto& a : result.artifacts)
        ++kinds[a.kind];
    CHECK(kinds["heatmap"] == 14);
    CHECK(kinds["matrix"] == 14);
    CHECK(kinds["hotspots"] == 14);
    CHECK(kinds["ridges"] == 14);
}
