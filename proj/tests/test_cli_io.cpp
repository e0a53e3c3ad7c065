#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "pcfm/cli_io.hpp"
#include "pcfm/errors.hpp"

using namespace pcfm;
using nlohmann::json;

namespace {

json minimal() {
    return json::parse(R"({
      "name": "tiny",
      "fibers": {"f": {"length_km": 50, "alpha_db_per_km": 0.2, "fc_thz": 193.5, "beta2_ps2_per_km": -21.3,
                       "aeff_um2": 80, "raman_gain": "none"}},
      "channel_plans": {"p": {"combs": [{"first_center_thz": 193.4, "spacing_ghz": 50,
                                         "count": 3, "symbol_rate_gbaud": 28, "roll_off": 0.1,
                                         "power_dbm": 0}], "cut_index": 1}},
      "spans": [{"fiber": "f", "plan": "p"}]
    })");
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string config_path_of(const json& doc) {
    try {
        io::parse_scenario(doc);
    } catch (const ConfigError& e) {
        return e.path();
    }
    return "";
}

std::filesystem::path scratch(const std::string& name) {
    auto d = std::filesystem::temp_directory_path() / ("pcfm_test_" + name);
    std::filesystem::remove_all(d);
    return d;
}

}  // namespace

TEST(Scenario, ClsBundle) {
    const auto cfg = io::load_named_scenario("paper_cls_100km");
    ASSERT_EQ(cfg.spans.size(), 1u);
    const auto& plan = cfg.spans[0].plan;
    ASSERT_EQ(plan.size(), 150u);
    EXPECT_NEAR(plan.channels.front().center_thz, 184.50, 1e-9);
    EXPECT_NEAR(plan.channels[49].center_thz, 184.50 + 49 * 0.11875, 1e-9);
    EXPECT_NEAR(plan.channels[50].center_thz, 190.75, 1e-9);
    EXPECT_NEAR(plan.channels[100].center_thz, 197.00, 1e-9);
    EXPECT_LE(plan.channels[49].center_thz, 190.35);
    EXPECT_LE(plan.channels[99].center_thz, 196.60);
    EXPECT_LE(plan.channels[149].center_thz, 202.85);
    for (const auto& c : plan.channels) EXPECT_NEAR(c.bandwidth_thz, 0.1 * 1.1, 1e-12);
    const auto& pumps = cfg.spans[0].pumps;
    ASSERT_EQ(pumps.size(), 3u);
    const double f[] = {205.1, 211.5, 214.0}, dbm[] = {21.5, 27.7, 26.6};
    for (int i = 0; i < 3; ++i) {
        EXPECT_EQ(pumps[i].frequency_thz, f[i]);
        EXPECT_NEAR(pumps[i].power_mw, std::pow(10.0, dbm[i] / 10), 1e-9);
        EXPECT_EQ(pumps[i].direction, PumpDirection::backward);
    }
    EXPECT_EQ(cfg.spans[0].fiber.length_km, 100.0);
}

TEST(Scenario, Desk7) {
    const auto cfg = io::load_named_scenario("desk_7ch");
    const auto& plan = cfg.spans[0].plan;
    ASSERT_EQ(plan.size(), 7u);
    for (std::size_t i = 1; i < plan.size(); ++i)
        EXPECT_NEAR(plan.channels[i].center_thz - plan.channels[i - 1].center_thz, 0.05, 1e-9);
    EXPECT_NEAR(plan.channels[0].bandwidth_thz, 0.028 * 1.1, 1e-12);
    EXPECT_EQ(cfg.mode, io::EngineMode::compare);
}

TEST(Scenario, MissingAttenuationNamesField) {
    auto doc = minimal();
    doc["fibers"]["f"].erase("alpha_db_per_km");
    EXPECT_EQ(config_path_of(doc), "/fibers/f/alpha_db_per_km");
}

TEST(Scenario, SchemaErrors) {
    auto a = minimal();
    a["fibers"]["f"]["alpha_per_km"] = 0.05;
    EXPECT_NE(config_path_of(a).find("alpha"), std::string::npos);  // ambiguous units

    auto b = minimal();
    b["spans"][0]["fibre"] = "f";
    EXPECT_EQ(config_path_of(b), "/spans/0/fibre");  // unknown key

    auto c = minimal();
    c["channel_plans"]["p"]["combs"][0]["power_mw"] = 1.0;
    EXPECT_NE(config_path_of(c), "");

    auto d = minimal();
    d["spans"][0]["plan"] = "nope";
    EXPECT_EQ(config_path_of(d), "/spans/0/plan");

    auto e = minimal();
    e["fibers"]["f"]["lumped_events"] = json::array({{{"position_km", 60.0}, {"loss_db", 1.0}}});
    EXPECT_EQ(config_path_of(e), "/fibers/f/lumped_events/0/position_km");
}

TEST(Scenario, UnitNormalization) {
    const auto cfg = io::parse_scenario(minimal());
    const auto& c = cfg.spans[0].plan.channels;
    EXPECT_NEAR(c[0].power_mw, 1.0, 1e-15);
    EXPECT_NEAR(c[2].center_thz, 193.5, 1e-12);
    EXPECT_NEAR(cfg.spans[0].fiber.alpha_per_km(193.4), 0.2 * std::log(10.0) / 10.0, 1e-15);
}

TEST(Scenario, RoundTripIdempotent) {
    for (const char* name : {"desk_7ch", "desk_7ch_lumped_2db", "desk_9ch_raman", "paper_cls_100km"}) {
        const auto cfg = io::load_named_scenario(name);
        const auto once = io::normalized_json(cfg);
        const auto twice = io::normalized_json(io::parse_scenario(once));
        EXPECT_EQ(once.dump(), twice.dump()) << name;
    }
}

TEST(Run, NliReportHasOneRowPerChannel) {
    auto cfg = io::load_named_scenario("desk_7ch");
    const auto out = scratch("nli");
    const auto summary = io::run(cfg, io::Verb::nli, out);
    EXPECT_FALSE(summary.written.empty());
    std::ifstream in(out / "nli_report.csv");
    std::string line;
    std::size_t rows = 0;
    std::getline(in, line);
    EXPECT_NE(line.find("gsnr_nli_db"), std::string::npos);
    while (std::getline(in, line)) rows += line.empty() ? 0 : 1;
    EXPECT_EQ(rows, 7u);
    EXPECT_TRUE(std::filesystem::exists(out / "spp_span0.csv"));
    EXPECT_TRUE(std::filesystem::exists(out / "poly_span0_np9.csv"));
}

TEST(Run, ByteStable) {
    auto cfg = io::parse_scenario(minimal());
    const auto a = scratch("stable_a"), b = scratch("stable_b");
    io::run(cfg, io::Verb::nli, a);
    io::run(cfg, io::Verb::nli, b);
    for (const char* f : {"spp_span0.csv", "poly_span0_np9.csv", "nli_report.csv"})
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}

TEST(Run, SweepWritesOneReportPerDegree) {
    auto cfg = io::parse_scenario(minimal());
    cfg.sweep_degrees = {1, 4, 9};
    const auto out = scratch("sweep");
    io::run(cfg, io::Verb::sweep_np, out);
    for (int d : {1, 4, 9})
        EXPECT_TRUE(std::filesystem::exists(out / ("nli_report_np" + std::to_string(d) + ".csv")));
    EXPECT_TRUE(std::filesystem::exists(out / "sweep_np.csv"));
}

TEST(Run, CompareWritesDelta) {
    auto doc = minimal();
    doc["engine_mode"] = "compare";
    doc["oracle"] = {{"include_mci", true}, {"lozenge_domains", true}, {"rel_tol", 1e-3}};
    const auto cfg = io::parse_scenario(doc);
    const auto out = scratch("compare");
    io::run(cfg, out);
    std::ifstream in(out / "delta_gsnr.csv");
    std::string header, line;
    std::getline(in, header);
    EXPECT_NE(header.find("delta_gsnr_db"), std::string::npos);
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        const double d = std::stod(line.substr(line.rfind(',') + 1));
        EXPECT_LT(d, 0.0);
    }
    EXPECT_EQ(rows, 3u);
}
