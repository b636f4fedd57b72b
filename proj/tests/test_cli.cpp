#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli_commands.hpp"
#include "lpseq/simulation.hpp"

namespace fs = std::filesystem;
using lpseq::cli::run;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("lpseq_cli_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(CliParse, Helpers) {
  EXPECT_TRUE(std::isinf(lpseq::cli::parse_p("inf")));
  EXPECT_EQ(lpseq::cli::parse_p("1.5"), 1.5);
  EXPECT_THROW(lpseq::cli::parse_p("-1"), std::exception);
  EXPECT_THROW(lpseq::cli::parse_p("abc"), std::exception);
  EXPECT_EQ(lpseq::cli::parse_vector("1, 2\n3 4"), (std::vector<double>{1.0, 2.0, 3.0, 4.0}));
  EXPECT_THROW(lpseq::cli::parse_vector("1,x"), std::exception);
}

TEST(CliProject, L2Example) {
  const auto r = call({"project", "--p", "2", "--input", "3,4"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("point: 0.59999999999999998,0.80000000000000004"), std::string::npos) << r.out;
  EXPECT_NE(r.err.find("config:"), std::string::npos);
}

TEST(CliProject, JsonSparseAndBox) {
  auto r = call({"project", "--p", "0", "--sparsity", "2", "--input", "3,-1,2", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["point"].get<std::vector<double>>(), (std::vector<double>{3.0, 0.0, 2.0}));

  r = call({"project", "--p", "inf", "--input", "2,-0.5", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["point"].get<std::vector<double>>(), (std::vector<double>{1.0, -0.5}));
}

TEST(CliProject, ReadsInputFileAndReportsGap) {
  const auto dir = scratch("project");
  std::ofstream(dir / "y.txt") << "2.0\n-1.0\n0.5\n";
  const auto r = call({"project", "--p", "0.5", "--input", (dir / "y.txt").string(), "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_TRUE(j.contains("duality_gap"));
  EXPECT_EQ(j["point"].size(), 3u);
  fs::remove_all(dir);
}

TEST(CliProject, UsageErrors) {
  EXPECT_EQ(call({"project", "--p", "2", "--input", "3,x"}).code, 2);
  EXPECT_EQ(call({"project", "--p", "2", "--input", "3,4", "--bogus"}).code, 2);
  EXPECT_EQ(call({"project", "--input", "3,4"}).code, 2);
  EXPECT_EQ(call({"project", "--p", "0", "--input", "3,4"}).code, 2);
  EXPECT_EQ(call({"project", "--p", "2", "--radius", "-1", "--input", "3,4"}).code, 2);
  EXPECT_EQ(call({"frobnicate"}).code, 2);
  EXPECT_EQ(call({}).code, 2);
}

TEST(CliRates, TextAndJson) {
  auto r = call({"rates", "--p", "3", "--d", "100", "--sigma", "0.1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto line = r.out.substr(0, r.out.find('\n'));
  ASSERT_EQ(line.rfind("control: ", 0), 0u) << r.out;
  EXPECT_NEAR(std::stod(line.substr(9)), 1.0, 1e-15);
  EXPECT_NE(r.out.find("label: optimal_p_ge_2"), std::string::npos);

  r = call({"rates", "--p", "1.5", "--d", "10000", "--sigma", "0.02", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["label"], "suboptimal");
  EXPECT_EQ(j["subinterval"], "flat");
  EXPECT_NEAR(j["control"].get<double>(), 0.204147986379496149, 1e-14);

  r = call({"rates", "--p", "0.5", "--d", "100", "--sigma", "0.1"});
  EXPECT_NE(r.out.find("optimal_p_near_1"), std::string::npos);
  EXPECT_NE(r.out.find("two_sided: no"), std::string::npos);
}

TEST(CliRates, SampleSizeAndScenario) {
  const auto a = call({"rates", "--p", "1.5", "--d", "1000", "--n", "4", "--tau", "0.2", "--format", "json"});
  const auto b = call({"rates", "--p", "1.5", "--d", "1000", "--sigma", "0.1", "--format", "json"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(nlohmann::json::parse(a.out)["control"], nlohmann::json::parse(b.out)["control"]);

  const auto s = call({"rates", "--scenario", "poly_subopt", "--n", "100", "--format", "json"});
  ASSERT_EQ(s.code, 0) << s.err;
  const auto j = nlohmann::json::parse(s.out);
  EXPECT_NEAR(j["d"].get<double>(), std::exp(10.0), 1e-6);
  EXPECT_EQ(call({"rates", "--scenario", "cubic", "--n", "100"}).code, 2);
  EXPECT_EQ(call({"rates", "--p", "1.5", "--d", "0.5", "--sigma", "0.1"}).code, 2);
}

TEST(CliSimulate, WritesCsvMetaAndIsDeterministic) {
  const auto dir = scratch("simulate");
  nlohmann::json cfg{{"regime", "fig2a"}, {"d_grid", {100, 200}}, {"reps", 5}, {"seed", 3}};
  std::ofstream(dir / "cfg.json") << cfg.dump();
  const std::string out1 = (dir / "a.csv").string(), out2 = (dir / "b.csv").string();
  auto r = call({"simulate", "--config", (dir / "cfg.json").string(), "--out", out1});
  ASSERT_EQ(r.code, 0) << r.err;
  r = call({"simulate", "--config", (dir / "cfg.json").string(), "--out", out2, "--threads", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto slurp = [](const std::string& p) {
    std::ifstream f(p);
    return std::string(std::istreambuf_iterator<char>(f), {});
  };
  EXPECT_EQ(slurp(out1), slurp(out2));
  EXPECT_EQ(slurp(out1).substr(0, slurp(out1).find('\n')), lpseq::kCsvHeader);
  const auto meta = nlohmann::json::parse(slurp(out1 + ".meta.json"));
  EXPECT_GT(meta["minimax_anchor"].get<double>(), 0.0);
  EXPECT_EQ(meta["minimax_reference"].size(), 2u);
  EXPECT_FALSE(fs::exists(out1 + ".cursor.json"));

  // Without an output path the CSV goes to stdout.
  r = call({"simulate", "--config", (dir / "cfg.json").string()});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out, slurp(out1));
  fs::remove_all(dir);
}

TEST(CliSimulate, ResumeContinuesFromCursor) {
  const auto dir = scratch("resume");
  nlohmann::json cfg{{"regime", "fig2a"}, {"d_grid", {100, 200, 400}}, {"reps", 4}, {"seed", 5}};
  std::ofstream(dir / "cfg.json") << cfg.dump();
  const std::string full = (dir / "full.csv").string(), part = (dir / "part.csv").string();
  ASSERT_EQ(call({"simulate", "--config", (dir / "cfg.json").string(), "--out", full}).code, 0);

  // Fake an interrupted run that finished only the first cell.
  auto c = lpseq::config_from_json(cfg);
  c.d_grid = {100};
  {
    std::ofstream f(part);
    lpseq::write_csv(f, c, lpseq::run_experiment(c).rows);
  }
  std::ofstream(part + ".cursor.json") << R"({"next_cell": 1, "total_cells": 3})";
  const auto r = call({"simulate", "--config", (dir / "cfg.json").string(), "--out", part, "--resume"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream a(full), b(part);
  EXPECT_EQ(std::string(std::istreambuf_iterator<char>(a), {}), std::string(std::istreambuf_iterator<char>(b), {}));
  fs::remove_all(dir);
}

TEST(CliSimulate, RejectsBadConfig) {
  const auto dir = scratch("badcfg");
  std::ofstream(dir / "cfg.json") << R"({"reps": 3, "colour": "red"})";
  EXPECT_EQ(call({"simulate", "--config", (dir / "cfg.json").string()}).code, 2);
  std::ofstream(dir / "broken.json") << "{";
  EXPECT_EQ(call({"simulate", "--config", (dir / "broken.json").string()}).code, 2);
  EXPECT_EQ(call({"simulate", "--config", (dir / "missing.json").string()}).code, 2);
  fs::remove_all(dir);
}

TEST(CliReproduce, SmallSweepWritesArtifacts) {
  const auto dir = scratch("reproduce");
  const auto r = call({"reproduce", "--figure", "2a", "--max-d", "400", "--grid-points", "3", "--reps", "4", "--out",
                       dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("mle slope"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("final ratio mle/st"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "fig2a.csv"));
  std::ifstream sf(dir / "fig2a_slopes.json");
  const auto slopes = nlohmann::json::parse(sf);
  EXPECT_TRUE(slopes["slopes"].contains("st"));
  std::ifstream pf(dir / "fig2a_plot.json");
  const auto plot = nlohmann::json::parse(pf);
  EXPECT_TRUE(plot.contains("$schema"));
  EXPECT_EQ(call({"reproduce", "--figure", "3", "--out", dir.string()}).code, 2);
  fs::remove_all(dir);
}

TEST(CliVerify, SuitesAndExitCodes) {
  auto r = call({"verify", "--suite", "monotone"});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("PASS"), std::string::npos);
  r = call({"verify", "--suite", "smallball", "--reps", "500"});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(call({"verify", "--suite", "nonsense"}).code, 2);
}
