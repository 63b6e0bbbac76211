#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "bandit/cli.hpp"
#include "json.hpp"

namespace bandit {
namespace {

using nlohmann::json;

std::string fixture(const char* name) { return std::string(BANDIT_FIXTURES_DIR) + "/" + name; }

struct Invocation {
  int code;
  std::string out;
  std::string err;
  json doc() const { return json::parse(out); }
};

Invocation run(std::vector<std::string> args) {
  args.insert(args.begin(), "bandit-forge");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, cli::kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"optimize"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"optimize", "/nonexistent.json"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"evaluate", fixture("three_singles.json"), "--labeling", "1,2"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"solve", fixture("three_singles.json")}).code, cli::kExitUsage);
  EXPECT_EQ(run({"solve", fixture("risk_averse.json"), "--constraints", fixture("three_singles.json")}).code, cli::kExitUsage);
}

TEST(Cli, Validate) {
  const Invocation ok = run({"validate", fixture("three_singles.json")});
  EXPECT_EQ(ok.code, cli::kExitOk);
  EXPECT_TRUE(ok.doc()["ok"].get<bool>());
  const Invocation bad = run({"validate", fixture("non_transient.json")});
  EXPECT_EQ(bad.code, cli::kExitFailure);
  EXPECT_EQ(bad.doc()["violation"]["condition"], "transient");
  EXPECT_EQ(bad.doc()["violation"]["bandit"], 1);
}

TEST(Cli, OptimizeNamesTheBestBandit) {
  const Invocation r = run({"optimize", fixture("three_singles.json")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const json d = r.doc();
  EXPECT_EQ(d["schema"], 1);
  EXPECT_EQ(d["command"], "optimize");
  EXPECT_DOUBLE_EQ(d["value"].get<double>(), 1.0);
  EXPECT_EQ(d["order"][0], 0);
  const Invocation two = run({"optimize", fixture("mixed_rn.json"), "--two-phase"});
  const Invocation one = run({"optimize", fixture("mixed_rn.json")});
  EXPECT_DOUBLE_EQ(two.doc()["value"].get<double>(), one.doc()["value"].get<double>());
}

TEST(Cli, EvaluateAgreesWithOracle) {
  for (const char* name : {"two_state.json", "two_bandits.json", "mixed_rn.json", "risk_averse.json", "risk_seeking.json"}) {
    const Invocation e = run({"evaluate", fixture(name), "--labeling", "random", "--seed", "7"});
    ASSERT_EQ(e.code, cli::kExitOk) << name << e.err;
    const json d = e.doc();
    std::string labels;
    for (const auto& l : d["labels"]) labels += (labels.empty() ? "" : ",") + std::to_string(l.get<std::size_t>());
    const Invocation o = run({"oracle", fixture(name), "--mode", "evaluate", "--labeling", labels});
    ASSERT_EQ(o.code, cli::kExitOk) << name << o.err;
    const double v = d["value"].get<double>();
    EXPECT_NEAR(v, o.doc()["value"].get<double>(), 1e-9 * (1 + std::abs(v))) << name;
  }
}

TEST(Cli, SolveThreeSingles) {
  const Invocation r = run({"solve", fixture("three_singles_constrained.json")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const json d = r.doc();
  EXPECT_EQ(d["status"], "optimal");
  EXPECT_NEAR(d["objective"].get<double>(), 0.6, 1e-9);
  EXPECT_EQ(d["support"].size(), 3u);
  const Invocation inf = run({"solve", fixture("three_singles_infeasible.json")});
  EXPECT_EQ(inf.code, cli::kExitFailure);
  EXPECT_EQ(inf.doc()["status"], "infeasible");
  EXPECT_EQ(inf.doc()["constraint"], 2);
  const Invocation o = run({"oracle", fixture("three_singles_constrained.json"), "--mode", "solve"});
  ASSERT_EQ(o.code, cli::kExitOk) << o.err;
  EXPECT_NEAR(o.doc()["objective"].get<double>(), 0.6, 1e-9);
}

TEST(Cli, SolveRejectsRiskSensitive) {
  const auto path = std::filesystem::temp_directory_path() / "bandit_cli_ra_constraints.json";
  std::ofstream(path) << R"({"rewards": [[-1, -1, -1, -1, -1], [0, 1, 0, 0, 0]], "bounds": [0.1]})";
  const Invocation r = run({"solve", fixture("risk_averse.json"), "--constraints", path.string()});
  std::filesystem::remove(path);
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("linear utility"), std::string::npos);
}

TEST(Cli, OutputIsDeterministic) {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"optimize", fixture("mixed_rn.json"), "--counts"},
           {"triangularize", fixture("two_bandits.json"), "--labeling", "optimizer"},
           {"solve", fixture("three_singles_constrained.json")},
           {"oracle", fixture("mixed_rn.json")}}) {
    const Invocation a = run(args), b = run(args);
    EXPECT_EQ(a.code, cli::kExitOk) << args[0] << a.err;
    EXPECT_EQ(a.out, b.out) << args[0];
  }
  const Invocation serial = run({"optimize", fixture("mixed_rn.json"), "--two-phase"});
  const Invocation parallel = run({"optimize", fixture("mixed_rn.json"), "--parallel"});
  EXPECT_EQ(serial.out, parallel.out);
}

TEST(Cli, WritesOutputFile) {
  const auto path = std::filesystem::temp_directory_path() / "bandit_cli_out.json";
  const Invocation r = run({"triangularize", fixture("two_state.json"), "-o", path.string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(path);
  const json d = json::parse(in);
  std::filesystem::remove(path);
  EXPECT_EQ(d["command"], "triangularize");
  EXPECT_EQ(d["counts"]["total"]["arithmetic"], 9);
}

}  // namespace
}  // namespace bandit
