#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "paraboliq/cli.hpp"

using namespace paraboliq;

namespace {

struct Invocation {
  int status;
  std::string out;
  std::string err;
};

Invocation run(std::vector<std::string> args) {
  args.insert(args.begin(), "paraboliq");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int status = cli::main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  return {status, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path temp(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("paraboliq_test_" + name);
}

std::string config_line(const std::string& report) {
  std::istringstream in(report);
  std::string line;
  while (std::getline(in, line))
    if (line.rfind("# config: ", 0) == 0) return line.substr(10);
  return "";
}

}  // namespace

TEST(Cli, PassingRunExitsZero) {
  const Invocation r = run({"certificate", "--example", "punctured_disc", "--samples", "100000", "--no-timestamp"});
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("k,c_k,stderr"), std::string::npos);
  EXPECT_NE(r.out.find("# summary k_star: 3"), std::string::npos) << r.out;
  EXPECT_EQ(r.out.find("# timestamp"), std::string::npos);
}

TEST(Cli, TimestampIsPresentByDefault) {
  const Invocation r = run({"lemma21", "--example", "cusp", "--grid-density", "4"});
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(r.out.rfind("# timestamp: ", 0), 0u);
}

TEST(Cli, FailedVerdictExitsOne) {
  const Invocation r = run({"gradcheck", "--example", "punctured_disc", "--samples", "20", "--k-max", "1", "--tol-gradient",
                     "1e-30", "--no-timestamp"});
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("verdict gradient failed"), std::string::npos) << r.err;
  EXPECT_NE(r.out.find("# verdict gradient: fail"), std::string::npos);
}

TEST(Cli, RuntimeErrorExitsOne) {
  // A well-formed Stokes form on a surface chart: the input parses, the
  // computation itself refuses.
  const auto path = temp("surface_stokes.json");
  std::ofstream(path) << R"({
    "example": "cone_blowup",
    "forms": [{"name": "w1", "a": [[{"exps": [0, 1, 0, 0, 0, 0], "re": 1}], [], []], "b": [[], [], []]}],
    "sampler": {"n_samples": 1000}
  })";
  const Invocation r = run({"stokes", "--config", path.string(), "--no-timestamp"});
  EXPECT_EQ(r.status, 1) << r.err;
  EXPECT_NE(r.err.find("curve charts"), std::string::npos) << r.err;
  std::filesystem::remove(path);
}

TEST(Cli, MalformedInputExitsTwo) {
  EXPECT_EQ(run({"energy", "--example", "cusp", "--samples", "many"}).status, 2);
  EXPECT_EQ(run({"energy", "--example", "no_such_chart"}).status, 2);
  EXPECT_EQ(run({"energy"}).status, 2);  // no chart source
  EXPECT_EQ(run({"frobnicate"}).status, 2);
  EXPECT_EQ(run({"energy", "--example", "cusp", "--format", "xml"}).status, 2);
  EXPECT_EQ(run({"stokes", "--example", "cusp", "--eps-list", "0.1,abc"}).status, 2);
  EXPECT_EQ(run({"energy", "--example", "cusp", "--quantity", "entropy"}).status, 2);
  EXPECT_EQ(run({"energy", "--example", "cusp", "--config", temp("missing.json").string()}).status, 2);
  const Invocation r = run({"dbar", "--example", "cusp", "--form", "nope", "--samples", "1000"});
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.err.find("nope"), std::string::npos);
}

TEST(Cli, ConfigErrorsPointAtTheField) {
  const auto path = temp("bad_config.json");
  std::ofstream(path) << "{\n  \"example\": \"cusp\",\n  \"sampler\": {\"n_samples\": \"lots\"}\n}\n";
  const Invocation r = run({"energy", "--config", path.string()});
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.err.find("$.sampler.n_samples"), std::string::npos) << r.err;

  std::ofstream(path) << "{\n  \"example\": \"cusp\",\n  \"sampler\": {\"n_samples\": 10,}\n}\n";
  const Invocation s = run({"energy", "--config", path.string()});
  EXPECT_EQ(s.status, 2);
  EXPECT_NE(s.err.find(path.string() + ":3:"), std::string::npos) << s.err;
  std::filesystem::remove(path);
}

TEST(Cli, HelpListsColumnsAndVersionPrints) {
  const Invocation h = run({"--help"});
  EXPECT_EQ(h.status, 0);
  EXPECT_NE(h.out.find("inner_mass,outer_mass,residual,tolerance,verdict"), std::string::npos);
  const Invocation v = run({"--version"});
  EXPECT_EQ(v.status, 0);
  EXPECT_EQ(v.out, std::string(PARABOLIQ_VERSION) + "\n");
}

TEST(Cli, ReportsAreIndependentOfWorkerCount) {
  const auto a = temp("w1.csv"), b = temp("w3.csv");
  const std::vector<std::string> base{"capacity", "--example", "punctured_disc", "--samples", "50000", "--seed", "7",
                                      "--block-size", "1024", "--no-timestamp"};
  auto with = [&](const std::string& workers, const std::filesystem::path& out) {
    auto args = base;
    args.insert(args.end(), {"--workers", workers, "--out", out.string()});
    return run(args);
  };
  EXPECT_EQ(with("1", a).status, 0);
  EXPECT_EQ(with("3", b).status, 0);
  EXPECT_FALSE(slurp(a).empty());
  EXPECT_EQ(slurp(a), slurp(b));
  std::filesystem::remove(a);
  std::filesystem::remove(b);
}

TEST(Cli, ConfigLineReproducesTheRun) {
  const Invocation first = run({"dbar", "--example", "cone_blowup", "--form", "dsbar", "--samples", "20000", "--seed", "3",
                         "--j-max", "3", "--no-timestamp"});
  ASSERT_EQ(first.status, 0) << first.err;
  const auto path = temp("roundtrip.json");
  std::ofstream(path) << config_line(first.out);
  const Invocation second = run({"dbar", "--config", path.string(), "--no-timestamp"});
  EXPECT_EQ(second.status, 0) << second.err;
  EXPECT_EQ(first.out, second.out);
  std::filesystem::remove(path);
}

TEST(Cli, InlineChartAndFormsFromConfig) {
  // The punctured disc written out by hand, with an extra bounded form.
  const auto path = temp("inline.json");
  std::ofstream(path) << R"({
    "chart": {"name": "disc", "n": 1, "N": 1,
              "pi": [[{"exps": [1], "re": 1}]], "cut_pullbacks": [[{"exps": [1], "re": 1}]]},
    "forms": [{"name": "z", "q": 0, "a": [[{"exps": [1, 0], "re": 1}]], "sup": 0.5, "dbar": [[]]}],
    "params": {"form": "z", "j_max": 4},
    "sampler": {"n_samples": 20000}
  })";
  const Invocation r = run({"dbar", "--config", path.string(), "--no-timestamp"});
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("# summary form: z"), std::string::npos);
  std::filesystem::remove(path);
}

TEST(Cli, SeedEnvironmentVariableOverridesTheFlag) {
  const std::vector<std::string> args{"energy", "--example", "cusp", "--samples", "20000", "--seed", "1", "--no-timestamp"};
  const Invocation plain = run(args);
  ::setenv("PARABOLIQ_SEED", "99", 1);
  const Invocation env = run(args);
  ::unsetenv("PARABOLIQ_SEED");
  EXPECT_EQ(env.status, 0);
  EXPECT_NE(env.out.find("\"seed\":99"), std::string::npos);
  EXPECT_NE(plain.out, env.out);
  ::setenv("PARABOLIQ_SEED", "x9", 1);
  EXPECT_EQ(run(args).status, 2);
  ::unsetenv("PARABOLIQ_SEED");
}

TEST(Cli, JsonFormat) {
  const Invocation r = run({"lemma21", "--example", "cone_blowup", "--grid-density", "4", "--format", "json", "--no-timestamp"});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto doc = io::json::parse(r.out);
  EXPECT_TRUE(doc["metadata"]["pass"].get<bool>());
  EXPECT_FALSE(doc["metadata"].contains("timestamp"));
  EXPECT_EQ(doc["rows"].size(), 2u);
  EXPECT_EQ(doc["metadata"]["config"]["command"], "lemma21");
}

TEST(Cli, EveryCommandRunsOnItsDefaultExample) {
  const std::vector<std::vector<std::string>> cases{
      {"energy", "--example", "cone_blowup", "--samples", "20000", "--levels", "2"},
      {"capacity", "--example", "punctured_disc", "--samples", "100000"},
      {"lemma21", "--example", "node_branch", "--grid-density", "16", "--levels", "2"},
      {"stokes", "--example", "cusp", "--samples", "20000"},
      {"stokes", "--example", "node_branch", "--samples", "20000"},
      {"dbar", "--example", "punctured_disc", "--form", "zbar_dzbar", "--samples", "20000"},
      {"gradcheck", "--example", "node_branch", "--samples", "20", "--k-max", "2"}};
  for (auto args : cases) {
    args.push_back("--no-timestamp");
    const Invocation r = run(args);
    EXPECT_EQ(r.status, 0) << args[0] << " " << args[2] << "\n" << r.err << r.out;
  }
}
