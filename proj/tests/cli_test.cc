#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("couder_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string Path(const std::string& name) const { return (dir_ / name).string(); }

  void Put(const std::string& name, const std::string& text) const {
    std::ofstream(Path(name)) << text;
  }

  std::string Get(const std::string& name) const {
    std::ifstream in(Path(name));
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }

  std::vector<json> Lines(const std::string& name) const {
    std::vector<json> out;
    std::istringstream in(Get(name));
    for (std::string line; std::getline(in, line);)
      if (!line.empty()) out.push_back(json::parse(line));
    return out;
  }

  int Run(const std::string& args) const {
    const std::string cmd = std::string(COUDER_CLI) + " " + args + " >" + Path("stdout") +
                            " 2>" + Path("stderr");
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  fs::path dir_;
};

const char* kTm4 = "[[0,3,1,2],[1,0,2,1],[2,2,0,1],[1,1,1,0]]";

TEST_F(CliTest, ExtractConstantSequenceGivesThatMatrix) {
  std::string text;
  for (int i = 0; i < 6; ++i)
    text += "{\"version\":1,\"t\":" + std::to_string(60 * i) + ",\"tm\":" + kTm4 + "}\n";
  Put("tm.jsonl", text);
  ASSERT_EQ(Run("extract " + Path("tm.jsonl") + " --k 1 -o " + Path("crit.jsonl")), 0);
  std::vector<json> crit = Lines("crit.jsonl");
  ASSERT_EQ(crit.size(), 1u);
  EXPECT_EQ(crit[0]["tm"].get<std::vector<std::vector<double>>>(),
            json::parse(kTm4).get<std::vector<std::vector<double>>>());
}

TEST_F(CliTest, FatTreeMetricsHaveTwoHops) {
  std::string text;
  for (int i = 0; i < 4; ++i)
    text += "{\"version\":1,\"t\":" + std::to_string(60 * i) + ",\"tm\":" + kTm4 + "}\n";
  Put("tm.jsonl", text);
  ASSERT_EQ(Run("stripe --pods 4 --ocs 2 --ports 3 --bandwidth 1 -o " + Path("phys.json")), 0);
  ASSERT_EQ(Run("evaluate " + Path("phys.json") + " - - " + Path("tm.jsonl") +
                " --baseline fattree -o " + Path("m.jsonl")),
            0);
  std::vector<json> m = Lines("m.jsonl");
  ASSERT_EQ(m.size(), 4u);
  for (const json& line : m) EXPECT_EQ(line["ahc"].get<double>(), 2.0);
}

TEST_F(CliTest, LdmReproducesIntegralSolution) {
  Put("phys.json",
      R"({"version":1,"num_pods":2,"num_ocs":1,"bandwidth_gbps":1,"h_eg":[[4,4]],"h_ig":[[4,4]]})");
  Put("crit.jsonl", "{\"version\":1,\"t\":0,\"tm\":[[0,1],[1,0]]}\n");
  ASSERT_EQ(Run("optimize " + Path("phys.json") + " " + Path("crit.jsonl") + " -o " + Path("sol.json")), 0);
  ASSERT_EQ(Run("round " + Path("phys.json") + " " + Path("sol.json") + " --method ldm -o " +
                Path("x.json") + " --report " + Path("rep.json")),
            0);
  json x = json::parse(Get("x.json"));
  EXPECT_EQ(x["x"], json::parse("[[[0,4],[4,0]]]"));
  EXPECT_EQ(json::parse(Get("rep.json"))["violation_ratio"].get<double>(), 0.0);
}

TEST_F(CliTest, UnknownFlagExitsWithUsageCode) {
  EXPECT_EQ(Run("extract --no-such-flag"), 64);
  EXPECT_EQ(Run("no-such-command"), 64);
}

TEST_F(CliTest, MalformedInputExitsNonZero) {
  Put("bad.json", "{\"version\":1,");
  Put("tm.jsonl", std::string("{\"version\":1,\"t\":0,\"tm\":") + kTm4 + "}\n");
  const int rc = Run("optimize " + Path("bad.json") + " " + Path("tm.jsonl"));
  EXPECT_NE(rc, 0);
  EXPECT_NE(rc, 64);
  EXPECT_FALSE(Get("stderr").empty());
}

}  // namespace
