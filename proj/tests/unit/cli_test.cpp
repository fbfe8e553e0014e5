#include "longnav/cli.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "longnav/io.hpp"

using namespace longnav;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("longnav_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    RunConfig cfg;
    cfg.world.n_locations = 3;
    cfg.world.landmarks_per_location = 80;
    cfg.teach.max_features = 60;
    cfg.schedule.traversals = 3;
    cfg.cdf_thresholds_px = {0, 10, 20};
    save_run_config(dir_ / "c.json", cfg);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return run_command(args, out_, err_);
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

}  // namespace

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run({}), kExitUsage);
  EXPECT_EQ(run({"teleport"}), kExitUsage);
  EXPECT_EQ(run({"compare", "--bogus"}), kExitUsage);
  EXPECT_EQ(run({"replay", "--strategy", "static"}), kExitUsage);
  EXPECT_EQ(run({"compare", "--mode", "sideways"}), kExitUsage);
  EXPECT_EQ(run({"compare", "--traversals", "0"}), kExitUsage);
  EXPECT_FALSE(err_.str().empty());
  EXPECT_EQ(run({"--help"}), kExitOk);
}

TEST_F(CliTest, IoAndValidationErrors) {
  EXPECT_EQ(run({"compare", "--config", path("missing.json")}), kExitFailure);
  EXPECT_NE(err_.str().find("missing.json"), std::string::npos);
  EXPECT_EQ(run({"compare", "--config", path("c.json"), "--strategy", "teleport", "--out", path("o")}), kExitFailure);
  EXPECT_EQ(run({"replay", "--dataset", path("none.jsonl"), "--strategy", "static", "--out", path("o")}), kExitFailure);
}

TEST_F(CliTest, GenerateIsDeterministic) {
  ASSERT_EQ(run({"generate", "--config", path("c.json"), "--seed", "7", "--out", path("a")}), kExitOk) << err_.str();
  ASSERT_EQ(run({"generate", "--config", path("c.json"), "--seed", "7", "--out", path("b")}), kExitOk);
  EXPECT_EQ(slurp(path("a/dataset.jsonl")), slurp(path("b/dataset.jsonl")));
  EXPECT_EQ(slurp(path("a/map.json")), slurp(path("b/map.json")));
  EXPECT_EQ(read_dataset(path("a/dataset.jsonl")).size(), 3u * 4u);
  ASSERT_EQ(run({"generate", "--config", path("c.json"), "--seed", "8", "--out", path("c")}), kExitOk);
  EXPECT_NE(slurp(path("a/dataset.jsonl")), slurp(path("c/dataset.jsonl")));
}

TEST_F(CliTest, ReplayIsByteIdentical) {
  ASSERT_EQ(run({"generate", "--config", path("c.json"), "--out", path("g")}), kExitOk);
  const std::vector<std::string> replay = {"replay", "--config", path("c.json"), "--dataset", path("g/dataset.jsonl"),
                                           "--strategy", "static"};
  auto with_out = [&](std::string out) {
    auto a = replay;
    a.push_back("--out");
    a.push_back(path(out));
    return a;
  };
  ASSERT_EQ(run(with_out("r1")), kExitOk) << err_.str();
  ASSERT_EQ(run(with_out("r2")), kExitOk);
  EXPECT_EQ(slurp(path("r1/logs.jsonl")), slurp(path("r2/logs.jsonl")));
  EXPECT_FALSE(slurp(path("r1/logs.jsonl")).empty());
  EXPECT_TRUE(fs::exists(path("r1/map_final.json")));

  auto from_map = with_out("r3");
  from_map.push_back("--map");
  from_map.push_back(path("g/map.json"));
  ASSERT_EQ(run(from_map), kExitOk) << err_.str();
  EXPECT_EQ(slurp(path("r1/logs.jsonl")), slurp(path("r3/logs.jsonl")));
}

TEST_F(CliTest, CompareWritesReports) {
  ASSERT_EQ(run({"compare", "--config", path("c.json"), "--out", path("cmp"), "--quiet", "--strategy", "static",
                 "--strategy", "fremen"}),
            kExitOk)
      << err_.str();
  const std::string csv = slurp(path("cmp/cdf.csv"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "threshold_px,static,fremen");
  const auto summary = nlohmann::json::parse(slurp(path("cmp/summary.json")));
  EXPECT_EQ(summary.at("strategies").size(), 2u);
  EXPECT_TRUE(fs::exists(path("cmp/logs.jsonl")));
  EXPECT_TRUE(fs::exists(path("cmp/config.json")));
  EXPECT_NE(out_.str().find("fremen"), std::string::npos);

  ASSERT_EQ(run({"report", "--config", path("c.json"), "--logs", path("cmp/logs.jsonl"), "--out", path("rep")}), kExitOk)
      << err_.str();
  EXPECT_EQ(slurp(path("rep/cdf.csv")), csv);
}

TEST_F(CliTest, CompareOnADataset) {
  ASSERT_EQ(run({"generate", "--config", path("c.json"), "--out", path("g")}), kExitOk);
  ASSERT_EQ(run({"compare", "--config", path("c.json"), "--dataset", path("g/dataset.jsonl"), "--out", path("d"),
                 "--strategy", "score", "--strategy", "latest"}),
            kExitOk)
      << err_.str();
  EXPECT_TRUE(fs::exists(path("d/summary.json")));
}

TEST_F(CliTest, SimulateDefaultsToClosedLoop) {
  ASSERT_EQ(run({"simulate", "--config", path("c.json"), "--out", path("s"), "--quiet", "--strategy", "summary"}), kExitOk)
      << err_.str();
  EXPECT_EQ(load_run_config(path("s/config.json")).mode, LoopMode::kClosed);
  EXPECT_TRUE(fs::exists(path("s/map_final.json")));
}
