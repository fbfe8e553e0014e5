#pragma once

// File formats: run configs (JSON), datasets (JSON Lines, one frame per line),
// map snapshots (JSON), navigation logs (JSON Lines) and report files.

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "longnav/evaluation.hpp"
#include "longnav/feature.hpp"
#include "longnav/run_config.hpp"
#include "longnav/simulator.hpp"

namespace longnav {

namespace fs = std::filesystem;

// Configs. Unknown keys are rejected with ConfigError.
nlohmann::json to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const fs::path& path);
void save_run_config(const fs::path& path, const RunConfig& cfg);

nlohmann::json to_json(const StrategyConfig& cfg);
/// Accepts a bare kind name or an object with "kind" and overrides.
StrategyConfig strategy_config_from_json(const nlohmann::json& j);

// Dataset records:
// {"traversal":int,"location":int,"time_s":float,"gamma_px":float,"features":[{"x":float,"y":float,"d":"<hex>"}]}
std::string frame_to_jsonl(const Frame& frame);
/// Throws InvalidInput on malformed records.
Frame frame_from_json(const nlohmann::json& j);
void write_dataset(const fs::path& path, const std::vector<Frame>& frames);
std::vector<Frame> read_dataset(const fs::path& path);

class JsonlFrameSource : public FrameSource {
 public:
  explicit JsonlFrameSource(fs::path path);
  void rewind() override;
  bool next(Frame& frame) override;

 private:
  fs::path path_;
  std::ifstream in_;
  std::size_t line_ = 0;
};

// Map snapshots, including scores and temporal models.
nlohmann::json to_json(const PathMap& path);
PathMap path_map_from_json(const nlohmann::json& j);
void save_path_map(const fs::path& file, const PathMap& path);
PathMap load_path_map(const fs::path& file);

// Navigation logs: one LocationRecord per line, tagged with the strategy.
void write_logs(std::ostream& out, const StrategyRun& run);
void write_logs(const fs::path& file, std::span<const StrategyRun> runs);
/// Groups records by strategy in order of first appearance.
std::vector<StrategyRun> read_logs(const fs::path& file);

// Reports.
nlohmann::json summary_json(const Report& report);
void write_summary_json(const fs::path& file, const Report& report);
/// Header `threshold_px,<strategy>,...`, one row per threshold.
void write_cdf_csv(std::ostream& out, const Report& report);
void write_cdf_csv(const fs::path& file, const Report& report);
void write_report(const fs::path& dir, const Report& report);

}  // namespace longnav
