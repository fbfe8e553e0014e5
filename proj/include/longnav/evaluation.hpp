#pragma once

// Registration-error statistics and strategy comparison.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "longnav/navigation.hpp"
#include "longnav/run_config.hpp"
#include "longnav/stats.hpp"

namespace longnav {

struct FrameKey {
  int traversal = 0;
  int location = 0;
  auto operator<=>(const FrameKey&) const = default;
};

struct ErrorSequence {
  std::string strategy;
  std::vector<FrameKey> keys;
  std::vector<double> values;  // |delta - gamma| px, or the penalty on failure
  std::vector<bool> failed;

  std::size_t size() const { return values.size(); }
  std::size_t failure_count() const;
  double mean() const;
};

/// eps_i = |delta_i - gamma_i|; failed registrations get `penalty_px` and a flag.
ErrorSequence registration_errors(std::string strategy, std::span<const TraversalLog> logs, double penalty_px);

/// (threshold, P(eps <= threshold)). Throws InvalidInput for an empty sequence.
std::vector<std::pair<double, double>> error_cdf(const ErrorSequence& eps, std::span<const double> thresholds);

/// Throws InvalidInput when the frame keys differ.
TTestResult paired_t_test(const ErrorSequence& a, const ErrorSequence& b, double alpha);

/// Restricts every sequence to the frame keys present in all of them, in key
/// order. Returns the number of distinct keys dropped.
std::size_t align_sequences(std::span<ErrorSequence> sequences);

struct StrategyRun {
  std::string strategy;
  std::vector<TraversalLog> logs;
  std::uint64_t frame_stream_hash = 0;
  std::size_t refused_alternatives = 0;
  PathMap final_map;
};

using ProgressFn = std::function<void(const std::string& strategy, int traversal)>;

/// Teaches a fresh world from cfg and runs `strategy` over the schedule.
StrategyRun run_world(const RunConfig& cfg, const StrategyConfig& strategy, const ProgressFn& progress = {});

/// Frame-by-frame replay of a recorded dataset against `path`. Frames of
/// traversal 0 are teach frames and are not replayed.
class FrameSource {
 public:
  virtual ~FrameSource() = default;
  /// Restarts the stream; each strategy reads it from the beginning.
  virtual void rewind() = 0;
  virtual bool next(Frame& frame) = 0;
};

StrategyRun replay(FrameSource& source, const PathMap& path, const StrategyConfig& strategy,
                   const RegistrationConfig& registration);

/// The open-loop observation stream of cfg: teach frames (traversal 0, offset
/// 0) followed by every scheduled traversal. Replaying it reproduces run_world
/// in open-loop mode.
void record_frames(const RunConfig& cfg, const std::function<void(const Frame&)>& sink);

struct StrategyStats {
  std::string strategy;
  std::size_t frames = 0;
  std::size_t failures = 0;
  double mean_error_px = 0.0;
  double median_error_px = 0.0;
  std::uint64_t frame_stream_hash = 0;
};

struct PairwiseTest {
  std::string a;
  std::string b;
  TTestResult result;
};

struct Report {
  std::vector<StrategyStats> strategies;  // config order
  std::vector<std::string> ranking;       // ascending mean error
  std::vector<double> thresholds;
  std::vector<std::vector<double>> cdf;  // [strategy][threshold]
  std::vector<PairwiseTest> tests;       // i < j in config order
  std::vector<ErrorSequence> errors;
  std::size_t dropped_frames = 0;
  double penalty_px = 0.0;
  double alpha = 0.01;
};

Report build_report(std::span<const StrategyRun> runs, double penalty_px, std::span<const double> thresholds,
                    double alpha);

/// Runs every configured strategy (in parallel, capped by cfg.threads and
/// LONGNAV_THREADS). Open loop additionally checks that all strategies saw
/// byte-identical frame streams and throws Error otherwise.
std::vector<StrategyRun> run_strategies(const RunConfig& cfg, const ProgressFn& progress = {});
std::vector<StrategyRun> run_strategies(const RunConfig& cfg, const std::function<std::unique_ptr<FrameSource>()>& open,
                                        const PathMap& path);

Report compare_strategies(const RunConfig& cfg, const ProgressFn& progress = {});

/// Worker count for n independent jobs.
std::size_t worker_count(std::size_t jobs, std::size_t requested);

}  // namespace longnav
