#include "longnav/evaluation.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <random>

#include "longnav/error.hpp"

using namespace longnav;

namespace {

TraversalLog log_of(int traversal, std::vector<std::optional<double>> deltas, std::vector<double> gammas) {
  TraversalLog log;
  log.traversal = traversal;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    LocationRecord r;
    r.traversal = traversal;
    r.location = static_cast<int>(i);
    r.delta_px = deltas[i];
    r.gamma_px = gammas[i];
    log.records.push_back(r);
  }
  return log;
}

ErrorSequence sequence(std::string name, std::vector<FrameKey> keys) {
  ErrorSequence s;
  s.strategy = std::move(name);
  for (const FrameKey& k : keys) {
    s.keys.push_back(k);
    s.values.push_back(k.traversal * 10.0 + k.location);
    s.failed.push_back(false);
  }
  return s;
}

RunConfig small_config(std::vector<StrategyKind> kinds) {
  RunConfig cfg;
  cfg.world.n_locations = 4;
  cfg.world.landmarks_per_location = 150;
  cfg.world.turnover_prob = 0.02;
  cfg.teach.max_features = 100;
  cfg.schedule.traversals = 6;
  cfg.schedule.interval_s = 5 * 3600.0;
  cfg.threads = 2;
  for (StrategyKind k : kinds) {
    StrategyConfig s;
    s.kind = k;
    s.active_features = 100;
    cfg.strategies.push_back(s);
  }
  return cfg;
}

class VectorSource : public FrameSource {
 public:
  explicit VectorSource(const std::vector<Frame>& frames) : frames_(frames) {}
  void rewind() override { pos_ = 0; }
  bool next(Frame& f) override {
    if (pos_ == frames_.size()) return false;
    f = frames_[pos_++];
    return true;
  }

 private:
  const std::vector<Frame>& frames_;
  std::size_t pos_ = 0;
};

}  // namespace

TEST(RegistrationErrors, Examples) {
  const std::vector<TraversalLog> exact = {log_of(1, {3.0, -2.0}, {3.0, -2.0})};
  for (double v : registration_errors("s", exact, 320).values) EXPECT_EQ(v, 0.0);

  const std::vector<TraversalLog> logs = {log_of(1, {5.0, -3.0}, {0.0, 0.0})};
  const ErrorSequence e = registration_errors("s", logs, 320);
  EXPECT_EQ(e.values, (std::vector<double>{5.0, 3.0}));
  EXPECT_EQ(e.keys[1], (FrameKey{1, 1}));
  EXPECT_EQ(e.failure_count(), 0u);
  EXPECT_EQ(e.mean(), 4.0);
}

TEST(RegistrationErrors, FailuresGetThePenalty) {
  std::mt19937_64 rng(1);
  std::vector<TraversalLog> logs;
  std::size_t failures = 0;
  for (int t = 1; t <= 5; ++t) {
    std::vector<std::optional<double>> d;
    std::vector<double> g;
    for (int i = 0; i < 10; ++i) {
      if (rng() % 3 == 0) {
        d.push_back(std::nullopt);
        ++failures;
      } else {
        d.push_back(static_cast<double>(rng() % 20));
      }
      g.push_back(0.0);
    }
    logs.push_back(log_of(t, d, g));
  }
  const ErrorSequence e = registration_errors("s", logs, 320);
  ASSERT_EQ(e.size(), 50u);
  EXPECT_EQ(e.failure_count(), failures);
  for (std::size_t i = 0; i < e.size(); ++i)
    if (e.failed[i]) {
      EXPECT_EQ(e.values[i], 320.0);
    }
}

TEST(ErrorCdf, RequiresValues) {
  const std::vector<double> th = {1.0};
  EXPECT_THROW(error_cdf(ErrorSequence{}, th), InvalidInput);
}

TEST(ErrorTTest, KeysMustAgree) {
  ErrorSequence a = sequence("a", {{1, 0}, {1, 1}, {1, 2}});
  ErrorSequence b = sequence("b", {{1, 0}, {1, 1}, {1, 3}});
  EXPECT_THROW(paired_t_test(a, b, 0.01), InvalidInput);
  const TTestResult same = paired_t_test(a, a, 0.01);
  EXPECT_EQ(same.t, 0.0);
  EXPECT_EQ(same.p_value, 1.0);
}

TEST(Alignment, DropsFramesMissingAnywhere) {
  std::vector<ErrorSequence> seqs = {sequence("a", {{1, 0}, {1, 1}, {1, 2}, {2, 0}}),
                                     sequence("b", {{2, 0}, {1, 0}, {1, 2}}),
                                     sequence("c", {{1, 0}, {1, 2}, {2, 0}, {3, 0}})};
  EXPECT_EQ(align_sequences(seqs), 2u);
  const std::vector<FrameKey> expected = {{1, 0}, {1, 2}, {2, 0}};
  for (const auto& s : seqs) {
    EXPECT_EQ(s.keys, expected);
    EXPECT_EQ(s.values, (std::vector<double>{10.0, 12.0, 20.0}));
  }
}

TEST(Report, SingleStrategy) {
  const RunConfig cfg = small_config({StrategyKind::kStatic});
  const Report rep = compare_strategies(cfg);
  ASSERT_EQ(rep.strategies.size(), 1u);
  EXPECT_TRUE(rep.tests.empty());
  EXPECT_EQ(rep.ranking, (std::vector<std::string>{"static"}));
  EXPECT_EQ(rep.strategies[0].frames, 24u);
  EXPECT_EQ(rep.dropped_frames, 0u);
  EXPECT_EQ(rep.penalty_px, 320.0);
  ASSERT_EQ(rep.cdf[0].size(), 101u);
  EXPECT_TRUE(std::is_sorted(rep.cdf[0].begin(), rep.cdf[0].end()));
}

TEST(Report, IdenticalStrategiesGiveZeroT) {
  RunConfig cfg = small_config({StrategyKind::kStatic, StrategyKind::kStatic});
  cfg.strategies[1].name = "static2";
  const Report rep = compare_strategies(cfg);
  ASSERT_EQ(rep.tests.size(), 1u);
  EXPECT_EQ(rep.errors[0].values, rep.errors[1].values);
  EXPECT_EQ(rep.tests[0].result.t, 0.0);
  EXPECT_EQ(rep.tests[0].result.p_value, 1.0);
  EXPECT_EQ(rep.strategies[0].frame_stream_hash, rep.strategies[1].frame_stream_hash);
}

TEST(Report, AllStrategiesShareTheOpenLoopStream) {
  std::vector<StrategyKind> all(all_strategy_kinds().begin(), all_strategy_kinds().end());
  const RunConfig cfg = small_config(all);
  const auto runs = run_strategies(cfg);
  ASSERT_EQ(runs.size(), 8u);
  for (const auto& r : runs) EXPECT_EQ(r.frame_stream_hash, runs[0].frame_stream_hash) << r.strategy;
  const Report rep = build_report(runs, 320, cfg.thresholds(), 0.01);
  EXPECT_EQ(rep.tests.size(), 28u);
  EXPECT_EQ(rep.ranking.size(), 8u);
  for (std::size_t i = 1; i < rep.ranking.size(); ++i) {
    auto mean_of = [&](const std::string& s) {
      for (const auto& st : rep.strategies)
        if (st.strategy == s) return st.mean_error_px;
      return -1.0;
    };
    EXPECT_LE(mean_of(rep.ranking[i - 1]), mean_of(rep.ranking[i]));
  }
}

TEST(Report, RunsAreReproducible) {
  RunConfig cfg = small_config({StrategyKind::kScoreBased, StrategyKind::kLatest});
  cfg.mode = LoopMode::kClosed;
  cfg.initial_offset_m = 0.05;
  const auto a = run_strategies(cfg), b = run_strategies(cfg);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].frame_stream_hash, b[i].frame_stream_hash);
    const auto ea = registration_errors(a[i].strategy, a[i].logs, 320);
    const auto eb = registration_errors(b[i].strategy, b[i].logs, 320);
    EXPECT_EQ(ea.values, eb.values);
  }
}

TEST(Replay, RecordedFramesReproduceTheOpenLoopRun) {
  const RunConfig cfg = small_config({StrategyKind::kFremen, StrategyKind::kSummary});
  std::vector<Frame> frames;
  record_frames(cfg, [&](const Frame& f) { frames.push_back(f); });
  ASSERT_EQ(frames.size(), 4u * 7u);

  std::vector<Frame> taught(frames.begin(), frames.begin() + 4);
  const PathMap path = teach_from_frames(taught, cfg.teach, cfg.world.image_width, cfg.schedule.start_s);
  const auto direct = run_strategies(cfg);
  const auto replayed =
      run_strategies(cfg, [&] { return std::make_unique<VectorSource>(frames); }, path);
  for (std::size_t i = 0; i < direct.size(); ++i) {
    EXPECT_EQ(direct[i].frame_stream_hash, replayed[i].frame_stream_hash);
    const auto a = registration_errors(direct[i].strategy, direct[i].logs, 320);
    const auto b = registration_errors(replayed[i].strategy, replayed[i].logs, 320);
    EXPECT_EQ(a.keys, b.keys);
    EXPECT_EQ(a.values, b.values);
  }
}

TEST(Replay, UnknownLocationIsAnError) {
  const RunConfig cfg = small_config({StrategyKind::kStatic});
  std::vector<Frame> frames;
  record_frames(cfg, [&](const Frame& f) { frames.push_back(f); });
  std::vector<Frame> taught(frames.begin(), frames.begin() + 4);
  const PathMap path = teach_from_frames(taught, cfg.teach, 640, 0);
  frames.back().location = 9;
  VectorSource src(frames);
  EXPECT_THROW(replay(src, path, cfg.strategies[0], cfg.registration), InvalidInput);
}

TEST(RunConfig, Validation) {
  RunConfig cfg = small_config({StrategyKind::kStatic});
  EXPECT_NO_THROW(cfg.validate());
  cfg.strategies.push_back(cfg.strategies[0]);
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = small_config({});
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = small_config({StrategyKind::kStatic});
  cfg.schedule.traversals = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = small_config({StrategyKind::kStatic});
  cfg.alpha = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_EQ(parse_loop_mode("closed_loop"), LoopMode::kClosed);
  EXPECT_THROW(parse_loop_mode("sideways"), ConfigError);
  EXPECT_EQ(RunConfig{}.thresholds().back(), 100.0);
}

TEST(Workers, CountIsCapped) {
  ::setenv("LONGNAV_THREADS", "2", 1);
  EXPECT_EQ(worker_count(3, 8), 2u);
  EXPECT_EQ(worker_count(5, 1), 1u);
  EXPECT_EQ(worker_count(0, 4), 1u);
  ::setenv("LONGNAV_THREADS", "junk", 1);
  EXPECT_EQ(worker_count(3, 8), 3u);
  ::setenv("LONGNAV_THREADS", "2", 1);
}
