#include "longnav/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

#include "longnav/error.hpp"

namespace longnav {

std::vector<double> RunConfig::thresholds() const {
  if (!cdf_thresholds_px.empty()) return cdf_thresholds_px;
  std::vector<double> out(101);
  std::iota(out.begin(), out.end(), 0.0);
  return out;
}

void RunConfig::validate() const {
  world.validate();
  registration.validate();
  if (strategies.empty()) throw ConfigError("run config: no strategies");
  std::set<std::string> labels;
  for (const StrategyConfig& s : strategies) {
    s.validate();
    if (!labels.insert(s.label()).second) throw ConfigError("run config: duplicate strategy name '" + s.label() + "'");
  }
  if (schedule.traversals < 1) throw ConfigError("run config: schedule needs at least one traversal");
  if (!(schedule.interval_s > 0.0) || !std::isfinite(schedule.interval_s))
    throw ConfigError("run config: interval_s must be positive");
  if (!std::isfinite(schedule.start_s)) throw ConfigError("run config: start_s must be finite");
  if (!(teach.spacing_m > 0.0)) throw ConfigError("run config: teach spacing must be positive");
  if (teach.max_features < 1) throw ConfigError("run config: teach max_features must be >= 1");
  if (!(offsets.amplitude_m >= 0.0)) throw ConfigError("run config: offset amplitude must be >= 0");
  if (failure_penalty_px && !(*failure_penalty_px >= 0.0)) throw ConfigError("run config: negative failure penalty");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("run config: alpha outside (0, 1)");
  for (double th : cdf_thresholds_px)
    if (!std::isfinite(th)) throw ConfigError("run config: non-finite cdf threshold");
}

std::string_view to_string(LoopMode mode) { return mode == LoopMode::kOpen ? "open" : "closed"; }

LoopMode parse_loop_mode(std::string_view name) {
  if (name == "open" || name == "open_loop") return LoopMode::kOpen;
  if (name == "closed" || name == "closed_loop") return LoopMode::kClosed;
  throw ConfigError("unknown mode '" + std::string(name) + "' (expected open|closed)");
}

std::size_t ErrorSequence::failure_count() const {
  return static_cast<std::size_t>(std::count(failed.begin(), failed.end(), true));
}

double ErrorSequence::mean() const {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

ErrorSequence registration_errors(std::string strategy, std::span<const TraversalLog> logs, double penalty_px) {
  ErrorSequence out;
  out.strategy = std::move(strategy);
  for (const TraversalLog& log : logs) {
    for (const LocationRecord& r : log.records) {
      out.keys.push_back({r.traversal, r.location});
      if (r.delta_px) {
        out.values.push_back(std::fabs(*r.delta_px - r.gamma_px));
        out.failed.push_back(false);
      } else {
        out.values.push_back(penalty_px);
        out.failed.push_back(true);
      }
    }
  }
  return out;
}

std::vector<std::pair<double, double>> error_cdf(const ErrorSequence& eps, std::span<const double> thresholds) {
  return empirical_cdf(eps.values, thresholds);
}

TTestResult paired_t_test(const ErrorSequence& a, const ErrorSequence& b, double alpha) {
  if (a.keys != b.keys) throw InvalidInput("paired t-test: frame keys of '" + a.strategy + "' and '" + b.strategy + "' differ");
  return paired_t_test(std::span<const double>(a.values), std::span<const double>(b.values), alpha);
}

std::size_t align_sequences(std::span<ErrorSequence> sequences) {
  if (sequences.empty()) return 0;
  std::map<FrameKey, std::size_t> seen;
  for (const ErrorSequence& s : sequences) {
    std::set<FrameKey> unique(s.keys.begin(), s.keys.end());
    for (const FrameKey& k : unique) ++seen[k];
  }
  std::size_t dropped = 0;
  for (const auto& [k, n] : seen)
    if (n != sequences.size()) ++dropped;

  for (ErrorSequence& s : sequences) {
    std::map<FrameKey, std::size_t> first;
    for (std::size_t i = 0; i < s.keys.size(); ++i) first.emplace(s.keys[i], i);
    ErrorSequence aligned;
    aligned.strategy = s.strategy;
    for (const auto& [k, n] : seen) {
      if (n != sequences.size()) continue;
      const std::size_t i = first.at(k);
      aligned.keys.push_back(k);
      aligned.values.push_back(s.values[i]);
      aligned.failed.push_back(s.failed[i]);
    }
    s = std::move(aligned);
  }
  return dropped;
}

StrategyRun run_world(const RunConfig& cfg, const StrategyConfig& strategy, const ProgressFn& progress) {
  World world = generate_world(cfg.world);
  RegistrationConfig reg = cfg.registration;
  reg.image_width = cfg.world.image_width;
  Navigator nav(teach(world, cfg.schedule.start_s, cfg.teach, cfg.run_seed), strategy, reg);

  StrategyRun run;
  run.strategy = strategy.label();
  run.frame_stream_hash = 0xcbf29ce484222325ULL;
  auto hash = [&run](const Frame& f) { run.frame_stream_hash = frame_digest(f, run.frame_stream_hash); };

  TraverseState state;
  state.offset_m = cfg.initial_offset_m;
  run.logs.reserve(cfg.schedule.traversals);
  for (std::size_t k = 1; k <= cfg.schedule.traversals; ++k) {
    const int traversal = static_cast<int>(k);
    world.advance_turnover(traversal);
    run.logs.push_back(traverse(world, nav, traversal, cfg.schedule.time_at(traversal), cfg.mode, state, cfg.offsets,
                                cfg.run_seed, hash));
    if (progress) progress(run.strategy, traversal);
  }
  run.refused_alternatives = nav.refused_alternatives();
  run.final_map = nav.path();
  return run;
}

StrategyRun replay(FrameSource& source, const PathMap& path, const StrategyConfig& strategy,
                   const RegistrationConfig& registration) {
  RegistrationConfig reg = registration;
  reg.image_width = path.image_width;
  Navigator nav(path, strategy, reg);

  StrategyRun run;
  run.strategy = strategy.label();
  run.frame_stream_hash = 0xcbf29ce484222325ULL;
  source.rewind();
  Frame frame;
  while (source.next(frame)) {
    if (frame.traversal == 0) continue;
    run.frame_stream_hash = frame_digest(frame, run.frame_stream_hash);
    if (frame.location < 0 || static_cast<std::size_t>(frame.location) >= path.local_maps.size())
      throw InvalidInput("replay: frame location " + std::to_string(frame.location) + " has no local map");
    if (run.logs.empty() || run.logs.back().traversal != frame.traversal) {
      TraversalLog log;
      log.strategy = run.strategy;
      log.traversal = frame.traversal;
      log.time_s = frame.time_s;
      run.logs.push_back(std::move(log));
    }
    run.logs.back().records.push_back(nav.process(frame, static_cast<std::size_t>(frame.location)));
  }
  run.refused_alternatives = nav.refused_alternatives();
  run.final_map = nav.path();
  return run;
}

void record_frames(const RunConfig& cfg, const std::function<void(const Frame&)>& sink) {
  World world = generate_world(cfg.world);
  for (std::size_t loc = 0; loc < world.location_count(); ++loc) {
    Rng rng = frame_rng(cfg.run_seed, 0, loc);
    Frame f = observe(world, loc, cfg.schedule.start_s, 0.0, rng);
    sink(f);
  }
  for (std::size_t k = 1; k <= cfg.schedule.traversals; ++k) {
    const int traversal = static_cast<int>(k);
    world.advance_turnover(traversal);
    const double t = cfg.schedule.time_at(traversal);
    for (std::size_t loc = 0; loc < world.location_count(); ++loc) {
      Rng rng = frame_rng(cfg.run_seed, traversal, loc);
      Frame f = observe(world, loc, t, cfg.offsets.offset_at(cfg.run_seed, traversal, loc), rng);
      f.traversal = traversal;
      sink(f);
    }
  }
}

Report build_report(std::span<const StrategyRun> runs, double penalty_px, std::span<const double> thresholds,
                    double alpha) {
  Report rep;
  rep.penalty_px = penalty_px;
  rep.alpha = alpha;
  rep.thresholds.assign(thresholds.begin(), thresholds.end());
  for (const StrategyRun& run : runs) rep.errors.push_back(registration_errors(run.strategy, run.logs, penalty_px));
  rep.dropped_frames = align_sequences(rep.errors);

  for (std::size_t i = 0; i < runs.size(); ++i) {
    const ErrorSequence& e = rep.errors[i];
    StrategyStats st;
    st.strategy = e.strategy;
    st.frames = e.size();
    st.failures = e.failure_count();
    st.mean_error_px = e.mean();
    if (!e.values.empty()) {
      std::vector<double> v = e.values;
      const std::size_t mid = v.size() / 2;
      std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
      st.median_error_px = v[mid];
      if (v.size() % 2 == 0) {
        const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
        st.median_error_px = 0.5 * (st.median_error_px + lo);
      }
    }
    st.frame_stream_hash = runs[i].frame_stream_hash;
    rep.strategies.push_back(st);

    std::vector<double> row;
    if (!e.values.empty())
      for (const auto& [th, p] : error_cdf(e, thresholds)) row.push_back(p);
    rep.cdf.push_back(std::move(row));
  }

  std::vector<std::size_t> order(rep.strategies.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return rep.strategies[a].mean_error_px < rep.strategies[b].mean_error_px;
  });
  for (std::size_t i : order) rep.ranking.push_back(rep.strategies[i].strategy);

  for (std::size_t i = 0; i < rep.errors.size(); ++i)
    for (std::size_t j = i + 1; j < rep.errors.size(); ++j)
      if (rep.errors[i].size() >= 2)
        rep.tests.push_back({rep.errors[i].strategy, rep.errors[j].strategy,
                             paired_t_test(rep.errors[i], rep.errors[j], alpha)});
  return rep;
}

std::size_t worker_count(std::size_t jobs, std::size_t requested) {
  std::size_t n = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("LONGNAV_THREADS")) {
    char* end = nullptr;
    const unsigned long cap = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && cap > 0) n = std::min<std::size_t>(n, cap);
  }
  return std::max<std::size_t>(1, std::min(n, jobs));
}

namespace {

template <typename Job>
std::vector<StrategyRun> run_parallel(std::size_t jobs, std::size_t requested, Job job) {
  std::vector<StrategyRun> out(jobs);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs; i = next++) {
      try {
        out[i] = job(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const std::size_t n = worker_count(jobs, requested);
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
  return out;
}

void check_identical_streams(const std::vector<StrategyRun>& runs) {
  for (const StrategyRun& r : runs)
    if (r.frame_stream_hash != runs.front().frame_stream_hash)
      throw Error("open-loop frame stream of '" + r.strategy + "' differs from '" + runs.front().strategy + "'");
}

}  // namespace

std::vector<StrategyRun> run_strategies(const RunConfig& cfg, const ProgressFn& progress) {
  cfg.validate();
  auto runs = run_parallel(cfg.strategies.size(), cfg.threads,
                           [&](std::size_t i) { return run_world(cfg, cfg.strategies[i], progress); });
  if (cfg.mode == LoopMode::kOpen) check_identical_streams(runs);
  return runs;
}

std::vector<StrategyRun> run_strategies(const RunConfig& cfg, const std::function<std::unique_ptr<FrameSource>()>& open,
                                        const PathMap& path) {
  if (cfg.strategies.empty()) throw ConfigError("run config: no strategies");
  for (const StrategyConfig& s : cfg.strategies) s.validate();
  auto runs = run_parallel(cfg.strategies.size(), cfg.threads, [&](std::size_t i) {
    std::unique_ptr<FrameSource> source = open();
    return replay(*source, path, cfg.strategies[i], cfg.registration);
  });
  check_identical_streams(runs);
  return runs;
}

Report compare_strategies(const RunConfig& cfg, const ProgressFn& progress) {
  const std::vector<StrategyRun> runs = run_strategies(cfg, progress);
  const std::vector<double> th = cfg.thresholds();
  return build_report(runs, cfg.penalty(cfg.world.image_width), th, cfg.alpha);
}

}  // namespace longnav
