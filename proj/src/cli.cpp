#include "longnav/cli.hpp"

#include <iostream>
#include <mutex>
#include <optional>

#include "CLI11.hpp"
#include "longnav/error.hpp"
#include "longnav/evaluation.hpp"
#include "longnav/io.hpp"

namespace longnav {

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> strategies;
  std::string mode;
  std::optional<std::size_t> traversals;
  std::optional<double> interval_s;
  std::string dataset;
  std::string map;
  std::string logs;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "Run configuration (JSON)");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_flag("--quiet", o.quiet, "No progress output");
}

void add_schedule(CLI::App* cmd, Options& o) {
  cmd->add_option("--seed", o.seed, "World and run seed");
  cmd->add_option("--traversals", o.traversals, "Number of repeat traversals")->check(CLI::PositiveNumber);
  cmd->add_option("--interval-s", o.interval_s, "Seconds between traversals")->check(CLI::PositiveNumber);
}

RunConfig load_config(const Options& o) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : load_run_config(o.config);
  if (o.seed) {
    cfg.world.seed = *o.seed;
    cfg.run_seed = *o.seed;
  }
  if (o.traversals) cfg.schedule.traversals = *o.traversals;
  if (o.interval_s) cfg.schedule.interval_s = *o.interval_s;
  if (!o.mode.empty()) cfg.mode = parse_loop_mode(o.mode);
  if (!o.out.empty()) cfg.output_dir = o.out;
  if (!o.strategies.empty()) {
    // A named strategy keeps its tuned parameters from the config if present.
    std::vector<StrategyConfig> chosen;
    for (const std::string& name : o.strategies) {
      std::optional<StrategyConfig> found;
      for (const StrategyConfig& s : cfg.strategies)
        if (s.label() == name) found = s;
      if (!found) {
        found = StrategyConfig{};
        found->kind = parse_strategy_kind(name);
      }
      chosen.push_back(*found);
    }
    cfg.strategies = std::move(chosen);
  }
  if (cfg.strategies.empty())
    for (StrategyKind k : all_strategy_kinds()) {
      StrategyConfig s;
      s.kind = k;
      cfg.strategies.push_back(s);
    }
  cfg.registration.image_width = cfg.world.image_width;
  return cfg;
}

ProgressFn progress_printer(std::ostream& err, bool quiet, std::size_t total) {
  if (quiet) return {};
  auto mutex = std::make_shared<std::mutex>();
  return [&err, mutex, total](const std::string& strategy, int traversal) {
    if (traversal % 25 != 0 && static_cast<std::size_t>(traversal) != total) return;
    std::lock_guard lock(*mutex);
    err << strategy << ": traversal " << traversal << "/" << total << '\n';
  };
}

PathMap dataset_path_map(const Options& o, const RunConfig& cfg) {
  if (!o.map.empty()) return load_path_map(o.map);
  JsonlFrameSource src(o.dataset);
  std::vector<Frame> teach_frames;
  Frame f;
  while (src.next(f))
    if (f.traversal == 0) teach_frames.push_back(f);
  if (teach_frames.empty()) throw InvalidInput(o.dataset + ": no teach frames (traversal 0) and no --map given");
  std::sort(teach_frames.begin(), teach_frames.end(),
            [](const Frame& a, const Frame& b) { return a.location < b.location; });
  const double taught_at = teach_frames.front().time_s;
  return teach_from_frames(teach_frames, cfg.teach, cfg.world.image_width, taught_at);
}

void print_report(std::ostream& out, const Report& rep) {
  out << "strategy mean_error_px failures frames\n";
  for (const std::string& name : rep.ranking)
    for (const StrategyStats& s : rep.strategies)
      if (s.strategy == name) out << s.strategy << ' ' << s.mean_error_px << ' ' << s.failures << ' ' << s.frames << '\n';
  if (rep.dropped_frames) out << "dropped frames: " << rep.dropped_frames << '\n';
}

int cmd_generate(const Options& o, std::ostream& out, std::ostream&) {
  RunConfig cfg = load_config(o);
  cfg.validate();
  const fs::path dir = cfg.output_dir;
  World world = generate_world(cfg.world);
  save_path_map(dir / "map.json", teach(world, cfg.schedule.start_s, cfg.teach, cfg.run_seed));

  const fs::path dataset = dir / "dataset.jsonl";
  std::ofstream os(dataset, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + dataset.string() + "' for writing");
  std::size_t frames = 0;
  record_frames(cfg, [&](const Frame& f) {
    os << frame_to_jsonl(f) << '\n';
    ++frames;
  });
  os.flush();
  if (!os) throw IoError("failed writing '" + dataset.string() + "'");
  save_run_config(dir / "config.json", cfg);
  out << "wrote " << frames << " frames to " << dataset.string() << '\n';
  return kExitOk;
}

int cmd_replay(const Options& o, std::ostream& out, std::ostream&) {
  RunConfig cfg = load_config(o);
  for (const StrategyConfig& s : cfg.strategies) s.validate();
  cfg.registration.validate();
  const PathMap path = dataset_path_map(o, cfg);
  const std::string dataset = o.dataset;
  const auto runs = run_strategies(cfg, [&] { return std::make_unique<JsonlFrameSource>(dataset); }, path);
  const fs::path dir = cfg.output_dir;
  write_logs(dir / "logs.jsonl", runs);
  if (runs.size() == 1) save_path_map(dir / "map_final.json", runs.front().final_map);
  out << "wrote logs for " << runs.size() << " strategies to " << (dir / "logs.jsonl").string() << '\n';
  return kExitOk;
}

int cmd_simulate(Options o, std::ostream& out, std::ostream& err) {
  if (o.mode.empty()) o.mode = "closed";
  RunConfig cfg = load_config(o);
  const auto runs = run_strategies(cfg, progress_printer(err, o.quiet, cfg.schedule.traversals));
  const fs::path dir = cfg.output_dir;
  write_logs(dir / "logs.jsonl", runs);
  if (runs.size() == 1) save_path_map(dir / "map_final.json", runs.front().final_map);
  save_run_config(dir / "config.json", cfg);
  print_report(out, build_report(runs, cfg.penalty(cfg.world.image_width), cfg.thresholds(), cfg.alpha));
  return kExitOk;
}

int cmd_compare(const Options& o, std::ostream& out, std::ostream& err) {
  RunConfig cfg = load_config(o);
  std::vector<StrategyRun> runs;
  if (!o.dataset.empty()) {
    for (const StrategyConfig& s : cfg.strategies) s.validate();
    const PathMap path = dataset_path_map(o, cfg);
    const std::string dataset = o.dataset;
    runs = run_strategies(cfg, [&] { return std::make_unique<JsonlFrameSource>(dataset); }, path);
  } else {
    runs = run_strategies(cfg, progress_printer(err, o.quiet, cfg.schedule.traversals));
  }
  const double width = o.dataset.empty() ? cfg.world.image_width : runs.front().final_map.image_width;
  const Report rep = build_report(runs, cfg.penalty(width), cfg.thresholds(), cfg.alpha);
  const fs::path dir = cfg.output_dir;
  write_report(dir, rep);
  write_logs(dir / "logs.jsonl", runs);
  save_run_config(dir / "config.json", cfg);
  print_report(out, rep);
  return kExitOk;
}

int cmd_report(const Options& o, std::ostream& out, std::ostream&) {
  const RunConfig cfg = load_config(o);
  const auto runs = read_logs(o.logs);
  if (runs.empty()) throw InvalidInput(o.logs + ": no log records");
  const Report rep = build_report(runs, cfg.penalty(cfg.world.image_width), cfg.thresholds(), cfg.alpha);
  write_report(cfg.output_dir, rep);
  print_report(out, rep);
  return kExitOk;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Map-management strategies for long-term teach-and-repeat navigation", "longnav"};
  app.require_subcommand(1);
  Options o;

  auto* generate = app.add_subcommand("generate", "Generate a world, teach it and record a dataset");
  add_common(generate, o);
  add_schedule(generate, o);

  auto* replay_cmd = app.add_subcommand("replay", "Replay a dataset through one or more strategies");
  add_common(replay_cmd, o);
  replay_cmd->add_option("--dataset", o.dataset, "Dataset (JSON Lines)")->required();
  replay_cmd->add_option("--map", o.map, "Map snapshot to start from (default: teach frames)");
  replay_cmd->add_option("--strategy", o.strategies, "Strategy name (repeatable)")->required();

  auto* simulate = app.add_subcommand("simulate", "Closed-loop run in a synthetic world");
  add_common(simulate, o);
  add_schedule(simulate, o);
  simulate->add_option("--strategy", o.strategies, "Strategy name (repeatable)");
  simulate->add_option("--mode", o.mode, "open|closed")->check(CLI::IsMember({"open", "closed"}));

  auto* compare = app.add_subcommand("compare", "Compare strategies and write report files");
  add_common(compare, o);
  add_schedule(compare, o);
  compare->add_option("--strategy", o.strategies, "Strategy name (repeatable)");
  compare->add_option("--mode", o.mode, "open|closed")->check(CLI::IsMember({"open", "closed"}));
  compare->add_option("--dataset", o.dataset, "Compare on a recorded dataset instead of a world");
  compare->add_option("--map", o.map, "Map snapshot for --dataset");

  auto* report = app.add_subcommand("report", "Re-render report files from logs");
  add_common(report, o);
  report->add_option("--logs", o.logs, "Logs (JSON Lines)")->required();

  std::vector<const char*> argv{"longnav"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (generate->parsed()) return cmd_generate(o, out, err);
    if (replay_cmd->parsed()) return cmd_replay(o, out, err);
    if (simulate->parsed()) return cmd_simulate(o, out, err);
    if (compare->parsed()) return cmd_compare(o, out, err);
    if (report->parsed()) return cmd_report(o, out, err);
  } catch (const std::exception& e) {
    err << "longnav: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace longnav
