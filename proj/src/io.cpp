#include "longnav/io.hpp"

#include <cmath>
#include <complex>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "longnav/error.hpp"

namespace longnav {

using nlohmann::json;

namespace {

// Reads optional fields from a JSON object and rejects keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string context) : j_(j), context_(std::move(context)) {
    if (!j_.is_object()) throw ConfigError(context_ + ": expected an object");
  }

  template <typename T>
  bool get(const char* key, T& out) {
    const auto it = j_.find(key);
    if (it == j_.end()) return false;
    used_.insert(key);
    try {
      out = it->get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(context_ + "." + key + ": " + e.what());
    }
    return true;
  }

  template <typename T>
  bool get(const char* key, std::optional<T>& out) {
    const auto it = j_.find(key);
    if (it == j_.end()) return false;
    used_.insert(key);
    if (it->is_null()) {
      out.reset();
      return true;
    }
    T v{};
    get(key, v);
    out = v;
    return true;
  }

  const json* child(const char* key) {
    const auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    used_.insert(key);
    return &*it;
  }

  void finish() const {
    for (const auto& item : j_.items())
      if (!used_.count(item.key())) throw ConfigError(context_ + ": unknown key '" + item.key() + "'");
  }

 private:
  const json& j_;
  std::string context_;
  std::set<std::string> used_;
};

json range_json(const UniformRange& r) { return json::array({r.min, r.max}); }

void read_range(ObjectReader& r, const char* key, UniformRange& out) {
  std::vector<double> v;
  if (!r.get(key, v)) return;
  if (v.size() != 2) throw ConfigError(std::string("world.") + key + ": expected [min, max]");
  out = {v[0], v[1]};
}

json world_json(const WorldConfig& w) {
  return {
      {"n_locations", w.n_locations},
      {"landmarks_per_location", w.landmarks_per_location},
      {"image_width", w.image_width},
      {"image_height", w.image_height},
      {"descriptor_width", w.descriptor_width},
      {"day_period_s", w.day_period_s},
      {"visibility_mean", range_json(w.visibility_mean)},
      {"visibility_amplitude", range_json(w.visibility_amplitude)},
      {"night_fraction", w.night_fraction},
      {"phase_jitter_rad", w.phase_jitter_rad},
      {"bit_flip_prob", w.bit_flip_prob},
      {"night_bit_flip_prob", w.night_bit_flip_prob},
      {"position_jitter_px", w.position_jitter_px},
      {"turnover_prob", w.turnover_prob},
      {"clutter_count", w.clutter_count},
      {"clutter_alias_fraction", w.clutter_alias_fraction},
      {"clutter_alias_bits", w.clutter_alias_bits},
      {"px_per_m", w.px_per_m},
      {"steering_gain", w.steering_gain},
      {"odometry_noise_m", w.odometry_noise_m},
      {"seed", w.seed},
  };
}

WorldConfig world_from_json(const json& j) {
  WorldConfig w;
  ObjectReader r(j, "world");
  r.get("n_locations", w.n_locations);
  r.get("landmarks_per_location", w.landmarks_per_location);
  r.get("image_width", w.image_width);
  r.get("image_height", w.image_height);
  r.get("descriptor_width", w.descriptor_width);
  r.get("day_period_s", w.day_period_s);
  read_range(r, "visibility_mean", w.visibility_mean);
  read_range(r, "visibility_amplitude", w.visibility_amplitude);
  r.get("night_fraction", w.night_fraction);
  r.get("phase_jitter_rad", w.phase_jitter_rad);
  r.get("bit_flip_prob", w.bit_flip_prob);
  r.get("night_bit_flip_prob", w.night_bit_flip_prob);
  r.get("position_jitter_px", w.position_jitter_px);
  r.get("turnover_prob", w.turnover_prob);
  r.get("clutter_count", w.clutter_count);
  r.get("clutter_alias_fraction", w.clutter_alias_fraction);
  r.get("clutter_alias_bits", w.clutter_alias_bits);
  r.get("px_per_m", w.px_per_m);
  r.get("steering_gain", w.steering_gain);
  r.get("odometry_noise_m", w.odometry_noise_m);
  r.get("seed", w.seed);
  r.finish();
  return w;
}

json registration_json(const RegistrationConfig& c) {
  json j = {{"bin_width", c.bin_width}, {"min_votes", c.min_votes}};
  j["max_distance"] = c.max_distance ? json(*c.max_distance) : json(nullptr);
  j["tolerance"] = c.tolerance ? json(*c.tolerance) : json(nullptr);
  return j;
}

RegistrationConfig registration_from_json(const json& j) {
  RegistrationConfig c;
  ObjectReader r(j, "registration");
  r.get("bin_width", c.bin_width);
  r.get("max_distance", c.max_distance);
  r.get("min_votes", c.min_votes);
  r.get("tolerance", c.tolerance);
  r.finish();
  return c;
}

json feature_json(const Feature& f) {
  json j = {{"x", f.x}, {"y", f.y}, {"d", f.descriptor.to_hex()}, {"score", f.score}, {"inserted_at", f.inserted_at}};
  if (f.temporal) {
    const FremenModel& m = *f.temporal;
    json comps = json::array();
    const auto periods = m.periods();
    const auto spectrum = m.spectrum();
    for (std::size_t i = 0; i < periods.size(); ++i)
      comps.push_back(json::array({periods[i], spectrum[i].real(), spectrum[i].imag()}));
    j["fremen"] = {{"n_obs", m.observations()}, {"mu", m.mean_score()}, {"components", comps}};
  }
  return j;
}

// Snapshots written from one run share a handful of period sets; restore the sharing.
class PeriodCache {
 public:
  PeriodSet get(std::vector<double> periods) {
    if (periods == *default_) return default_;
    for (const PeriodSet& p : seen_)
      if (*p == periods) return p;
    seen_.push_back(std::make_shared<const std::vector<double>>(std::move(periods)));
    return seen_.back();
  }

 private:
  PeriodSet default_ = default_fremen_periods();
  std::vector<PeriodSet> seen_;
};

Descriptor descriptor_from_json(const json& d, const char* context) {
  if (!d.is_string()) throw InvalidInput(std::string(context) + ": descriptor must be a hex string");
  try {
    return Descriptor::from_hex(d.get_ref<const std::string&>());
  } catch (const InvalidInput& e) {
    throw InvalidInput(std::string(context) + ": " + e.what());
  }
}

Feature feature_from_json(const json& j, PeriodCache& cache) {
  if (!j.is_object()) throw InvalidInput("map snapshot: feature must be an object");
  Feature f;
  try {
    f.x = j.at("x").get<double>();
    f.y = j.at("y").get<double>();
    f.score = j.value("score", 0.0);
    f.inserted_at = j.value("inserted_at", 0);
    f.descriptor = descriptor_from_json(j.at("d"), "map snapshot");
    if (const auto it = j.find("fremen"); it != j.end() && !it->is_null()) {
      std::vector<double> periods;
      std::vector<std::complex<double>> spectrum;
      for (const json& c : it->at("components")) {
        if (!c.is_array() || c.size() != 3) throw InvalidInput("map snapshot: fremen component must be [period_s, re, im]");
        periods.push_back(c[0].get<double>());
        spectrum.emplace_back(c[1].get<double>(), c[2].get<double>());
      }
      f.temporal = FremenModel::restore(it->at("n_obs").get<std::size_t>(), it->at("mu").get<double>(),
                                        cache.get(std::move(periods)), std::move(spectrum));
    }
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("map snapshot: ") + e.what());
  }
  return f;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

void finish_write(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

json parse_file(const fs::path& path) {
  std::ifstream in = open_in(path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  }
}

json finite_or_string(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

}  // namespace

json to_json(const StrategyConfig& c) {
  json j = {
      {"kind", std::string(to_string(c.kind))},
      {"s_c", c.s_c},
      {"s_i", c.s_i},
      {"s_n", c.s_n},
      {"exchange_fraction", c.exchange_fraction},
      {"active_features", c.active_features},
      {"summary_add_fraction", c.summary_add_fraction},
      {"multiple_threshold", c.multiple_threshold},
      {"multiple_max_alternatives", c.multiple_max_alternatives},
      {"fremen_order", c.fremen_order},
  };
  if (!c.name.empty()) j["name"] = c.name;
  if (c.fremen_periods) j["fremen_periods"] = *c.fremen_periods;
  return j;
}

StrategyConfig strategy_config_from_json(const json& j) {
  StrategyConfig c;
  if (j.is_string()) {
    c.kind = parse_strategy_kind(j.get<std::string>());
    return c;
  }
  ObjectReader r(j, "strategy");
  std::string kind;
  if (!r.get("kind", kind)) throw ConfigError("strategy: missing 'kind'");
  c.kind = parse_strategy_kind(kind);
  r.get("name", c.name);
  r.get("s_c", c.s_c);
  r.get("s_i", c.s_i);
  r.get("s_n", c.s_n);
  r.get("exchange_fraction", c.exchange_fraction);
  r.get("active_features", c.active_features);
  r.get("summary_add_fraction", c.summary_add_fraction);
  r.get("multiple_threshold", c.multiple_threshold);
  r.get("multiple_max_alternatives", c.multiple_max_alternatives);
  r.get("fremen_order", c.fremen_order);
  std::vector<double> periods;
  if (r.get("fremen_periods", periods)) c.fremen_periods = std::make_shared<const std::vector<double>>(std::move(periods));
  r.finish();
  return c;
}

json to_json(const RunConfig& cfg) {
  json strategies = json::array();
  for (const StrategyConfig& s : cfg.strategies) strategies.push_back(to_json(s));
  json j = {
      {"world", world_json(cfg.world)},
      {"teach", {{"spacing_m", cfg.teach.spacing_m}, {"max_features", cfg.teach.max_features}}},
      {"registration", registration_json(cfg.registration)},
      {"strategies", strategies},
      {"schedule",
       {{"traversals", cfg.schedule.traversals},
        {"interval_s", cfg.schedule.interval_s},
        {"start_s", cfg.schedule.start_s}}},
      {"mode", std::string(to_string(cfg.mode))},
      {"offsets", {{"amplitude_m", cfg.offsets.amplitude_m}, {"per_location", cfg.offsets.per_location}}},
      {"initial_offset_m", cfg.initial_offset_m},
      {"run_seed", cfg.run_seed},
      {"alpha", cfg.alpha},
      {"cdf_thresholds_px", cfg.cdf_thresholds_px},
      {"output_dir", cfg.output_dir},
      {"threads", cfg.threads},
  };
  j["failure_penalty_px"] = cfg.failure_penalty_px ? json(*cfg.failure_penalty_px) : json(nullptr);
  return j;
}

RunConfig run_config_from_json(const json& j) {
  RunConfig cfg;
  ObjectReader r(j, "config");
  if (const json* w = r.child("world")) cfg.world = world_from_json(*w);
  if (const json* t = r.child("teach")) {
    ObjectReader tr(*t, "teach");
    tr.get("spacing_m", cfg.teach.spacing_m);
    tr.get("max_features", cfg.teach.max_features);
    tr.finish();
  }
  if (const json* g = r.child("registration")) cfg.registration = registration_from_json(*g);
  if (const json* s = r.child("strategies")) {
    if (!s->is_array()) throw ConfigError("strategies: expected an array");
    for (const json& item : *s) cfg.strategies.push_back(strategy_config_from_json(item));
  }
  if (const json* s = r.child("schedule")) {
    ObjectReader sr(*s, "schedule");
    sr.get("traversals", cfg.schedule.traversals);
    sr.get("interval_s", cfg.schedule.interval_s);
    sr.get("start_s", cfg.schedule.start_s);
    sr.finish();
  }
  std::string mode;
  if (r.get("mode", mode)) cfg.mode = parse_loop_mode(mode);
  if (const json* o = r.child("offsets")) {
    ObjectReader orr(*o, "offsets");
    orr.get("amplitude_m", cfg.offsets.amplitude_m);
    orr.get("per_location", cfg.offsets.per_location);
    orr.finish();
  }
  r.get("initial_offset_m", cfg.initial_offset_m);
  r.get("run_seed", cfg.run_seed);
  r.get("failure_penalty_px", cfg.failure_penalty_px);
  r.get("alpha", cfg.alpha);
  r.get("cdf_thresholds_px", cfg.cdf_thresholds_px);
  r.get("output_dir", cfg.output_dir);
  r.get("threads", cfg.threads);
  r.finish();
  cfg.registration.image_width = cfg.world.image_width;
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  const json j = parse_file(path);
  return run_config_from_json(j);
}

void save_run_config(const fs::path& path, const RunConfig& cfg) {
  std::ofstream out = open_out(path);
  out << std::setw(2) << to_json(cfg) << '\n';
  finish_write(out, path);
}

std::string frame_to_jsonl(const Frame& frame) {
  json features = json::array();
  for (const Feature& f : frame.features) features.push_back({{"x", f.x}, {"y", f.y}, {"d", f.descriptor.to_hex()}});
  const json j = {{"traversal", frame.traversal},
                  {"location", frame.location},
                  {"time_s", frame.time_s},
                  {"gamma_px", frame.gamma_px},
                  {"features", std::move(features)}};
  return j.dump();
}

Frame frame_from_json(const json& j) {
  if (!j.is_object()) throw InvalidInput("dataset record must be an object");
  Frame f;
  try {
    f.traversal = j.at("traversal").get<int>();
    f.location = j.at("location").get<int>();
    f.time_s = j.at("time_s").get<double>();
    f.gamma_px = j.at("gamma_px").get<double>();
    const json& feats = j.at("features");
    if (!feats.is_array()) throw InvalidInput("dataset record: 'features' must be an array");
    f.features.reserve(feats.size());
    for (const json& fj : feats) {
      Feature feat;
      feat.x = fj.at("x").get<double>();
      feat.y = fj.at("y").get<double>();
      feat.descriptor = descriptor_from_json(fj.at("d"), "dataset record");
      f.features.push_back(std::move(feat));
    }
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("dataset record: ") + e.what());
  }
  if (f.location < 0) throw InvalidInput("dataset record: negative location");
  if (f.traversal < 0) throw InvalidInput("dataset record: negative traversal");
  return f;
}

void write_dataset(const fs::path& path, const std::vector<Frame>& frames) {
  std::ofstream out = open_out(path);
  for (const Frame& f : frames) out << frame_to_jsonl(f) << '\n';
  finish_write(out, path);
}

std::vector<Frame> read_dataset(const fs::path& path) {
  JsonlFrameSource src(path);
  std::vector<Frame> out;
  Frame f;
  while (src.next(f)) out.push_back(std::move(f));
  return out;
}

JsonlFrameSource::JsonlFrameSource(fs::path path) : path_(std::move(path)) { rewind(); }

void JsonlFrameSource::rewind() {
  in_ = open_in(path_);
  line_ = 0;
}

bool JsonlFrameSource::next(Frame& frame) {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      frame = frame_from_json(json::parse(line));
    } catch (const json::parse_error& e) {
      throw InvalidInput(path_.string() + ":" + std::to_string(line_) + ": " + e.what());
    } catch (const InvalidInput& e) {
      throw InvalidInput(path_.string() + ":" + std::to_string(line_) + ": " + e.what());
    }
    return true;
  }
  if (in_.bad()) throw IoError("failed reading '" + path_.string() + "'");
  return false;
}

json to_json(const PathMap& path) {
  json maps = json::array();
  for (const LocalMap& m : path.local_maps) {
    json feats = json::array();
    for (const Feature& f : m.features) feats.push_back(feature_json(f));
    json alts = json::array();
    for (const Experience& e : m.alternatives) {
      json ef = json::array();
      for (const Feature& f : e.features) ef.push_back(feature_json(f));
      alts.push_back({{"created_at", e.created_at}, {"features", ef}});
    }
    maps.push_back(
        {{"index", m.index}, {"odometry_distance", m.odometry_distance}, {"features", feats}, {"alternatives", alts}});
  }
  return {{"image_width", path.image_width},
          {"descriptor_width", path.descriptor_width},
          {"taught_at", path.taught_at},
          {"local_maps", maps}};
}

PathMap path_map_from_json(const json& j) {
  PathMap path;
  PeriodCache cache;
  try {
    path.image_width = j.at("image_width").get<double>();
    path.descriptor_width = j.at("descriptor_width").get<std::size_t>();
    path.taught_at = j.value("taught_at", 0.0);
    for (const json& mj : j.at("local_maps")) {
      LocalMap m;
      m.index = mj.at("index").get<std::size_t>();
      m.odometry_distance = mj.at("odometry_distance").get<double>();
      for (const json& fj : mj.at("features")) m.features.push_back(feature_from_json(fj, cache));
      if (const auto it = mj.find("alternatives"); it != mj.end()) {
        for (const json& ej : *it) {
          Experience e;
          e.created_at = ej.at("created_at").get<int>();
          for (const json& fj : ej.at("features")) e.features.push_back(feature_from_json(fj, cache));
          m.alternatives.push_back(std::move(e));
        }
      }
      path.local_maps.push_back(std::move(m));
    }
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("map snapshot: ") + e.what());
  }
  path.validate();
  return path;
}

void save_path_map(const fs::path& file, const PathMap& path) {
  std::ofstream out = open_out(file);
  out << to_json(path).dump() << '\n';
  finish_write(out, file);
}

PathMap load_path_map(const fs::path& file) { return path_map_from_json(parse_file(file)); }

void write_logs(std::ostream& out, const StrategyRun& run) {
  for (const TraversalLog& log : run.logs) {
    for (const LocationRecord& r : log.records) {
      json j = {{"strategy", run.strategy},
                {"traversal", r.traversal},
                {"location", r.location},
                {"time_s", r.time_s},
                {"gamma_px", r.gamma_px},
                {"not_matched", r.not_matched},
                {"correct", r.correct},
                {"incorrect", r.incorrect},
                {"active", r.active_count},
                {"map_size", r.map_size},
                {"experiences", r.experiences},
                {"experience_used", r.experience_used},
                {"offset_m", r.offset_m}};
      j["delta_px"] = r.delta_px ? json(*r.delta_px) : json(nullptr);
      out << j.dump() << '\n';
    }
  }
}

void write_logs(const fs::path& file, std::span<const StrategyRun> runs) {
  std::ofstream out = open_out(file);
  for (const StrategyRun& run : runs) write_logs(out, run);
  finish_write(out, file);
}

std::vector<StrategyRun> read_logs(const fs::path& file) {
  std::ifstream in = open_in(file);
  std::vector<StrategyRun> runs;
  std::map<std::string, std::size_t> by_name;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      const std::string name = j.at("strategy").get<std::string>();
      auto [it, fresh] = by_name.emplace(name, runs.size());
      if (fresh) {
        runs.emplace_back();
        runs.back().strategy = name;
      }
      StrategyRun& run = runs[it->second];
      LocationRecord r;
      r.traversal = j.at("traversal").get<int>();
      r.location = j.at("location").get<int>();
      r.time_s = j.at("time_s").get<double>();
      r.gamma_px = j.at("gamma_px").get<double>();
      if (!j.at("delta_px").is_null()) r.delta_px = j.at("delta_px").get<double>();
      r.not_matched = j.value("not_matched", std::size_t{0});
      r.correct = j.value("correct", std::size_t{0});
      r.incorrect = j.value("incorrect", std::size_t{0});
      r.active_count = j.value("active", std::size_t{0});
      r.map_size = j.value("map_size", std::size_t{0});
      r.experiences = j.value("experiences", std::size_t{1});
      r.experience_used = j.value("experience_used", std::size_t{0});
      r.offset_m = j.value("offset_m", 0.0);
      if (run.logs.empty() || run.logs.back().traversal != r.traversal) {
        TraversalLog log;
        log.strategy = name;
        log.traversal = r.traversal;
        log.time_s = r.time_s;
        run.logs.push_back(std::move(log));
      }
      run.logs.back().records.push_back(r);
    } catch (const json::exception& e) {
      throw InvalidInput(file.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (in.bad()) throw IoError("failed reading '" + file.string() + "'");
  return runs;
}

json summary_json(const Report& report) {
  json strategies = json::array();
  for (const StrategyStats& s : report.strategies) {
    std::ostringstream hash;
    hash << std::hex << std::setw(16) << std::setfill('0') << s.frame_stream_hash;
    strategies.push_back({{"name", s.strategy},
                          {"frames", s.frames},
                          {"failures", s.failures},
                          {"mean_error_px", s.mean_error_px},
                          {"median_error_px", s.median_error_px},
                          {"frame_stream_hash", hash.str()}});
  }
  json tests = json::array();
  for (const PairwiseTest& t : report.tests)
    tests.push_back({{"a", t.a},
                     {"b", t.b},
                     {"t", finite_or_string(t.result.t)},
                     {"df", t.result.df},
                     {"p_value", t.result.p_value},
                     {"significant", t.result.significant},
                     {"mean_difference_px", t.result.mean_difference}});
  return {{"strategies", strategies},
          {"ranking", report.ranking},
          {"t_tests", tests},
          {"alpha", report.alpha},
          {"failure_penalty_px", report.penalty_px},
          {"dropped_frames", report.dropped_frames}};
}

void write_summary_json(const fs::path& file, const Report& report) {
  std::ofstream out = open_out(file);
  out << std::setw(2) << summary_json(report) << '\n';
  finish_write(out, file);
}

void write_cdf_csv(std::ostream& out, const Report& report) {
  out << "threshold_px";
  for (const StrategyStats& s : report.strategies) out << ',' << s.strategy;
  out << '\n';
  out << std::setprecision(10);
  for (std::size_t k = 0; k < report.thresholds.size(); ++k) {
    out << report.thresholds[k];
    for (const std::vector<double>& row : report.cdf) {
      out << ',';
      if (k < row.size()) out << row[k];
    }
    out << '\n';
  }
}

void write_cdf_csv(const fs::path& file, const Report& report) {
  std::ofstream out = open_out(file);
  write_cdf_csv(out, report);
  finish_write(out, file);
}

void write_report(const fs::path& dir, const Report& report) {
  write_summary_json(dir / "summary.json", report);
  write_cdf_csv(dir / "cdf.csv", report);
}

}  // namespace longnav
