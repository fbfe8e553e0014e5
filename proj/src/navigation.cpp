#include "longnav/navigation.hpp"

#include <bit>
#include <cstring>
#include <string>

#include "longnav/error.hpp"

namespace longnav {

Navigator::Navigator(PathMap path, StrategyConfig strategy, RegistrationConfig registration)
    : path_(std::move(path)), strategy_(std::move(strategy)), registration_(std::move(registration)) {
  strategy_.validate();
  registration_.validate();
  path_.validate();
}

LocationRecord Navigator::process(const Frame& frame, std::size_t map_index) {
  if (map_index >= path_.local_maps.size()) throw OutOfRange("process: no local map " + std::to_string(map_index));
  LocalMap& map = path_.local_maps[map_index];
  const double t = frame.time_s;

  RegistrationResult reg;
  LocationRecord rec;
  if (strategy_.kind == StrategyKind::kMultiple) {
    AlternativeMatch best = select_best_alternative(map, frame.features, strategy_, registration_, t);
    reg = std::move(best.result);
    rec.experience_used = best.index;
  } else {
    const std::vector<std::size_t> active = select_active_features(map, strategy_, t);
    reg = register_view(map.features, active, frame.features, registration_);
  }

  rec.traversal = frame.traversal;
  rec.location = frame.location;
  rec.time_s = t;
  rec.delta_px = reg.delta;
  rec.gamma_px = frame.gamma_px;
  rec.correct = reg.correct_count;
  rec.incorrect = reg.count(MatchOutcome::kMatchedIncorrectly);
  rec.not_matched = reg.count(MatchOutcome::kNotMatched);
  rec.active_count = reg.outcomes.size();

  const UpdateSummary summary =
      update_map(map, frame.features, reg, strategy_, t, frame.traversal, path_.image_width);
  if (summary.alternative_refused) ++refused_alternatives_;
  rec.map_size = map.features.size();
  rec.experiences = map.experience_count();
  return rec;
}

double OffsetSchedule::offset_at(std::uint64_t run_seed, int traversal, std::size_t location) const {
  if (!per_location.empty()) return per_location[location % per_location.size()];
  if (amplitude_m == 0.0) return 0.0;
  Rng rng = derive_rng(run_seed, {4, static_cast<std::uint64_t>(traversal), location});
  return std::uniform_real_distribution<double>(-amplitude_m, amplitude_m)(rng);
}

TraversalLog traverse(const World& world, Navigator& nav, int traversal, double t, LoopMode mode,
                      TraverseState& state, const OffsetSchedule& schedule, std::uint64_t run_seed,
                      const std::function<void(const Frame&)>& on_frame) {
  const WorldConfig& wc = world.config();
  const PathMap& path = nav.path();
  if (path.local_maps.size() != world.location_count())
    throw InvalidInput("traverse: path was not taught in this world");

  TraversalLog log;
  log.strategy = nav.strategy().label();
  log.traversal = traversal;
  log.time_s = t;
  log.records.reserve(world.location_count());

  for (std::size_t loc = 0; loc < world.location_count(); ++loc) {
    if (mode == LoopMode::kOpen) state.offset_m = schedule.offset_at(run_seed, traversal, loc);
    const std::size_t map_index = local_map_index_at(path, path.local_maps[loc].odometry_distance);

    Rng rng = frame_rng(run_seed, traversal, loc);
    Frame frame = observe(world, loc, t, state.offset_m, rng);
    frame.traversal = traversal;

    LocationRecord rec = nav.process(frame, map_index);
    rec.offset_m = state.offset_m;
    log.records.push_back(rec);

    if (mode == LoopMode::kClosed) {
      if (rec.delta_px) state.offset_m -= wc.steering_gain * (*rec.delta_px / wc.px_per_m);
      if (wc.odometry_noise_m > 0.0) {
        Rng noise = derive_rng(run_seed, {5, static_cast<std::uint64_t>(traversal), loc});
        state.offset_m += std::normal_distribution<double>(0.0, wc.odometry_noise_m)(noise);
      }
    }
    if (on_frame) on_frame(frame);
  }
  return log;
}

namespace {

void mix(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
}

template <typename T>
void mix_value(std::uint64_t& h, T v) {
  mix(h, &v, sizeof v);
}

}  // namespace

std::uint64_t frame_digest(const Frame& frame, std::uint64_t seed) {
  std::uint64_t h = seed;
  mix_value(h, static_cast<std::int64_t>(frame.traversal));
  mix_value(h, static_cast<std::int64_t>(frame.location));
  mix_value(h, std::bit_cast<std::uint64_t>(frame.time_s));
  mix_value(h, std::bit_cast<std::uint64_t>(frame.gamma_px));
  mix_value(h, static_cast<std::uint64_t>(frame.features.size()));
  for (const Feature& f : frame.features) {
    mix_value(h, std::bit_cast<std::uint64_t>(f.x));
    mix_value(h, std::bit_cast<std::uint64_t>(f.y));
    for (std::uint64_t w : f.descriptor.words()) mix_value(h, w);
  }
  return h;
}

}  // namespace longnav
