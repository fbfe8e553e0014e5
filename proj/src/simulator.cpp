#include "longnav/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "longnav/error.hpp"
#include "longnav/strategy.hpp"

namespace longnav {
namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ConfigError(std::string("world config: ") + what);
}

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

bool valid_range(const UniformRange& r, double lo, double hi) {
  return r.min <= r.max && r.min >= lo && r.max <= hi;
}

double uniform(Rng& rng, double lo, double hi) {
  if (lo == hi) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Flips each bit independently with probability p, skipping geometrically
// between flips.
void flip_bits(Descriptor& d, double p, Rng& rng) {
  if (p <= 0.0) return;
  std::geometric_distribution<std::size_t> gap(std::min(p, 1.0));
  std::size_t pos = gap(rng);
  while (pos < d.width()) {
    d.flip(pos);
    pos += gap(rng) + 1;
  }
}

void flip_exact(Descriptor& d, std::size_t count, Rng& rng) {
  count = std::min(count, d.width());
  std::vector<bool> used(d.width(), false);
  std::uniform_int_distribution<std::size_t> pick(0, d.width() - 1);
  for (std::size_t k = 0; k < count;) {
    const std::size_t b = pick(rng);
    if (used[b]) continue;
    used[b] = true;
    d.flip(b);
    ++k;
  }
}

}  // namespace

void WorldConfig::validate() const {
  require(n_locations > 0, "n_locations must be positive");
  require(landmarks_per_location > 0, "landmarks_per_location must be positive");
  require(image_width > 0.0 && image_height > 0.0, "image size must be positive");
  require(descriptor_width > 0 && descriptor_width <= 65535, "descriptor_width must be in [1, 65535]");
  require(day_period_s > 0.0, "day_period_s must be positive");
  require(valid_range(visibility_mean, 0.0, 1.0), "visibility_mean must be a range within [0, 1]");
  require(valid_range(visibility_amplitude, 0.0, 1.0), "visibility_amplitude must be a range within [0, 1]");
  require(is_probability(night_fraction), "night_fraction must be a probability");
  require(phase_jitter_rad >= 0.0, "phase_jitter_rad must be >= 0");
  require(is_probability(bit_flip_prob), "bit_flip_prob must be a probability");
  require(is_probability(night_bit_flip_prob), "night_bit_flip_prob must be a probability");
  require(is_probability(bit_flip_prob + night_bit_flip_prob), "bit flip probabilities must sum to <= 1");
  require(position_jitter_px >= 0.0, "position_jitter_px must be >= 0");
  require(is_probability(turnover_prob), "turnover_prob must be a probability");
  require(is_probability(clutter_alias_fraction), "clutter_alias_fraction must be a probability");
  require(clutter_alias_bits <= descriptor_width, "clutter_alias_bits exceeds the descriptor width");
  require(px_per_m > 0.0, "px_per_m must be positive");
  require(steering_gain >= 0.0, "steering_gain must be >= 0");
  require(odometry_noise_m >= 0.0, "odometry_noise_m must be >= 0");
}

double Landmark::visibility(double t, double day_period_s) const {
  const double p = vis_mean + vis_amp * std::cos(2.0 * std::numbers::pi * t / day_period_s + vis_phase);
  return std::clamp(p, 0.0, 1.0);
}

World::World(WorldConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  Rng rng = derive_rng(cfg_.seed, {1});
  locations_.resize(cfg_.n_locations);
  for (auto& pool : locations_) {
    pool.reserve(cfg_.landmarks_per_location);
    for (std::size_t i = 0; i < cfg_.landmarks_per_location; ++i) pool.push_back(make_landmark(rng, 0));
  }
}

Landmark World::make_landmark(Rng& rng, int born_at) {
  Landmark l;
  l.id = next_id_++;
  l.x = uniform(rng, 0.0, cfg_.image_width);
  l.y = uniform(rng, 0.0, cfg_.image_height);
  l.descriptor = Descriptor::random(cfg_.descriptor_width, rng);
  l.vis_mean = uniform(rng, cfg_.visibility_mean.min, cfg_.visibility_mean.max);
  l.vis_amp = uniform(rng, cfg_.visibility_amplitude.min, cfg_.visibility_amplitude.max);
  const bool night = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < cfg_.night_fraction;
  l.vis_phase = (night ? std::numbers::pi : 0.0) + uniform(rng, -cfg_.phase_jitter_rad, cfg_.phase_jitter_rad);
  l.born_at = born_at;
  return l;
}

std::span<const Landmark> World::landmarks(std::size_t location) const { return locations_.at(location); }
std::span<Landmark> World::mutable_landmarks(std::size_t location) { return locations_.at(location); }

void World::advance_turnover(int traversal) {
  if (traversal <= turnover_epoch_)
    throw InvalidInput("advance_turnover: traversal " + std::to_string(traversal) + " already applied");
  turnover_epoch_ = traversal;
  if (cfg_.turnover_prob <= 0.0) return;
  Rng rng = derive_rng(cfg_.seed, {2, static_cast<std::uint64_t>(traversal)});
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& pool : locations_)
    for (auto& l : pool)
      if (u(rng) < cfg_.turnover_prob) l = make_landmark(rng, traversal);
}

World generate_world(const WorldConfig& cfg) { return World(cfg); }

Rng frame_rng(std::uint64_t run_seed, int traversal, std::size_t location) {
  return derive_rng(run_seed, {3, static_cast<std::uint64_t>(traversal), location});
}

Frame observe(const World& world, std::size_t location, double t, double offset_m, Rng& rng) {
  const WorldConfig& cfg = world.config();
  if (location >= world.location_count()) throw OutOfRange("observe: location index out of range");
  const std::span<const Landmark> pool = world.landmarks(location);

  Frame frame;
  frame.location = static_cast<int>(location);
  frame.time_s = t;
  frame.gamma_px = cfg.px_per_m * offset_m;

  const double darkness = std::max(0.0, -std::cos(2.0 * std::numbers::pi * t / cfg.day_period_s));
  const double flip_p = cfg.bit_flip_prob + cfg.night_bit_flip_prob * darkness;
  const double y_max = std::nextafter(cfg.image_height, 0.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> jitter(0.0, cfg.position_jitter_px > 0.0 ? cfg.position_jitter_px : 1.0);
  const bool jittered = cfg.position_jitter_px > 0.0;

  frame.features.reserve(pool.size() + cfg.clutter_count);
  for (const Landmark& l : pool) {
    if (!(u(rng) < l.visibility(t, cfg.day_period_s))) continue;
    Feature f;
    f.x = l.x + frame.gamma_px + (jittered ? jitter(rng) : 0.0);
    f.y = std::clamp(l.y + (jittered ? jitter(rng) : 0.0), 0.0, y_max);
    if (!(f.x >= 0.0 && f.x < cfg.image_width)) continue;
    f.descriptor = l.descriptor;
    flip_bits(f.descriptor, flip_p, rng);
    frame.features.push_back(std::move(f));
  }

  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  for (std::size_t c = 0; c < cfg.clutter_count; ++c) {
    Feature f;
    f.x = uniform(rng, 0.0, cfg.image_width);
    f.y = uniform(rng, 0.0, cfg.image_height);
    if (u(rng) < cfg.clutter_alias_fraction) {
      f.descriptor = pool[pick(rng)].descriptor;
      flip_exact(f.descriptor, cfg.clutter_alias_bits, rng);
    } else {
      f.descriptor = Descriptor::random(cfg.descriptor_width, rng);
    }
    flip_bits(f.descriptor, flip_p, rng);
    frame.features.push_back(std::move(f));
  }
  return frame;
}

namespace {

LocalMap map_from_frame(const Frame& frame, std::size_t index, const TeachConfig& cfg) {
  if (frame.features.empty())
    throw TeachError("teach: location " + std::to_string(frame.location) + " produced no features");
  LocalMap m;
  m.index = index;
  m.odometry_distance = static_cast<double>(index) * cfg.spacing_m;
  m.features = select_distinct_features(frame.features, cfg.max_features);
  for (Feature& f : m.features) {
    f.inserted_at = 0;
    f.score = 0.0;
    f.temporal.reset();
  }
  return m;
}

void check_teach_config(const TeachConfig& cfg) {
  if (!(cfg.spacing_m > 0.0)) throw ConfigError("teach: spacing_m must be positive");
  if (cfg.max_features == 0) throw ConfigError("teach: max_features must be positive");
}

}  // namespace

PathMap teach(const World& world, double t, const TeachConfig& cfg, std::uint64_t run_seed) {
  check_teach_config(cfg);
  PathMap path;
  path.image_width = world.config().image_width;
  path.descriptor_width = world.config().descriptor_width;
  path.taught_at = t;
  for (std::size_t loc = 0; loc < world.location_count(); ++loc) {
    Rng rng = frame_rng(run_seed, 0, loc);
    Frame frame = observe(world, loc, t, 0.0, rng);
    path.local_maps.push_back(map_from_frame(frame, loc, cfg));
  }
  return path;
}

PathMap teach_from_frames(std::span<const Frame> frames, const TeachConfig& cfg, double image_width, double taught_at) {
  check_teach_config(cfg);
  if (frames.empty()) throw TeachError("teach: no frames");
  PathMap path;
  path.image_width = image_width;
  path.taught_at = taught_at;
  std::size_t width = 0;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (frames[i].location != static_cast<int>(i))
      throw TeachError("teach: frames must cover locations 0..N-1 in order");
    if (!frames[i].features.empty()) width = frames[i].features.front().descriptor.width();
    path.local_maps.push_back(map_from_frame(frames[i], i, cfg));
  }
  path.descriptor_width = width;
  path.validate();
  return path;
}

}  // namespace longnav
