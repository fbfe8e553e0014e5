#pragma once

// Synthetic changing environment: per-location landmark pools with diurnal
// visibility, descriptor noise, gradual landmark turnover and clutter, seen by
// a robot whose only state is its lateral offset from the taught path.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "longnav/feature.hpp"
#include "longnav/rng.hpp"

namespace longnav {

struct UniformRange {
  double min = 0.0;
  double max = 0.0;
};

struct WorldConfig {
  std::size_t n_locations = 32;
  std::size_t landmarks_per_location = 700;
  double image_width = 640.0;   // px
  double image_height = 480.0;  // px
  std::size_t descriptor_width = kDefaultDescriptorWidth;
  double day_period_s = 86400.0;

  // p_vis(t) = clamp(mean + amp * cos(2 pi t / day_period + phase), 0, 1), t = 0 at noon.
  UniformRange visibility_mean{0.55, 0.85};
  UniformRange visibility_amplitude{0.05, 0.35};
  double night_fraction = 0.3;    // share of landmarks peaking at midnight (phase pi)
  double phase_jitter_rad = 0.5;  // uniform +- jitter around the 0 / pi peak

  double bit_flip_prob = 0.02;        // per bit, per observation
  double night_bit_flip_prob = 0.01;  // extra flip probability at midnight, scaled by darkness
  double position_jitter_px = 1.0;
  double turnover_prob = 0.002;  // per landmark, per traversal
  std::size_t clutter_count = 30;
  double clutter_alias_fraction = 0.5;  // clutter copying a scene landmark (dynamic look-alikes)
  std::size_t clutter_alias_bits = 24;  // bits flipped in such copies
  double px_per_m = 200.0;
  double steering_gain = 0.8;
  double odometry_noise_m = 0.005;
  std::uint64_t seed = 1;

  /// Throws ConfigError on any invalid field.
  void validate() const;
};

struct Landmark {
  std::uint64_t id = 0;
  double x = 0.0;
  double y = 0.0;
  Descriptor descriptor;
  double vis_mean = 1.0;
  double vis_amp = 0.0;
  double vis_phase = 0.0;
  int born_at = 0;  // traversal at which the landmark appeared

  double visibility(double t, double day_period_s) const;
};

class World {
 public:
  explicit World(WorldConfig cfg);

  const WorldConfig& config() const { return cfg_; }
  std::size_t location_count() const { return locations_.size(); }
  std::span<const Landmark> landmarks(std::size_t location) const;
  std::span<Landmark> mutable_landmarks(std::size_t location);

  /// Replaces each landmark with probability turnover_prob, using a stream
  /// keyed on `traversal`. Call once per traversal, in increasing order.
  void advance_turnover(int traversal);
  int turnover_epoch() const { return turnover_epoch_; }

 private:
  Landmark make_landmark(Rng& rng, int born_at);

  WorldConfig cfg_;
  std::vector<std::vector<Landmark>> locations_;
  std::uint64_t next_id_ = 1;
  int turnover_epoch_ = 0;
};

/// Same seed gives a bit-identical world. Throws ConfigError for invalid configs.
World generate_world(const WorldConfig& cfg);

struct Frame {
  int traversal = 0;
  int location = 0;
  double time_s = 0.0;
  double gamma_px = 0.0;  // ground-truth shift, px_per_m * lateral offset
  std::vector<Feature> features;
};

/// One camera frame at `location`, time t, lateral offset `offset_m`.
Frame observe(const World& world, std::size_t location, double t, double offset_m, Rng& rng);

struct TeachConfig {
  double spacing_m = 1.0;
  std::size_t max_features = 500;
};

/// One local map per location, observed at offset 0. Throws TeachError when a
/// location yields no features.
PathMap teach(const World& world, double t, const TeachConfig& cfg, std::uint64_t run_seed);

/// Builds a path from recorded frames, one per location in location order.
PathMap teach_from_frames(std::span<const Frame> frames, const TeachConfig& cfg, double image_width, double taught_at);

/// Deterministic per-frame observation stream.
Rng frame_rng(std::uint64_t run_seed, int traversal, std::size_t location);

}  // namespace longnav
