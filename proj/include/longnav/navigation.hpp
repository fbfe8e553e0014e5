#pragma once

// Repeat-phase loop: register each frame against its local map, log the
// result, adapt the map, and (closed loop) steer from the estimated shift.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "longnav/feature.hpp"
#include "longnav/registration.hpp"
#include "longnav/simulator.hpp"
#include "longnav/strategy.hpp"

namespace longnav {

struct LocationRecord {
  int traversal = 0;
  int location = 0;
  double time_s = 0.0;
  std::optional<double> delta_px;  // empty = registration failed
  double gamma_px = 0.0;
  std::size_t not_matched = 0;
  std::size_t correct = 0;
  std::size_t incorrect = 0;
  std::size_t active_count = 0;
  std::size_t map_size = 0;  // features in the local map after the update
  std::size_t experiences = 1;
  std::size_t experience_used = 0;
  double offset_m = 0.0;  // lateral offset at capture

  std::size_t correct_count() const { return correct; }
};

struct TraversalLog {
  std::string strategy;
  int traversal = 0;
  double time_s = 0.0;
  std::vector<LocationRecord> records;
};

class Navigator {
 public:
  Navigator(PathMap path, StrategyConfig strategy, RegistrationConfig registration);

  /// Registers the frame against local map `map_index`, updates that map and
  /// returns the log record.
  LocationRecord process(const Frame& frame, std::size_t map_index);

  const PathMap& path() const { return path_; }
  PathMap& mutable_path() { return path_; }
  const StrategyConfig& strategy() const { return strategy_; }
  const RegistrationConfig& registration() const { return registration_; }
  std::size_t refused_alternatives() const { return refused_alternatives_; }

 private:
  PathMap path_;
  StrategyConfig strategy_;
  RegistrationConfig registration_;
  std::size_t refused_alternatives_ = 0;
};

enum class LoopMode { kOpen, kClosed };

/// Ground-truth lateral offsets for open-loop runs: uniform in +-amplitude
/// (keyed on traversal and location), or a fixed per-location list.
struct OffsetSchedule {
  double amplitude_m = 0.25;
  std::vector<double> per_location;

  double offset_at(std::uint64_t run_seed, int traversal, std::size_t location) const;
};

struct TraverseState {
  double offset_m = 0.0;
};

/// Drives one pass along the path. Open loop: offsets follow `schedule` and
/// the estimated shift does not feed back. Closed loop:
///   offset' = offset - gain * delta / px_per_m + odometry noise.
/// `on_frame`, when set, sees every frame after processing.
TraversalLog traverse(const World& world, Navigator& nav, int traversal, double t, LoopMode mode,
                      TraverseState& state, const OffsetSchedule& schedule, std::uint64_t run_seed,
                      const std::function<void(const Frame&)>& on_frame = {});

/// FNV-1a over a frame's content, chained from `seed`.
std::uint64_t frame_digest(const Frame& frame, std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace longnav
