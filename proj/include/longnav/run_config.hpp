#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "longnav/navigation.hpp"
#include "longnav/registration.hpp"
#include "longnav/simulator.hpp"
#include "longnav/strategy.hpp"

namespace longnav {

/// Repeat traversals k = 1..traversals at start_s + k * interval_s; the path
/// is taught at start_s.
struct Schedule {
  std::size_t traversals = 178;
  double interval_s = 90.0 * 86400.0 / 178.0;
  double start_s = 0.0;

  double time_at(int traversal) const { return start_s + traversal * interval_s; }
};

struct RunConfig {
  WorldConfig world;
  TeachConfig teach;
  RegistrationConfig registration;
  std::vector<StrategyConfig> strategies;
  Schedule schedule;
  LoopMode mode = LoopMode::kOpen;
  OffsetSchedule offsets;         // open loop
  double initial_offset_m = 0.0;  // closed loop
  std::uint64_t run_seed = 2;
  std::optional<double> failure_penalty_px;  // unset = image_width / 2
  double alpha = 0.01;
  std::vector<double> cdf_thresholds_px;  // empty = 0, 1, ..., 100
  std::string output_dir = "out";
  std::size_t threads = 0;  // 0 = hardware concurrency

  double penalty(double image_width) const { return failure_penalty_px.value_or(image_width / 2.0); }
  std::vector<double> thresholds() const;
  /// Throws ConfigError.
  void validate() const;
};

std::string_view to_string(LoopMode mode);
LoopMode parse_loop_mode(std::string_view name);

}  // namespace longnav
