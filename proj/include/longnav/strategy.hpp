#pragma once

// Map-update strategies: how a local map is adapted after each registration.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "longnav/feature.hpp"
#include "longnav/fremen.hpp"
#include "longnav/registration.hpp"

namespace longnav {

enum class StrategyKind { kStatic, kLatest, kAggressive, kStrict, kSummary, kMultiple, kScoreBased, kFremen };

/// static|latest|aggressive|strict|summary|multiple|score|fremen
std::string_view to_string(StrategyKind kind);
StrategyKind parse_strategy_kind(std::string_view name);
std::span<const StrategyKind> all_strategy_kinds();

struct StrategyConfig {
  StrategyKind kind = StrategyKind::kStatic;
  std::string name;  // report label; defaults to the kind name
  double s_c = 1.0;  // reward for a correct match
  double s_i = 1.0;  // penalty for an incorrect match
  double s_n = 0.0;  // penalty for no match
  double exchange_fraction = 0.05;
  std::size_t active_features = 500;  // m
  double summary_add_fraction = 0.10;
  double multiple_threshold = 0.10;
  std::size_t multiple_max_alternatives = 8;
  std::size_t fremen_order = 2;
  PeriodSet fremen_periods = default_fremen_periods();

  std::string label() const { return name.empty() ? std::string(to_string(kind)) : name; }
  /// ceil(exchange_fraction * map_size)
  std::size_t exchange_count(std::size_t map_size) const;
  void validate() const;
};

/// Applies one match outcome. Score-based: +s_c / -s_i / -s_n on `score`.
/// FreMEn: the same signed value is added to the temporal model at time t.
/// Other kinds leave the feature untouched.
void score_update(Feature& feature, MatchOutcome outcome, const StrategyConfig& cfg, double t);

/// Total order used for both selection and removal: higher rank value first,
/// then newer inserted_at, then lower list index.
std::vector<std::size_t> rank_features(std::span<const Feature> features, const StrategyConfig& cfg, double t);

/// Indices of the features used for localisation, in rank order, at most m.
std::vector<std::size_t> select_active_features(std::span<const Feature> features, const StrategyConfig& cfg,
                                                double t);
std::vector<std::size_t> select_active_features(const LocalMap& map, const StrategyConfig& cfg, double t);

struct AdditionCandidate {
  std::size_t view_index;  // index into the list given to rank_addition_candidates
  std::uint32_t uniqueness;  // Hamming distance to the nearest map feature
};

/// Most unique first; ties keep view order. An empty map scores every
/// candidate at its descriptor width.
std::vector<AdditionCandidate> rank_addition_candidates(std::span<const Feature> unmatched_view,
                                                        std::span<const Feature> map_features);

/// x' = clamp(x - delta) into [0, W); y unchanged.
std::vector<Feature> correct_positions(std::span<const Feature> features, double delta, double image_width);

/// At most `cap` features of one image, preferring those far (in descriptor
/// space) from every other feature of the same image.
std::vector<Feature> select_distinct_features(std::span<const Feature> features, std::size_t cap);

struct UpdateSummary {
  std::size_t removed = 0;
  std::size_t inserted = 0;
  bool replaced = false;
  bool alternative_added = false;
  bool alternative_refused = false;
};

/// Adapts `map` after registering `view` against select_active_features(map).
/// `reg.outcomes` must line up with that active set. Never inserts anything
/// when the registration failed.
UpdateSummary update_map(LocalMap& map, std::span<const Feature> view, const RegistrationResult& reg,
                         const StrategyConfig& cfg, double t, int traversal, double image_width);

struct AlternativeMatch {
  std::size_t index = 0;
  RegistrationResult result;
  std::vector<std::size_t> active;  // active indices within that experience
};

/// Registers the view against every experience and keeps the one with the
/// most correct matches; ties go to the oldest. When every registration fails
/// the returned result is the (failed) one of experience 0.
AlternativeMatch select_best_alternative(const LocalMap& map, std::span<const Feature> view,
                                         const StrategyConfig& cfg, const RegistrationConfig& reg_cfg, double t);

}  // namespace longnav
