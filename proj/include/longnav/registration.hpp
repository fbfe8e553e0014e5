#pragma once

// Horizontal image registration by feature matching and histogram voting.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "longnav/feature.hpp"

namespace longnav {

enum class MatchOutcome : std::uint8_t { kNotMatched = 0, kMatchedCorrectly = 1, kMatchedIncorrectly = 2 };

struct FeaturePair {
  std::size_t map_index;
  std::size_t view_index;
  double dx;  // x_view - x_map, px
};

struct HistogramBin {
  double center;  // px
  std::size_t count;
};

struct Vote {
  double delta;  // mean difference inside the winning bin
  std::size_t winning_count;
  std::vector<HistogramBin> histogram;
};

struct RegistrationConfig {
  double bin_width = 10.0;                   // px
  std::optional<std::uint32_t> max_distance;  // Hamming threshold; unset = width / 4
  std::size_t min_votes = 3;                 // winning bin count below this = failure
  std::optional<double> tolerance;           // |dx - delta| for a correct match; unset = bin_width
  double image_width = 640.0;

  std::uint32_t distance_threshold(std::size_t descriptor_width) const;
  double correct_tolerance() const { return tolerance.value_or(bin_width); }
  void validate() const;
};

struct RegistrationResult {
  std::optional<double> delta;  // empty when registration failed
  std::vector<HistogramBin> histogram;
  std::vector<FeaturePair> pairs;
  std::vector<MatchOutcome> outcomes;  // one per map feature
  std::size_t correct_count = 0;

  bool succeeded() const { return delta.has_value(); }
  std::size_t count(MatchOutcome o) const;
};

/// Mutual nearest neighbours under Hamming distance with distance <= max_distance.
/// Ties resolve to the lower index. Throws InvalidInput on descriptor width mismatch.
std::vector<FeaturePair> match_features(std::span<const Feature> map_features,
                                        std::span<const Feature> view_features,
                                        std::uint32_t max_distance);

/// Bins the pair differences (bins [k*w, (k+1)*w) spanning [-W, W]) and returns
/// the mean difference of the fullest bin. Ties go to the bin whose centre is
/// closest to zero, then to the lower bin. Throws NoConsensus on empty input.
Vote histogram_vote(std::span<const FeaturePair> pairs, double bin_width, double image_width);

/// Per-map-feature outcome. With no delta (failed registration) everything is NotMatched.
std::vector<MatchOutcome> classify_outcomes(std::size_t map_size, std::span<const FeaturePair> pairs,
                                            std::optional<double> delta, double tolerance);

/// match + vote + classify. Fails (empty delta) when there are no pairs or the
/// winning bin has fewer than min_votes members.
RegistrationResult register_view(std::span<const Feature> map_features, std::span<const Feature> view_features,
                                 const RegistrationConfig& cfg);

/// Registers against the subset `active` of `map_features`; pair map indices
/// and outcomes refer to positions within `active`.
RegistrationResult register_view(std::span<const Feature> map_features, std::span<const std::size_t> active,
                                 std::span<const Feature> view_features, const RegistrationConfig& cfg);

}  // namespace longnav
