#include "longnav/registration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "longnav/error.hpp"

namespace longnav {

std::uint32_t RegistrationConfig::distance_threshold(std::size_t descriptor_width) const {
  return max_distance.value_or(static_cast<std::uint32_t>(descriptor_width / 4));
}

void RegistrationConfig::validate() const {
  if (!(bin_width > 0.0) || !std::isfinite(bin_width)) throw ConfigError("registration: bin_width must be positive");
  if (!(image_width > 0.0)) throw ConfigError("registration: image_width must be positive");
  if (tolerance && !(*tolerance >= 0.0)) throw ConfigError("registration: tolerance must be non-negative");
  if (min_votes == 0) throw ConfigError("registration: min_votes must be at least 1");
}

std::size_t RegistrationResult::count(MatchOutcome o) const {
  return static_cast<std::size_t>(std::count(outcomes.begin(), outcomes.end(), o));
}

namespace {

// Mutual nearest neighbours between two packed descriptor sets.
std::vector<FeaturePair> mutual_matches(const DescriptorBlock& map_block, std::span<const double> map_x,
                                        const DescriptorBlock& view_block, std::span<const double> view_x,
                                        std::uint32_t max_distance) {
  std::vector<FeaturePair> pairs;
  const std::vector<std::uint16_t> dist = distance_matrix(map_block, view_block);
  const std::size_t rows = map_block.rows();
  const std::size_t cols = view_block.rows();
  std::vector<std::size_t> best_view(rows);
  std::vector<std::size_t> best_map(cols, 0);
  std::vector<std::uint16_t> best_map_dist(cols, std::numeric_limits<std::uint16_t>::max());
  for (std::size_t i = 0; i < rows; ++i) {
    const std::uint16_t* row = dist.data() + i * cols;
    std::size_t arg = 0;
    for (std::size_t j = 1; j < cols; ++j)
      if (row[j] < row[arg]) arg = j;
    best_view[i] = arg;
    for (std::size_t j = 0; j < cols; ++j) {
      if (row[j] < best_map_dist[j]) {
        best_map_dist[j] = row[j];
        best_map[j] = i;
      }
    }
  }
  for (std::size_t i = 0; i < rows; ++i) {
    const std::size_t j = best_view[i];
    if (best_map[j] == i && dist[i * cols + j] <= max_distance) pairs.push_back({i, j, view_x[j] - map_x[i]});
  }
  return pairs;
}

std::vector<double> x_coordinates(std::span<const Feature> features) {
  std::vector<double> xs;
  xs.reserve(features.size());
  for (const Feature& f : features) xs.push_back(f.x);
  return xs;
}

RegistrationResult finish_registration(std::size_t map_size, std::vector<FeaturePair> pairs,
                                       const RegistrationConfig& cfg) {
  RegistrationResult result;
  result.pairs = std::move(pairs);
  if (!result.pairs.empty()) {
    Vote vote = histogram_vote(result.pairs, cfg.bin_width, cfg.image_width);
    result.histogram = std::move(vote.histogram);
    if (vote.winning_count >= cfg.min_votes) result.delta = vote.delta;
  }
  result.outcomes = classify_outcomes(map_size, result.pairs, result.delta, cfg.correct_tolerance());
  result.correct_count = result.count(MatchOutcome::kMatchedCorrectly);
  return result;
}

}  // namespace

std::vector<FeaturePair> match_features(std::span<const Feature> map_features,
                                        std::span<const Feature> view_features,
                                        std::uint32_t max_distance) {
  if (map_features.empty() || view_features.empty()) return {};
  const std::size_t width = map_features.front().descriptor.width();
  return mutual_matches(pack_descriptors(map_features, width), x_coordinates(map_features),
                        pack_descriptors(view_features, width), x_coordinates(view_features), max_distance);
}

Vote histogram_vote(std::span<const FeaturePair> pairs, double bin_width, double image_width) {
  if (!(bin_width > 0.0)) throw InvalidInput("histogram_vote: bin_width must be positive");
  if (!(image_width > 0.0)) throw InvalidInput("histogram_vote: image_width must be positive");
  if (pairs.empty()) throw NoConsensus("histogram_vote: no pairs to vote on");

  const auto first_bin = static_cast<long>(std::floor(-image_width / bin_width));
  const auto last_bin = static_cast<long>(std::floor(image_width / bin_width));
  const auto bin_count = static_cast<std::size_t>(last_bin - first_bin + 1);
  std::vector<std::size_t> counts(bin_count, 0);
  std::vector<double> sums(bin_count, 0.0);
  for (const FeaturePair& p : pairs) {
    if (!(p.dx >= -image_width && p.dx <= image_width)) continue;
    const auto k = static_cast<long>(std::floor(p.dx / bin_width));
    const auto slot = static_cast<std::size_t>(std::clamp(k, first_bin, last_bin) - first_bin);
    ++counts[slot];
    sums[slot] += p.dx;
  }

  Vote vote{0.0, 0, {}};
  vote.histogram.reserve(bin_count);
  std::size_t winner = 0;
  double winner_center = 0.0;
  for (std::size_t s = 0; s < bin_count; ++s) {
    const double center = (static_cast<double>(first_bin + static_cast<long>(s)) + 0.5) * bin_width;
    vote.histogram.push_back({center, counts[s]});
    const bool better = counts[s] > counts[winner] ||
                        (counts[s] == counts[winner] && std::abs(center) < std::abs(winner_center));
    if (s == 0 || better) {
      winner = s;
      winner_center = center;
    }
  }
  if (counts[winner] == 0) throw NoConsensus("histogram_vote: every difference lies outside [-W, W]");
  vote.winning_count = counts[winner];
  vote.delta = sums[winner] / static_cast<double>(counts[winner]);
  return vote;
}

std::vector<MatchOutcome> classify_outcomes(std::size_t map_size, std::span<const FeaturePair> pairs,
                                            std::optional<double> delta, double tolerance) {
  if (!(tolerance >= 0.0)) throw InvalidInput("classify_outcomes: negative tolerance");
  std::vector<MatchOutcome> outcomes(map_size, MatchOutcome::kNotMatched);
  if (!delta) return outcomes;
  for (const FeaturePair& p : pairs) {
    if (p.map_index >= map_size) throw InvalidInput("classify_outcomes: pair refers past the map end");
    if (outcomes[p.map_index] != MatchOutcome::kNotMatched)
      throw InvalidInput("classify_outcomes: map feature " + std::to_string(p.map_index) + " paired twice");
    outcomes[p.map_index] = std::abs(p.dx - *delta) <= tolerance ? MatchOutcome::kMatchedCorrectly
                                                                  : MatchOutcome::kMatchedIncorrectly;
  }
  return outcomes;
}

RegistrationResult register_view(std::span<const Feature> map_features, std::span<const Feature> view_features,
                                 const RegistrationConfig& cfg) {
  const std::size_t width = map_features.empty() ? 0 : map_features.front().descriptor.width();
  return finish_registration(map_features.size(),
                             match_features(map_features, view_features, cfg.distance_threshold(width)), cfg);
}

RegistrationResult register_view(std::span<const Feature> map_features, std::span<const std::size_t> active,
                                 std::span<const Feature> view_features, const RegistrationConfig& cfg) {
  std::vector<FeaturePair> pairs;
  if (!active.empty() && !view_features.empty()) {
    const std::size_t width = map_features[active.front()].descriptor.width();
    std::vector<double> map_x;
    map_x.reserve(active.size());
    for (std::size_t i : active) {
      if (i >= map_features.size()) throw InvalidInput("register_view: active index past the map end");
      map_x.push_back(map_features[i].x);
    }
    pairs = mutual_matches(pack_descriptors(map_features, active, width), map_x,
                           pack_descriptors(view_features, width), x_coordinates(view_features),
                           cfg.distance_threshold(width));
  }
  return finish_registration(active.size(), std::move(pairs), cfg);
}

}  // namespace longnav
