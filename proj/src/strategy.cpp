#include "longnav/strategy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "longnav/error.hpp"

namespace longnav {
namespace {

constexpr std::array<StrategyKind, 8> kAllKinds = {
    StrategyKind::kStatic,  StrategyKind::kLatest,   StrategyKind::kAggressive, StrategyKind::kStrict,
    StrategyKind::kSummary, StrategyKind::kMultiple, StrategyKind::kScoreBased, StrategyKind::kFremen};

double outcome_value(MatchOutcome outcome, const StrategyConfig& cfg) {
  switch (outcome) {
    case MatchOutcome::kMatchedCorrectly:
      return cfg.s_c;
    case MatchOutcome::kMatchedIncorrectly:
      return -cfg.s_i;
    case MatchOutcome::kNotMatched:
      break;
  }
  return -cfg.s_n;
}

// Orders indices by (value desc, inserted_at desc, index asc).
std::vector<std::size_t> order_by(std::span<const Feature> features, const std::vector<double>& value) {
  std::vector<std::size_t> idx(features.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (value[a] != value[b]) return value[a] > value[b];
    if (features[a].inserted_at != features[b].inserted_at) return features[a].inserted_at > features[b].inserted_at;
    return a < b;
  });
  return idx;
}

// Ranking used when deciding what to discard: the accumulated score, or for
// FreMEn the time-averaged score.
std::vector<std::size_t> retention_order(std::span<const Feature> features, const StrategyConfig& cfg) {
  std::vector<double> value(features.size(), 0.0);
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (cfg.kind == StrategyKind::kScoreBased)
      value[i] = features[i].score;
    else if (cfg.kind == StrategyKind::kFremen && features[i].temporal)
      value[i] = features[i].temporal->mean_score();
  }
  return order_by(features, value);
}

Feature make_inserted(Feature f, const StrategyConfig& cfg, int traversal) {
  f.inserted_at = traversal;
  f.score = 0.0;
  f.temporal.reset();
  if (cfg.kind == StrategyKind::kFremen) f.temporal.emplace(cfg.fremen_periods);
  return f;
}

void apply_scores(LocalMap& map, std::span<const std::size_t> active, std::span<const MatchOutcome> outcomes,
                  const StrategyConfig& cfg, double t) {
  std::vector<MatchOutcome> per_feature(map.features.size(), MatchOutcome::kNotMatched);
  for (std::size_t a = 0; a < active.size(); ++a) per_feature[active[a]] = outcomes[a];
  for (std::size_t i = 0; i < map.features.size(); ++i) score_update(map.features[i], per_feature[i], cfg, t);
}

}  // namespace

std::string_view to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kStatic: return "static";
    case StrategyKind::kLatest: return "latest";
    case StrategyKind::kAggressive: return "aggressive";
    case StrategyKind::kStrict: return "strict";
    case StrategyKind::kSummary: return "summary";
    case StrategyKind::kMultiple: return "multiple";
    case StrategyKind::kScoreBased: return "score";
    case StrategyKind::kFremen: return "fremen";
  }
  return "unknown";
}

StrategyKind parse_strategy_kind(std::string_view name) {
  for (StrategyKind k : kAllKinds)
    if (to_string(k) == name) return k;
  throw ConfigError("unknown strategy '" + std::string(name) +
                    "' (expected static|latest|aggressive|strict|summary|multiple|score|fremen)");
}

std::span<const StrategyKind> all_strategy_kinds() { return kAllKinds; }

std::size_t StrategyConfig::exchange_count(std::size_t map_size) const {
  return static_cast<std::size_t>(std::ceil(exchange_fraction * static_cast<double>(map_size) - 1e-9));
}

void StrategyConfig::validate() const {
  if (!(exchange_fraction > 0.0 && exchange_fraction <= 1.0))
    throw ConfigError("strategy " + label() + ": exchange_fraction must be in (0, 1]");
  if (active_features == 0) throw ConfigError("strategy " + label() + ": m must be at least 1");
  for (double w : {s_c, s_i, s_n})
    if (!std::isfinite(w) || w < 0.0) throw ConfigError("strategy " + label() + ": score weights must be finite and >= 0");
  if (kind == StrategyKind::kFremen && (s_c > 1.0 || s_i > 1.0 || s_n > 1.0))
    throw ConfigError("strategy " + label() + ": FreMEn score weights must lie in [0, 1]");
  if (!(summary_add_fraction >= 0.0)) throw ConfigError("strategy " + label() + ": summary_add_fraction must be >= 0");
  if (!(multiple_threshold >= 0.0 && multiple_threshold <= 1.0))
    throw ConfigError("strategy " + label() + ": multiple_threshold must be in [0, 1]");
  if (multiple_max_alternatives == 0) throw ConfigError("strategy " + label() + ": multiple_max_alternatives must be >= 1");
  if (!fremen_periods || fremen_periods->empty()) throw ConfigError("strategy " + label() + ": empty FreMEn period set");
}

void score_update(Feature& feature, MatchOutcome outcome, const StrategyConfig& cfg, double t) {
  if (cfg.kind == StrategyKind::kScoreBased) {
    feature.score += outcome_value(outcome, cfg);
  } else if (cfg.kind == StrategyKind::kFremen) {
    if (!feature.temporal) feature.temporal.emplace(cfg.fremen_periods);
    feature.temporal->add_observation(outcome_value(outcome, cfg), t);
  }
}

std::vector<std::size_t> rank_features(std::span<const Feature> features, const StrategyConfig& cfg, double t) {
  std::vector<double> value(features.size(), 0.0);
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (cfg.kind == StrategyKind::kScoreBased)
      value[i] = features[i].score;
    else if (cfg.kind == StrategyKind::kFremen && features[i].temporal)
      value[i] = features[i].temporal->predict(t, cfg.fremen_order);
  }
  return order_by(features, value);
}

std::vector<std::size_t> select_active_features(std::span<const Feature> features, const StrategyConfig& cfg,
                                                double t) {
  std::vector<std::size_t> ranked = rank_features(features, cfg, t);
  if (ranked.size() > cfg.active_features) ranked.resize(cfg.active_features);
  return ranked;
}

std::vector<std::size_t> select_active_features(const LocalMap& map, const StrategyConfig& cfg, double t) {
  return select_active_features(std::span<const Feature>(map.features), cfg, t);
}

std::vector<AdditionCandidate> rank_addition_candidates(std::span<const Feature> unmatched_view,
                                                        std::span<const Feature> map_features) {
  std::vector<AdditionCandidate> out;
  out.reserve(unmatched_view.size());
  if (map_features.empty()) {
    for (std::size_t i = 0; i < unmatched_view.size(); ++i)
      out.push_back({i, static_cast<std::uint32_t>(unmatched_view[i].descriptor.width())});
    return out;
  }
  if (unmatched_view.empty()) return out;
  const std::size_t width = map_features.front().descriptor.width();
  const DescriptorBlock view_block = pack_descriptors(unmatched_view, width);
  const DescriptorBlock map_block = pack_descriptors(map_features, width);
  const std::vector<std::uint16_t> dist = distance_matrix(view_block, map_block);
  const std::size_t cols = map_block.rows();
  for (std::size_t i = 0; i < unmatched_view.size(); ++i) {
    const auto* row = dist.data() + i * cols;
    out.push_back({i, *std::min_element(row, row + cols)});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const AdditionCandidate& a, const AdditionCandidate& b) { return a.uniqueness > b.uniqueness; });
  return out;
}

std::vector<Feature> correct_positions(std::span<const Feature> features, double delta, double image_width) {
  // Largest double strictly below W keeps x inside [0, W).
  const double x_max = std::nextafter(image_width, 0.0);
  std::vector<Feature> out(features.begin(), features.end());
  for (Feature& f : out) f.x = std::clamp(f.x - delta, 0.0, x_max);
  return out;
}

std::vector<Feature> select_distinct_features(std::span<const Feature> features, std::size_t cap) {
  if (features.size() <= cap) return {features.begin(), features.end()};
  const std::size_t width = features.front().descriptor.width();
  const DescriptorBlock block = pack_descriptors(features, width);
  const std::vector<std::uint16_t> dist = distance_matrix(block, block);
  const std::size_t n = features.size();
  std::vector<std::uint32_t> uniqueness(n, static_cast<std::uint32_t>(width));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) uniqueness[i] = std::min<std::uint32_t>(uniqueness[i], dist[i * n + j]);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return uniqueness[a] > uniqueness[b]; });
  idx.resize(cap);
  std::sort(idx.begin(), idx.end());
  std::vector<Feature> out;
  out.reserve(cap);
  for (std::size_t i : idx) out.push_back(features[i]);
  return out;
}

UpdateSummary update_map(LocalMap& map, std::span<const Feature> view, const RegistrationResult& reg,
                         const StrategyConfig& cfg, double t, int traversal, double image_width) {
  UpdateSummary summary;
  switch (cfg.kind) {
    case StrategyKind::kStatic:
      return summary;

    case StrategyKind::kLatest: {
      if (!reg.succeeded()) return summary;
      std::vector<Feature> fresh = correct_positions(view, *reg.delta, image_width);
      for (Feature& f : fresh) f = make_inserted(std::move(f), cfg, traversal);
      summary.removed = map.features.size();
      summary.inserted = fresh.size();
      summary.replaced = true;
      map.features = std::move(fresh);
      return summary;
    }

    case StrategyKind::kMultiple: {
      if (!reg.succeeded()) return summary;
      const double ratio = reg.outcomes.empty()
                               ? 0.0
                               : static_cast<double>(reg.correct_count) / static_cast<double>(reg.outcomes.size());
      if (ratio >= cfg.multiple_threshold) return summary;
      if (map.experience_count() >= cfg.multiple_max_alternatives) {
        summary.alternative_refused = true;
        warn("local map " + std::to_string(map.index) + " already holds " + std::to_string(map.experience_count()) +
             " experiences; new experience refused");
        return summary;
      }
      std::vector<Feature> fresh =
          correct_positions(select_distinct_features(view, cfg.active_features), *reg.delta, image_width);
      for (Feature& f : fresh) f = make_inserted(std::move(f), cfg, traversal);
      summary.inserted = fresh.size();
      summary.alternative_added = true;
      map.alternatives.push_back({std::move(fresh), traversal});
      return summary;
    }

    case StrategyKind::kAggressive:
    case StrategyKind::kStrict:
    case StrategyKind::kSummary:
    case StrategyKind::kScoreBased:
    case StrategyKind::kFremen:
      break;
  }

  const std::vector<std::size_t> active = select_active_features(map, cfg, t);
  if (active.size() != reg.outcomes.size())
    throw InvalidInput("update_map: registration outcomes do not match the active feature set (" +
                       std::to_string(reg.outcomes.size()) + " vs " + std::to_string(active.size()) + ")");

  const bool scored = cfg.kind == StrategyKind::kScoreBased || cfg.kind == StrategyKind::kFremen;
  if (!reg.succeeded()) {
    if (scored) {
      const std::vector<MatchOutcome> none(active.size(), MatchOutcome::kNotMatched);
      apply_scores(map, active, none, cfg, t);
    }
    return summary;
  }

  // Candidates are ranked against the map as it was before any removal.
  std::vector<bool> view_matched(view.size(), false);
  for (const FeaturePair& p : reg.pairs) view_matched.at(p.view_index) = true;
  std::vector<Feature> unmatched;
  for (std::size_t j = 0; j < view.size(); ++j)
    if (!view_matched[j]) unmatched.push_back(view[j]);
  const std::vector<AdditionCandidate> candidates = rank_addition_candidates(unmatched, map.features);

  std::vector<bool> remove(map.features.size(), false);
  std::size_t slots = 0;
  if (scored) {
    apply_scores(map, active, reg.outcomes, cfg, t);
    const std::size_t n = std::min(cfg.exchange_count(map.features.size()), map.features.size());
    const std::vector<std::size_t> order = retention_order(map.features, cfg);
    for (std::size_t r = order.size() - n; r < order.size(); ++r) remove[order[r]] = true;
    slots = n;
  } else {
    for (std::size_t a = 0; a < active.size(); ++a) {
      const MatchOutcome o = reg.outcomes[a];
      const bool drop = o == MatchOutcome::kMatchedIncorrectly ||
                        (cfg.kind == StrategyKind::kAggressive && o == MatchOutcome::kNotMatched);
      if (drop) {
        remove[active[a]] = true;
        ++slots;
      }
    }
    if (cfg.kind == StrategyKind::kSummary)
      slots = static_cast<std::size_t>(
          std::ceil(cfg.summary_add_fraction * static_cast<double>(view.size()) - 1e-9));
  }

  std::vector<Feature> kept;
  kept.reserve(map.features.size() + slots);
  for (std::size_t i = 0; i < map.features.size(); ++i) {
    if (remove[i])
      ++summary.removed;
    else
      kept.push_back(std::move(map.features[i]));
  }
  const std::size_t take = std::min(slots, candidates.size());
  std::vector<Feature> chosen;
  chosen.reserve(take);
  for (std::size_t c = 0; c < take; ++c) chosen.push_back(unmatched[candidates[c].view_index]);
  for (Feature& f : correct_positions(chosen, *reg.delta, image_width))
    kept.push_back(make_inserted(std::move(f), cfg, traversal));
  summary.inserted = take;
  map.features = std::move(kept);
  return summary;
}

AlternativeMatch select_best_alternative(const LocalMap& map, std::span<const Feature> view,
                                         const StrategyConfig& cfg, const RegistrationConfig& reg_cfg, double t) {
  AlternativeMatch best;
  bool have_success = false;
  for (std::size_t i = 0; i < map.experience_count(); ++i) {
    const std::span<const Feature> features = map.experience(i);
    std::vector<std::size_t> active = select_active_features(features, cfg, t);
    RegistrationResult result = register_view(features, active, view, reg_cfg);
    if (i == 0) {
      best = {0, result, active};
      have_success = result.succeeded();
      continue;
    }
    if (!result.succeeded()) continue;
    const bool better = !have_success || result.correct_count > best.result.correct_count ||
                        (result.correct_count == best.result.correct_count &&
                         map.experience_created_at(i) < map.experience_created_at(best.index));
    if (better) {
      best = {i, std::move(result), std::move(active)};
      have_success = true;
    }
  }
  return best;
}

}  // namespace longnav
