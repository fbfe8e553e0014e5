#include "longnav/registration.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>

#include "longnav/error.hpp"

using namespace longnav;

namespace {

Feature feat(double x, Descriptor d) { return Feature{.x = x, .y = 0.0, .descriptor = std::move(d), .temporal = {}}; }

std::vector<Feature> random_features(std::size_t n, Rng& rng, std::size_t width = 256) {
  std::uniform_real_distribution<double> x(100.0, 540.0);
  std::vector<Feature> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(feat(x(rng), Descriptor::random(width, rng)));
  return out;
}

std::vector<FeaturePair> pairs_at(std::initializer_list<double> dxs) {
  std::vector<FeaturePair> out;
  std::size_t i = 0;
  for (double d : dxs) out.push_back({i, i, d}), ++i;
  return out;
}

// Exhaustive mutual-nearest-neighbour oracle.
std::vector<std::pair<std::size_t, std::size_t>> mutual_oracle(const std::vector<Feature>& m,
                                                               const std::vector<Feature>& v, std::uint32_t dmax) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < m.size(); ++i) {
    std::size_t bj = 0;
    for (std::size_t j = 1; j < v.size(); ++j)
      if (hamming_distance(m[i].descriptor, v[j].descriptor) < hamming_distance(m[i].descriptor, v[bj].descriptor))
        bj = j;
    std::size_t bi = 0;
    for (std::size_t k = 1; k < m.size(); ++k)
      if (hamming_distance(m[k].descriptor, v[bj].descriptor) < hamming_distance(m[bi].descriptor, v[bj].descriptor))
        bi = k;
    if (bi == i && hamming_distance(m[i].descriptor, v[bj].descriptor) <= dmax) out.emplace_back(i, bj);
  }
  return out;
}

}  // namespace

TEST(MatchFeatures, IdentityMatchesEveryFeatureToItself) {
  Rng rng(1);
  const auto fs = random_features(10, rng);
  const auto pairs = match_features(fs, fs, 64);
  ASSERT_EQ(pairs.size(), 10u);
  for (const auto& p : pairs) {
    EXPECT_EQ(p.map_index, p.view_index);
    EXPECT_EQ(p.dx, 0.0);
  }
}

TEST(MatchFeatures, ThresholdExcludesDistantDescriptors) {
  Rng rng(2);
  const Descriptor a = Descriptor::random(256, rng);
  Descriptor b = a;
  for (std::size_t i = 0; i < 80; ++i) b.flip(i * 3);
  const std::vector<Feature> map{feat(1, a)}, view{feat(1, b)};
  EXPECT_TRUE(match_features(map, view, 64).empty());
  EXPECT_EQ(match_features(map, view, 80).size(), 1u);
}

TEST(MatchFeatures, PlantedPairsAgainstExhaustiveOracle) {
  Rng rng(3);
  const auto map = random_features(5, rng);
  auto view = random_features(2, rng);
  for (const Feature& f : map) {
    Feature g = f;
    g.descriptor.flip(rng() % 256);
    g.x += 7.0;
    view.push_back(g);
  }
  std::shuffle(view.begin(), view.end(), rng);
  const auto pairs = match_features(map, view, 64);
  const auto oracle = mutual_oracle(map, view, 64);
  ASSERT_EQ(pairs.size(), 5u);
  ASSERT_EQ(oracle.size(), 5u);
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_EQ(pairs[k].map_index, oracle[k].first);
    EXPECT_EQ(pairs[k].view_index, oracle[k].second);
    EXPECT_DOUBLE_EQ(pairs[k].dx, 7.0);
  }
}

TEST(MatchFeatures, EmptyInputsAndWidthMismatch) {
  Rng rng(4);
  const auto fs = random_features(3, rng);
  EXPECT_TRUE(match_features({}, fs, 64).empty());
  EXPECT_TRUE(match_features(fs, {}, 64).empty());
  EXPECT_THROW(match_features(fs, random_features(3, rng, 128), 64), InvalidInput);
}

TEST(MatchFeaturesProperty, RandomSetsAgreeWithOracleAndAreOneToOne) {
  Rng rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const auto map = random_features(1 + rng() % 30, rng, 64);
    const auto view = random_features(1 + rng() % 30, rng, 64);
    const auto pairs = match_features(map, view, 24);
    const auto oracle = mutual_oracle(map, view, 24);
    ASSERT_EQ(pairs.size(), oracle.size());
    std::vector<bool> seen_map(map.size()), seen_view(view.size());
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      EXPECT_EQ(pairs[k].map_index, oracle[k].first);
      EXPECT_EQ(pairs[k].view_index, oracle[k].second);
      EXPECT_FALSE(seen_map[pairs[k].map_index]);
      EXPECT_FALSE(seen_view[pairs[k].view_index]);
      seen_map[pairs[k].map_index] = seen_view[pairs[k].view_index] = true;
    }
  }
}

TEST(HistogramVote, DegenerateHistogram) {
  const Vote v = histogram_vote(pairs_at({7, 7, 7}), 10.0, 640.0);
  EXPECT_DOUBLE_EQ(v.delta, 7.0);
  EXPECT_EQ(v.winning_count, 3u);
}

TEST(HistogramVote, HandEnumeratedBins) {
  const Vote v = histogram_vote(pairs_at({12, 13, 11, 55, 12, -40}), 10.0, 640.0);
  EXPECT_DOUBLE_EQ(v.delta, 12.0);
  EXPECT_EQ(v.winning_count, 4u);
  // Bins [k*10, (k+1)*10) for k = -64..64.
  ASSERT_EQ(v.histogram.size(), 129u);
  EXPECT_DOUBLE_EQ(v.histogram.front().center, -635.0);
  EXPECT_DOUBLE_EQ(v.histogram.back().center, 645.0);
  std::map<double, std::size_t> nonzero;
  for (const auto& b : v.histogram)
    if (b.count > 0) nonzero[b.center] = b.count;
  EXPECT_EQ(nonzero, (std::map<double, std::size_t>{{-35.0, 1}, {15.0, 4}, {55.0, 1}}));
}

TEST(HistogramVote, TiesPreferTheBinNearestZero) {
  EXPECT_DOUBLE_EQ(histogram_vote(pairs_at({31, 32, 4, 6}), 10.0, 640.0).delta, 5.0);
  EXPECT_DOUBLE_EQ(histogram_vote(pairs_at({-25, -25, 25, 25}), 10.0, 640.0).delta, -25.0);
  EXPECT_DOUBLE_EQ(histogram_vote(pairs_at({-3, 3}), 10.0, 640.0).delta, -3.0);
}

TEST(HistogramVote, EmptyOrOutOfRange) {
  EXPECT_THROW(histogram_vote({}, 10.0, 640.0), NoConsensus);
  EXPECT_THROW(histogram_vote(pairs_at({700}), 10.0, 640.0), NoConsensus);
  EXPECT_THROW(histogram_vote(pairs_at({1}), 0.0, 640.0), InvalidInput);
}

TEST(ClassifyOutcomes, Examples) {
  auto all = classify_outcomes(3, pairs_at({4, 4, 4}), 4.0, 10.0);
  EXPECT_EQ(std::count(all.begin(), all.end(), MatchOutcome::kMatchedCorrectly), 3);
  auto wrong = classify_outcomes(1, pairs_at({29}), 4.0, 10.0);
  EXPECT_EQ(wrong[0], MatchOutcome::kMatchedIncorrectly);
  auto failed = classify_outcomes(3, pairs_at({4, 4}), std::nullopt, 10.0);
  EXPECT_EQ(std::count(failed.begin(), failed.end(), MatchOutcome::kNotMatched), 3);
}

TEST(ClassifyOutcomes, PerFeatureOracle) {
  std::vector<FeaturePair> pairs{{0, 0, 10.0}, {2, 1, 12.0}, {3, 2, 1.0}, {5, 3, 40.0}};
  const auto out = classify_outcomes(6, pairs, 10.0, 10.0);
  std::vector<MatchOutcome> oracle(6, MatchOutcome::kNotMatched);
  for (const auto& p : pairs)
    oracle[p.map_index] =
        std::abs(p.dx - 10.0) <= 10.0 ? MatchOutcome::kMatchedCorrectly : MatchOutcome::kMatchedIncorrectly;
  EXPECT_EQ(out, oracle);
  EXPECT_EQ(std::count(out.begin(), out.end(), MatchOutcome::kMatchedCorrectly), 3);
  EXPECT_EQ(std::count(out.begin(), out.end(), MatchOutcome::kMatchedIncorrectly), 1);
  EXPECT_EQ(std::count(out.begin(), out.end(), MatchOutcome::kNotMatched), 2);
}

TEST(ClassifyOutcomes, RejectsInconsistentPairs) {
  EXPECT_THROW(classify_outcomes(1, pairs_at({1, 1}), 1.0, 10.0), InvalidInput);
  std::vector<FeaturePair> dup{{0, 0, 1.0}, {0, 1, 1.0}};
  EXPECT_THROW(classify_outcomes(2, dup, 1.0, 10.0), InvalidInput);
}

TEST(RegisterView, FailsWithoutEnoughVotes) {
  Rng rng(6);
  const auto map = random_features(2, rng);
  RegistrationConfig cfg;
  const auto r = register_view(map, map, cfg);
  EXPECT_FALSE(r.succeeded());
  EXPECT_EQ(r.pairs.size(), 2u);
  EXPECT_EQ(r.count(MatchOutcome::kNotMatched), 2u);
  EXPECT_EQ(r.correct_count, 0u);
  const auto none = register_view(map, random_features(20, rng), cfg);
  EXPECT_FALSE(none.succeeded());
}

TEST(RegisterView, ActiveSubsetIndicesAreLocal) {
  Rng rng(7);
  const auto map = random_features(10, rng);
  std::vector<Feature> view;
  for (std::size_t i : {2u, 5u, 7u, 9u}) {
    Feature f = map[i];
    f.x += 3.0;
    view.push_back(f);
  }
  const std::vector<std::size_t> active{9, 7, 5, 0};
  const auto r = register_view(map, active, view, RegistrationConfig{});
  ASSERT_TRUE(r.succeeded());
  EXPECT_DOUBLE_EQ(*r.delta, 3.0);
  ASSERT_EQ(r.outcomes.size(), 4u);
  EXPECT_EQ(r.outcomes[3], MatchOutcome::kNotMatched);
  EXPECT_EQ(r.correct_count, 3u);
}

TEST(RegistrationProperty, ShiftEquivarianceAndPartition) {
  Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const auto map = random_features(60, rng);
    std::vector<Feature> view;
    std::normal_distribution<double> jitter(0.0, 1.0);
    for (const Feature& f : map) {
      if (rng() % 4 == 0) continue;
      Feature g = f;
      g.x += 20.0 + jitter(rng);
      g.descriptor.flip(rng() % 256);
      view.push_back(g);
    }
    const auto extra = random_features(15, rng);
    view.insert(view.end(), extra.begin(), extra.end());

    RegistrationConfig cfg;
    const auto base = register_view(map, view, cfg);
    ASSERT_TRUE(base.succeeded());
    EXPECT_EQ(base.count(MatchOutcome::kNotMatched) + base.count(MatchOutcome::kMatchedCorrectly) +
                  base.count(MatchOutcome::kMatchedIncorrectly),
              map.size());
    EXPECT_LE(std::abs(*base.delta - 20.0), cfg.bin_width);

    const double s = std::uniform_real_distribution<double>(-50.0, 50.0)(rng);
    auto shifted = view;
    for (Feature& f : shifted) f.x += s;
    const auto moved = register_view(map, shifted, cfg);
    ASSERT_TRUE(moved.succeeded());
    EXPECT_LE(std::abs(*moved.delta - *base.delta - s), cfg.bin_width);
    EXPECT_EQ(moved.outcomes, base.outcomes);
  }
}

TEST(RegistrationProperty, CleanPlantedShiftIsRecovered) {
  Rng rng(9);
  std::uniform_real_distribution<double> shift(-100.0, 100.0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto map = random_features(80, rng);
    const double gamma = shift(rng);
    std::vector<Feature> view = map;
    for (Feature& f : view) f.x += gamma;
    const auto r = register_view(map, view, RegistrationConfig{});
    ASSERT_TRUE(r.succeeded());
    EXPECT_NEAR(*r.delta, gamma, 1e-9);
    EXPECT_GE(*r.delta, -640.0);
    EXPECT_LE(*r.delta, 640.0);
    EXPECT_EQ(r.correct_count, 80u);
  }
}

TEST(RegistrationConfig, DefaultsAndValidation) {
  RegistrationConfig c;
  EXPECT_EQ(c.distance_threshold(256), 64u);
  EXPECT_EQ(c.correct_tolerance(), 10.0);
  c.max_distance = 30;
  c.tolerance = 4.0;
  EXPECT_EQ(c.distance_threshold(256), 30u);
  EXPECT_EQ(c.correct_tolerance(), 4.0);
  c.bin_width = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
}
