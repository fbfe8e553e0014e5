#include "longnav/feature.hpp"

#include <gtest/gtest.h>

#include "longnav/error.hpp"

using namespace longnav;

namespace {

PathMap path_at(std::initializer_list<double> distances) {
  PathMap p;
  p.descriptor_width = 8;
  std::size_t i = 0;
  for (double d : distances) {
    LocalMap m;
    m.index = i++;
    m.odometry_distance = d;
    m.features.push_back(Feature{.x = 1.0, .y = 1.0, .descriptor = Descriptor(8), .temporal = {}});
    p.local_maps.push_back(m);
  }
  return p;
}

}  // namespace

TEST(LocalMapAt, FloorSemantics) {
  const PathMap p = path_at({0.0, 1.0, 2.0});
  EXPECT_EQ(local_map_index_at(p, 1.4), 1u);
  EXPECT_EQ(local_map_index_at(p, 0.0), 0u);
  EXPECT_EQ(local_map_index_at(p, 2.0), 2u);
  EXPECT_EQ(&local_map_at(p, 0.99), &p.local_maps[0]);
}

TEST(LocalMapAt, OutsideThePathThrows) {
  const PathMap p = path_at({0.0, 1.0, 2.0});
  EXPECT_THROW(local_map_index_at(p, -0.1), OutOfRange);
  EXPECT_THROW(local_map_index_at(p, 2.01), OutOfRange);
  EXPECT_THROW(local_map_index_at(PathMap{}, 0.0), OutOfRange);
}

TEST(LocalMapAt, MonotoneInDistance) {
  const PathMap p = path_at({0.0, 0.5, 1.5, 1.75, 4.0});
  std::size_t prev = 0;
  for (double d = 0.0; d <= 4.0; d += 0.01) {
    const std::size_t i = local_map_index_at(p, d);
    EXPECT_GE(i, prev);
    EXPECT_LE(p.local_maps[i].odometry_distance, d);
    prev = i;
  }
}

TEST(PathMap, Validate) {
  EXPECT_NO_THROW(path_at({0.0, 1.0}).validate());
  EXPECT_THROW(path_at({1.0, 1.0}).validate(), InvalidInput);
  EXPECT_THROW(PathMap{}.validate(), InvalidInput);
  PathMap p = path_at({0.0, 1.0});
  p.local_maps[1].features.clear();
  EXPECT_NO_THROW(p.validate());
  p.local_maps[0].features[0].x = 640.0;
  EXPECT_THROW(p.validate(), InvalidInput);
  p = path_at({0.0, 1.0});
  p.local_maps[0].features[0].descriptor = Descriptor(16);
  EXPECT_THROW(p.validate(), InvalidInput);
}

TEST(LocalMap, ExperiencesStartWithTheTaughtFeatures) {
  LocalMap m;
  m.features.resize(3, Feature{.descriptor = Descriptor(8), .temporal = {}});
  m.alternatives.push_back({std::vector<Feature>(5, Feature{.descriptor = Descriptor(8), .temporal = {}}), 4});
  EXPECT_EQ(m.experience_count(), 2u);
  EXPECT_EQ(m.experience(0).size(), 3u);
  EXPECT_EQ(m.experience(1).size(), 5u);
  EXPECT_EQ(m.experience_created_at(1), 4);
  EXPECT_EQ(m.total_features(), 8u);
  EXPECT_THROW(m.experience(2), OutOfRange);
}

TEST(PackDescriptors, SubsetKeepsOrder) {
  Rng rng(1);
  std::vector<Feature> fs(4);
  for (auto& f : fs) f.descriptor = Descriptor::random(64, rng);
  const std::vector<std::size_t> subset{3, 1};
  const DescriptorBlock b = pack_descriptors(fs, subset, 64);
  ASSERT_EQ(b.rows(), 2u);
  EXPECT_EQ(b.data()[0], fs[3].descriptor.words()[0]);
  EXPECT_EQ(b.data()[1], fs[1].descriptor.words()[0]);
}
