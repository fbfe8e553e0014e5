#include "longnav/feature.hpp"

#include <algorithm>
#include <string>

#include "longnav/error.hpp"

namespace longnav {

std::span<const Feature> LocalMap::experience(std::size_t i) const {
  if (i == 0) return features;
  if (i > alternatives.size()) throw OutOfRange("experience index out of range");
  return alternatives[i - 1].features;
}

int LocalMap::experience_created_at(std::size_t i) const {
  if (i == 0) return 0;
  if (i > alternatives.size()) throw OutOfRange("experience index out of range");
  return alternatives[i - 1].created_at;
}

std::size_t LocalMap::total_features() const {
  std::size_t n = features.size();
  for (const auto& alt : alternatives) n += alt.features.size();
  return n;
}

void PathMap::validate() const {
  if (local_maps.empty()) throw InvalidInput("path has no local maps");
  for (std::size_t i = 0; i < local_maps.size(); ++i) {
    const LocalMap& m = local_maps[i];
    if (i > 0 && !(m.odometry_distance > local_maps[i - 1].odometry_distance))
      throw InvalidInput("local map odometry distances must be strictly increasing");
    for (const Feature& f : m.features) {
      if (f.descriptor.width() != descriptor_width)
        throw InvalidInput("local map " + std::to_string(i) + " holds a descriptor of the wrong width");
      if (!(f.x >= 0.0 && f.x < image_width))
        throw InvalidInput("local map " + std::to_string(i) + " holds a feature outside the image");
    }
  }
}

std::size_t local_map_index_at(const PathMap& path, double d) {
  if (path.local_maps.empty()) throw OutOfRange("path has no local maps");
  if (!(d >= path.local_maps.front().odometry_distance) || !(d <= path.local_maps.back().odometry_distance))
    throw OutOfRange("odometry distance " + std::to_string(d) + " m is outside the taught path");
  const auto it = std::upper_bound(path.local_maps.begin(), path.local_maps.end(), d,
                                   [](double v, const LocalMap& m) { return v < m.odometry_distance; });
  return static_cast<std::size_t>(std::distance(path.local_maps.begin(), it)) - 1;
}

const LocalMap& local_map_at(const PathMap& path, double d) {
  return path.local_maps[local_map_index_at(path, d)];
}

DescriptorBlock pack_descriptors(std::span<const Feature> features, std::size_t width_bits) {
  DescriptorBlock block(width_bits);
  block.reserve(features.size());
  for (const Feature& f : features) block.append(f.descriptor);
  return block;
}

DescriptorBlock pack_descriptors(std::span<const Feature> features, std::span<const std::size_t> subset,
                                 std::size_t width_bits) {
  DescriptorBlock block(width_bits);
  block.reserve(subset.size());
  for (std::size_t i : subset) block.append(features[i].descriptor);
  return block;
}

}  // namespace longnav
