#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "longnav/descriptor.hpp"
#include "longnav/fremen.hpp"

namespace longnav {

/// An image feature. `score` drives the score-based strategy and `temporal`
/// the FreMEn strategy; whichever the active strategy does not use is ignored.
struct Feature {
  double x = 0.0;  // horizontal image coordinate, px, sub-pixel
  double y = 0.0;
  Descriptor descriptor;
  double score = 0.0;
  std::optional<FremenModel> temporal;
  int inserted_at = 0;  // traversal index; 0 = taught
};

/// A stored appearance of one location (multiple-map strategy).
struct Experience {
  std::vector<Feature> features;
  int created_at = 0;
};

struct LocalMap {
  std::size_t index = 0;
  double odometry_distance = 0.0;  // m
  std::vector<Feature> features;
  // Extra experiences beyond `features`, which is always experience 0.
  std::vector<Experience> alternatives;

  std::size_t experience_count() const { return 1 + alternatives.size(); }
  std::span<const Feature> experience(std::size_t i) const;
  int experience_created_at(std::size_t i) const;
  std::size_t total_features() const;
};

struct PathMap {
  std::vector<LocalMap> local_maps;
  double image_width = 640.0;
  std::size_t descriptor_width = kDefaultDescriptorWidth;
  double taught_at = 0.0;  // s

  /// Throws InvalidInput for an empty path, distances that are not strictly
  /// increasing, or features of the wrong width or outside the image.
  void validate() const;
};

/// The local map with the greatest odometry distance <= d.
/// Throws OutOfRange for d < 0 or d beyond the last map.
const LocalMap& local_map_at(const PathMap& path, double d);
std::size_t local_map_index_at(const PathMap& path, double d);

DescriptorBlock pack_descriptors(std::span<const Feature> features, std::size_t width_bits);
DescriptorBlock pack_descriptors(std::span<const Feature> features, std::span<const std::size_t> subset,
                                 std::size_t width_bits);

}  // namespace longnav
