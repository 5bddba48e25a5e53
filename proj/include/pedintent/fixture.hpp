#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>

#include "pedintent/dataset.hpp"

namespace pedintent {

/// Synthetic stand-in corpus. Head crops of "looking" pedestrians carry a
/// bright disc in the left half (right half for "not looking"); leg crops
/// of walkers carry diagonal stripes (vertical when standing). Every
/// pedestrian has a crossing label drawn from crossing = walking AND
/// designed, flipped with probability `label_noise`.
struct FixtureOptions {
  std::uint64_t seed = 1;
  int clips = 10;
  int frames_per_clip = 20;
  int image_width = 128;
  int image_height = 240;
  int box_width = 60;
  int box_height = 180;
  double walking_probability = std::sqrt(0.5);   // makes the planted rule true half the time
  double designed_probability = std::sqrt(0.5);
  double label_noise = 0.1;
  int bystander_every = 7;  // every n-th frame also annotates a bystander box; 0 disables
};

/// Writes `<out>/annotations.tsv` and `<out>/images/<clip>/<frame>.png`.
Dataset generate_fixture(const FixtureOptions& options, const std::filesystem::path& out_dir);

/// Annotations only, no images.
Dataset generate_fixture_annotations(const FixtureOptions& options);

/// Renders the frame holding `pedestrian`, which must carry behavior labels.
RgbImage render_fixture_frame(const FixtureOptions& options, const PedestrianSample& pedestrian,
                              std::uint64_t frame_seed);

}  // namespace pedintent
