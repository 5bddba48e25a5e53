#include "pedintent/fixture.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <system_error>

#include "pedintent/error.hpp"
#include "pedintent/random.hpp"

namespace pedintent {

namespace {

template <typename E>
E pick(Rng& rng) {
  return static_cast<E>(uniform_below(rng, token_count<E>()));
}

bool coin(Rng& rng, double p) { return uniform01(rng) < p; }

std::string clip_name(int c) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "clip_%04d", c + 1);
  return buf;
}

std::uint64_t frame_seed(std::uint64_t seed, std::size_t sample_index) {
  // splitmix64 step so neighbouring frames get unrelated noise
  std::uint64_t z = seed * 0x9e3779b97f4a7c15ULL + sample_index + 1;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint8_t clamp8(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

void put(RgbImage& img, int x, int y, double v) {
  if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
  auto* p = img.at(x, y);
  p[0] = clamp8(v);
  p[1] = clamp8(v * 0.92);
  p[2] = clamp8(v * 0.85);
}

}  // namespace

Dataset generate_fixture_annotations(const FixtureOptions& o) {
  if (o.clips < 1 || o.frames_per_clip < 1) throw UsageError("fixture sizes must be >= 1");
  if (o.box_width > o.image_width - 2 || o.box_height > o.image_height - 2) {
    throw UsageError("fixture box does not fit the image");
  }
  Rng rng(o.seed);
  std::vector<PedestrianSample> samples;
  for (int c = 0; c < o.clips; ++c) {
    for (int f = 0; f < o.frames_per_clip; ++f) {
      PedestrianSample s;
      s.clip_id = clip_name(c);
      s.frame_index = f;
      s.bbox.w = o.box_width;
      s.bbox.h = o.box_height;
      s.bbox.x = 1 + static_cast<int>(uniform_below(rng, o.image_width - o.box_width - 1));
      s.bbox.y = 1 + static_cast<int>(uniform_below(rng, o.image_height - o.box_height - 1));
      s.bbox.kind = BoxKind::pedestrian;

      BehaviorLabels b;
      b.head = coin(rng, 0.5) ? HeadOrientation::looking : HeadOrientation::not_looking;
      b.motion = coin(rng, o.walking_probability) ? Motion::walking : Motion::standing;
      b.direction = pick<Direction>(rng);
      b.driver_action = static_cast<DriverAction>(uniform_below(rng, 4));
      s.behavior = b;
      s.demographics = Demographics{pick<Age>(rng), pick<Gender>(rng)};

      s.scene.lanes = 1 + static_cast<int>(uniform_below(rng, 6));
      s.scene.location = pick<Location>(rng);
      s.scene.signalized = coin(rng, 0.5);
      s.scene.designed = coin(rng, o.designed_probability);
      s.scene.weather = pick<Weather>(rng);
      s.scene.time_of_day = pick<TimeOfDay>(rng);

      bool crossing = b.motion == Motion::walking && s.scene.designed;
      if (coin(rng, o.label_noise)) crossing = !crossing;
      s.crossing = crossing ? Crossing::crossing : Crossing::not_crossing;
      samples.push_back(s);

      if (o.bystander_every > 0 && f % o.bystander_every == o.bystander_every - 1) {
        PedestrianSample by;
        by.clip_id = s.clip_id;
        by.frame_index = f;
        by.bbox = {0, 0, std::max(8, o.box_width / 3), std::max(8, o.box_height / 3), BoxKind::bystander};
        by.scene = s.scene;
        samples.push_back(by);
      }
    }
  }
  return Dataset(std::move(samples));
}

RgbImage render_fixture_frame(const FixtureOptions& o, const PedestrianSample& s, std::uint64_t seed) {
  Rng rng(seed);
  RgbImage img(o.image_width, o.image_height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) put(img, x, y, 100.0 + 40.0 * (uniform01(rng) - 0.5));
  }
  const auto& box = s.bbox;
  const int band = std::max(1, box.h / 3);
  const bool looking = s.behavior->head == HeadOrientation::looking;
  const bool walking = s.behavior->motion == Motion::walking;

  // head third: dark backdrop with a bright disc on one side
  const double cx = box.x + (looking ? 0.28 : 0.72) * box.w + 6.0 * (uniform01(rng) - 0.5);
  const double cy = box.y + 0.5 * band + 6.0 * (uniform01(rng) - 0.5);
  const double radius = 0.2 * box.w;
  for (int y = box.y; y < box.y + band; ++y) {
    for (int x = box.x; x < box.x + box.w; ++x) {
      const bool inside = std::hypot(x - cx, y - cy) <= radius;
      put(img, x, y, (inside ? 215.0 : 60.0) + 30.0 * (uniform01(rng) - 0.5));
    }
  }
  // torso third: flat
  for (int y = box.y + band; y < box.y + box.h - band; ++y) {
    for (int x = box.x; x < box.x + box.w; ++x) put(img, x, y, 130.0 + 20.0 * (uniform01(rng) - 0.5));
  }
  // leg third: stripes, diagonal when walking
  const double period = 10.0 + 2.0 * uniform01(rng);
  const double phase = 2.0 * std::numbers::pi * uniform01(rng);
  for (int y = box.y + box.h - band; y < box.y + box.h; ++y) {
    for (int x = box.x; x < box.x + box.w; ++x) {
      const double u = walking ? (x + y) / std::numbers::sqrt2 : static_cast<double>(x);
      const bool on = std::sin(2.0 * std::numbers::pi * u / period + phase) > 0.0;
      put(img, x, y, (on ? 190.0 : 70.0) + 30.0 * (uniform01(rng) - 0.5));
    }
  }
  return img;
}

Dataset generate_fixture(const FixtureOptions& o, const std::filesystem::path& out_dir) {
  auto dataset = generate_fixture_annotations(o);
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "images", ec);
  if (ec) throw DataError("cannot create fixture directory " + out_dir.string() + ": " + ec.message());
  save_annotations(dataset, out_dir / "annotations.tsv");
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& s = dataset[i];
    if (s.bbox.kind != BoxKind::pedestrian) continue;
    const auto path = out_dir / "images" / s.image_path();
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw DataError("cannot create " + path.parent_path().string() + ": " + ec.message());
    write_png(render_fixture_frame(o, s, frame_seed(o.seed, i)), path);
  }
  return dataset;
}

}  // namespace pedintent
