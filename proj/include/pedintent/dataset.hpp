#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pedintent/image.hpp"

namespace pedintent {

enum class BoxKind { pedestrian, bystander, group };
enum class HeadOrientation { looking, not_looking };
enum class Motion { walking, standing };
enum class Direction { lateral, longitudinal };
enum class DriverAction { moving_fast, moving_slow, slowing_down, speeding_up, stopped };
enum class Age { child, young, adult, senior };
enum class Gender { male, female };
enum class Location { street, indoor, plaza };
enum class Weather { clear, cloudy, rain, snow };
enum class TimeOfDay { day, night };
enum class Crossing { crossing, not_crossing };

template <typename E>
struct EnumTokens;

#define PEDINTENT_TOKENS(E, ...)                                      \
  template <>                                                         \
  struct EnumTokens<E> {                                              \
    static constexpr std::string_view names[] = {__VA_ARGS__};        \
    static constexpr std::string_view type_name = #E;                 \
  };

PEDINTENT_TOKENS(BoxKind, "pedestrian", "bystander", "group")
PEDINTENT_TOKENS(HeadOrientation, "looking", "not_looking")
PEDINTENT_TOKENS(Motion, "walking", "standing")
PEDINTENT_TOKENS(Direction, "lateral", "longitudinal")
PEDINTENT_TOKENS(DriverAction, "moving_fast", "moving_slow", "slowing_down",
                 "speeding_up", "stopped")
PEDINTENT_TOKENS(Age, "child", "young", "adult", "senior")
PEDINTENT_TOKENS(Gender, "male", "female")
PEDINTENT_TOKENS(Location, "street", "indoor", "plaza")
PEDINTENT_TOKENS(Weather, "clear", "cloudy", "rain", "snow")
PEDINTENT_TOKENS(TimeOfDay, "day", "night")
PEDINTENT_TOKENS(Crossing, "crossing", "not_crossing")

#undef PEDINTENT_TOKENS

template <typename E>
constexpr std::size_t token_count() {
  return std::size(EnumTokens<E>::names);
}

template <typename E>
constexpr std::string_view to_token(E value) {
  return EnumTokens<E>::names[static_cast<std::size_t>(value)];
}

template <typename E>
std::optional<E> parse_token(std::string_view text) {
  const auto& names = EnumTokens<E>::names;
  for (std::size_t i = 0; i < std::size(names); ++i) {
    if (names[i] == text) return static_cast<E>(i);
  }
  return std::nullopt;
}

struct BoundingBox {
  int x = 0;
  int y = 0;
  int w = 1;
  int h = 1;
  BoxKind kind = BoxKind::pedestrian;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct BehaviorLabels {
  HeadOrientation head = HeadOrientation::looking;
  Motion motion = Motion::walking;
  Direction direction = Direction::lateral;
  DriverAction driver_action = DriverAction::moving_fast;
};

struct Demographics {
  Age age = Age::adult;
  Gender gender = Gender::male;
};

struct SceneContext {
  int lanes = 1;
  Location location = Location::street;
  bool signalized = false;
  bool designed = false;
  Weather weather = Weather::clear;
  TimeOfDay time_of_day = TimeOfDay::day;
};

/// One annotated frame of one person box. Behavior and demographics are
/// present for every pedestrian-kind box and may be absent ("-") for
/// bystanders and groups.
struct PedestrianSample {
  std::string clip_id;
  int frame_index = 0;
  BoundingBox bbox;
  std::optional<BehaviorLabels> behavior;
  std::optional<Demographics> demographics;
  SceneContext scene;
  std::optional<Crossing> crossing;

  /// Stable textual id, unique within a dataset:
  /// `<clip_id>/<frame_index>/<x>_<y>_<w>_<h>`.
  std::string id() const;

  /// Image path relative to the image root: `<clip_id>/<frame_index>.png`.
  std::filesystem::path image_path() const;

  bool trainable() const {
    return bbox.kind == BoxKind::pedestrian && behavior && demographics;
  }
};

/// Immutable after loading; indices into `samples` serve as sample ids in
/// splits.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<PedestrianSample> samples);

  const std::vector<PedestrianSample>& samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  const PedestrianSample& operator[](std::size_t i) const { return samples_[i]; }

  /// Distinct clip ids in lexicographic order.
  std::vector<std::string> clips() const;

  /// Subset in the given index order.
  Dataset subset(std::span<const std::size_t> indices) const;

 private:
  std::vector<PedestrianSample> samples_;
};

Dataset load_annotations(const std::filesystem::path& path);
Dataset parse_annotations(std::string_view text, std::string_view source = "<memory>");

std::string format_annotation_line(const PedestrianSample& s);
void save_annotations(const Dataset& dataset, const std::filesystem::path& path);

enum class BodyPart { head, legs };

/// Top (head) or bottom (legs) third of the box, floor(h/3) rows with a
/// minimum of one, full box width, clipped to the image.
RgbImage crop_region(const RgbImage& image, const BoundingBox& bbox, BodyPart part);

enum class SplitMethod { A_by_clip, B_by_frame };

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  SplitMethod method = SplitMethod::B_by_frame;
  std::uint64_t seed = 0;
};

Split split_by_clip(const Dataset& dataset, double train_fraction, std::uint64_t seed);
Split split_by_frame(const Dataset& dataset, double train_fraction, std::uint64_t seed);

/// Train-clip ratios for the clip-level split: 159 of 233 head clips, 139 of 204 motion clips.
inline constexpr double kHeadClipFraction = 159.0 / 233.0;
inline constexpr double kMotionClipFraction = 139.0 / 204.0;
inline constexpr double kFrameFraction = 0.6;

/// Positions (ascending) of the entries kept after down-sampling the
/// majority class to the minority count. Labels are 0/1.
std::vector<std::size_t> balance_classes(std::span<const int> labels, std::uint64_t seed);

template <typename T, typename LabelFn>
std::vector<T> balance_classes(std::span<const T> items, LabelFn label_of, std::uint64_t seed) {
  std::vector<int> labels;
  labels.reserve(items.size());
  for (const auto& item : items) labels.push_back(label_of(item) ? 1 : 0);
  std::vector<T> out;
  for (auto i : balance_classes(std::span<const int>(labels), seed)) out.push_back(items[i]);
  return out;
}

}  // namespace pedintent
