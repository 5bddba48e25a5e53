#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pedintent/dataset.hpp"
#include "pedintent/features.hpp"
#include "pedintent/learners.hpp"

namespace pedintent {

enum class Task { head, motion, intent };

std::string_view to_string(Task task);
Task parse_task(std::string_view text);
std::string_view split_name(SplitMethod method);  // "A" / "B"

/// Environment variable naming the default data root; annotations are read
/// from `<root>/annotations.tsv` and images from `<root>/images`.
inline constexpr const char* kDataRootEnv = "PEDINTENT_DATA_ROOT";

/// Everything a command needs. Flat `key=value` config files use the same
/// keys as the command-line flags.
struct RunConfig {
  Task task = Task::head;
  FeatureSource feature = FeatureSource::hog;
  ClassifierKind classifier = ClassifierKind::svm;
  SplitMethod split = SplitMethod::B_by_frame;
  std::uint64_t seed = 1;

  std::filesystem::path annotations;
  std::filesystem::path images;
  std::filesystem::path cnn_features;
  std::filesystem::path out = "out";

  bool strict = false;         // missing images abort extraction instead of being skipped
  bool batch = false;          // train-eval: every feature x classifier pair for the task
  bool balance_test = false;   // also down-sample the test side
  double split_fraction = 0;   // 0 selects the per-method default
  int crop_size = 220;
  LbpSampling lbp_sampling = LbpSampling::nearest;
  std::size_t mlp_epochs = 300;
  int threads = 0;             // 0 = hardware concurrency

  int clips = 10;              // fixture
  int frames = 20;

  bool five_state_driver_action = false;  // select
  bool lanes_one_hot = false;
  std::filesystem::path head_predictions;
  std::filesystem::path motion_predictions;

  std::filesystem::path annotations_path() const;
  std::filesystem::path images_path() const;
  double effective_split_fraction() const;
};

/// Keys accepted by apply_setting, in help order.
const std::vector<std::string>& config_keys();

void apply_setting(RunConfig& config, std::string_view key, std::string_view value);
void load_config_file(RunConfig& config, const std::filesystem::path& path);

/// Fills annotation/image defaults from the data-root environment variable.
void apply_environment(RunConfig& config);

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace pedintent
