#include "pedintent/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>

#include "pedintent/error.hpp"

namespace pedintent {

std::string_view to_string(Task task) {
  switch (task) {
    case Task::head: return "head";
    case Task::motion: return "motion";
    case Task::intent: return "intent";
  }
  return "?";
}

Task parse_task(std::string_view text) {
  if (text == "head") return Task::head;
  if (text == "motion") return Task::motion;
  if (text == "intent") return Task::intent;
  throw UsageError("unknown task '" + std::string(text) + "'");
}

std::string_view split_name(SplitMethod method) { return method == SplitMethod::A_by_clip ? "A" : "B"; }

std::filesystem::path RunConfig::annotations_path() const {
  if (!annotations.empty()) return annotations;
  throw UsageError(std::string("no annotation file given (use --annotations or set ") + kDataRootEnv + ")");
}

std::filesystem::path RunConfig::images_path() const {
  if (!images.empty()) return images;
  throw UsageError(std::string("no image directory given (use --images or set ") + kDataRootEnv + ")");
}

double RunConfig::effective_split_fraction() const {
  if (split_fraction > 0.0) return split_fraction;
  if (split == SplitMethod::B_by_frame) return kFrameFraction;
  return task == Task::motion ? kMotionClipFraction : kHeadClipFraction;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "task",          "feature",        "classifier",         "split",
      "seed",          "annotations",    "images",             "cnn-features",
      "out",           "strict",         "batch",              "balance-test",
      "split-fraction", "crop-size",     "lbp-sampling",       "mlp-epochs",
      "threads",       "clips",          "frames",             "driver-action-states",
      "lanes",         "head-predictions", "motion-predictions"};
  return keys;
}

namespace {

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || end != value.data() + value.size()) {
    throw UsageError("invalid value '" + std::string(value) + "' for " + std::string(key));
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes" || value.empty()) return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw UsageError("invalid boolean '" + std::string(value) + "' for " + std::string(key));
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

void apply_setting(RunConfig& c, std::string_view key, std::string_view value) {
  if (key == "task") c.task = parse_task(value);
  else if (key == "feature") c.feature = parse_feature_source(value);
  else if (key == "classifier") c.classifier = parse_classifier_kind(value);
  else if (key == "split") {
    if (value == "A" || value == "a") c.split = SplitMethod::A_by_clip;
    else if (value == "B" || value == "b") c.split = SplitMethod::B_by_frame;
    else throw UsageError("split must be A or B");
  } else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "annotations") c.annotations = std::string(value);
  else if (key == "images") c.images = std::string(value);
  else if (key == "cnn-features") c.cnn_features = std::string(value);
  else if (key == "out") c.out = std::string(value);
  else if (key == "strict") c.strict = parse_bool(key, value);
  else if (key == "batch") c.batch = parse_bool(key, value);
  else if (key == "balance-test") c.balance_test = parse_bool(key, value);
  else if (key == "split-fraction") {
    const auto text = std::string(value);
    char* end = nullptr;
    const double f = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size() || !(f > 0.0 && f < 1.0)) {
      throw UsageError("split-fraction must be a number in (0,1)");
    }
    c.split_fraction = f;
  } else if (key == "crop-size") {
    c.crop_size = parse_number<int>(key, value);
    if (c.crop_size < 40) throw UsageError("crop-size must be at least 40");
  } else if (key == "lbp-sampling") {
    if (value == "nearest") c.lbp_sampling = LbpSampling::nearest;
    else if (value == "bilinear") c.lbp_sampling = LbpSampling::bilinear;
    else throw UsageError("lbp-sampling must be nearest or bilinear");
  } else if (key == "mlp-epochs") c.mlp_epochs = parse_number<std::size_t>(key, value);
  else if (key == "threads") c.threads = parse_number<int>(key, value);
  else if (key == "clips") c.clips = parse_number<int>(key, value);
  else if (key == "frames") c.frames = parse_number<int>(key, value);
  else if (key == "driver-action-states") {
    const int n = parse_number<int>(key, value);
    if (n != 4 && n != 5) throw UsageError("driver-action-states must be 4 or 5");
    c.five_state_driver_action = n == 5;
  } else if (key == "lanes") {
    if (value == "numeric") c.lanes_one_hot = false;
    else if (value == "one_hot") c.lanes_one_hot = true;
    else throw UsageError("lanes must be numeric or one_hot");
  } else if (key == "head-predictions") c.head_predictions = std::string(value);
  else if (key == "motion-predictions") c.motion_predictions = std::string(value);
  else throw UsageError("unknown setting '" + std::string(key) + "'");
}

void load_config_file(RunConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path.string());
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw UsageError(path.string() + ":" + std::to_string(line_no) + ": expected key=value");
    }
    try {
      apply_setting(config, trim(view.substr(0, eq)), trim(view.substr(eq + 1)));
    } catch (const UsageError& e) {
      throw UsageError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void apply_environment(RunConfig& config) {
  const char* root = std::getenv(kDataRootEnv);
  if (!root || !*root) return;
  if (config.annotations.empty()) config.annotations = std::filesystem::path(root) / "annotations.tsv";
  if (config.images.empty()) config.images = std::filesystem::path(root) / "images";
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace pedintent
