#include "pedintent/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "pedintent/error.hpp"
#include "pedintent/random.hpp"

namespace pedintent {

std::string PedestrianSample::id() const {
  std::ostringstream out;
  out << clip_id << '/' << frame_index << '/' << bbox.x << '_' << bbox.y << '_' << bbox.w << '_'
      << bbox.h;
  return out.str();
}

std::filesystem::path PedestrianSample::image_path() const {
  return std::filesystem::path(clip_id) / (std::to_string(frame_index) + ".png");
}

Dataset::Dataset(std::vector<PedestrianSample> samples) : samples_(std::move(samples)) {}

std::vector<std::string> Dataset::clips() const {
  std::set<std::string> unique;
  for (const auto& s : samples_) unique.insert(s.clip_id);
  return {unique.begin(), unique.end()};
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  std::vector<PedestrianSample> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(samples_.at(i));
  return Dataset(std::move(out));
}

namespace {

constexpr std::size_t kFieldCount = 20;

constexpr std::string_view kFieldNames[kFieldCount] = {
    "clip_id", "frame_index", "x",          "y",         "w",        "h",       "kind",
    "head",    "motion",      "direction",  "driver_action", "age",  "gender",  "lanes",
    "location", "signalized", "designed",   "weather",   "time_of_day", "crossing"};

class LineParser {
 public:
  LineParser(std::string_view source, std::size_t line, std::vector<std::string_view> fields)
      : source_(source), line_(line), fields_(std::move(fields)) {}

  [[noreturn]] void fail(std::size_t field, const std::string& what) const {
    std::ostringstream out;
    out << source_ << ":" << line_ << ": field '" << kFieldNames[field] << "': " << what;
    throw DataError(out.str());
  }

  std::string_view raw(std::size_t field) const { return fields_[field]; }
  bool absent(std::size_t field) const { return fields_[field] == "-"; }

  int integer(std::size_t field) const {
    const auto text = fields_[field];
    int value = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || end != text.data() + text.size()) {
      fail(field, "expected integer, got '" + std::string(text) + "'");
    }
    return value;
  }

  bool boolean(std::size_t field) const {
    const auto text = fields_[field];
    if (text == "true") return true;
    if (text == "false") return false;
    fail(field, "expected true/false, got '" + std::string(text) + "'");
  }

  template <typename E>
  E token(std::size_t field) const {
    const auto text = fields_[field];
    if (auto v = parse_token<E>(text)) return *v;
    fail(field, "unknown " + std::string(EnumTokens<E>::type_name) + " token '" +
                    std::string(text) + "'");
  }

 private:
  std::string_view source_;
  std::size_t line_;
  std::vector<std::string_view> fields_;
};

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

PedestrianSample parse_record(const LineParser& p) {
  PedestrianSample s;
  s.clip_id = std::string(p.raw(0));
  if (s.clip_id.empty() || s.clip_id.find('/') != std::string::npos) {
    p.fail(0, "clip id must be non-empty and contain no '/'");
  }
  s.frame_index = p.integer(1);
  if (s.frame_index < 0) p.fail(1, "must be >= 0");
  s.bbox.x = p.integer(2);
  s.bbox.y = p.integer(3);
  s.bbox.w = p.integer(4);
  if (s.bbox.w < 1) p.fail(4, "must be >= 1");
  s.bbox.h = p.integer(5);
  if (s.bbox.h < 1) p.fail(5, "must be >= 1");
  s.bbox.kind = p.token<BoxKind>(6);

  const bool pedestrian = s.bbox.kind == BoxKind::pedestrian;
  const bool no_behavior = p.absent(7) && p.absent(8) && p.absent(9) && p.absent(10);
  if (!(no_behavior && !pedestrian)) {
    s.behavior = BehaviorLabels{p.token<HeadOrientation>(7), p.token<Motion>(8),
                                p.token<Direction>(9), p.token<DriverAction>(10)};
  }
  const bool no_demographics = p.absent(11) && p.absent(12);
  if (!(no_demographics && !pedestrian)) {
    s.demographics = Demographics{p.token<Age>(11), p.token<Gender>(12)};
  }

  s.scene.lanes = p.integer(13);
  if (s.scene.lanes < 1 || s.scene.lanes > 6) p.fail(13, "lanes must be in [1,6]");
  s.scene.location = p.token<Location>(14);
  s.scene.signalized = p.boolean(15);
  s.scene.designed = p.boolean(16);
  s.scene.weather = p.token<Weather>(17);
  s.scene.time_of_day = p.token<TimeOfDay>(18);
  if (!p.absent(19)) s.crossing = p.token<Crossing>(19);
  return s;
}

}  // namespace

Dataset parse_annotations(std::string_view text, std::string_view source) {
  std::vector<PedestrianSample> samples;
  std::set<std::tuple<std::string, int, int, int, int, int>> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    auto line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;

    auto fields = split_tabs(line);
    if (fields.size() != kFieldCount) {
      std::ostringstream out;
      out << source << ":" << line_no << ": expected " << kFieldCount << " tab-separated fields, got "
          << fields.size();
      throw DataError(out.str());
    }
    LineParser parser(source, line_no, std::move(fields));
    auto sample = parse_record(parser);
    const auto key = std::make_tuple(sample.clip_id, sample.frame_index, sample.bbox.x,
                                     sample.bbox.y, sample.bbox.w, sample.bbox.h);
    if (!seen.insert(key).second) {
      std::ostringstream out;
      out << source << ":" << line_no << ": duplicate record " << sample.id();
      throw DataError(out.str());
    }
    samples.push_back(std::move(sample));
  }
  return Dataset(std::move(samples));
}

Dataset load_annotations(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open annotation file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_annotations(buffer.str(), path.string());
}

std::string format_annotation_line(const PedestrianSample& s) {
  std::ostringstream out;
  const char t = '\t';
  out << s.clip_id << t << s.frame_index << t << s.bbox.x << t << s.bbox.y << t << s.bbox.w << t
      << s.bbox.h << t << to_token(s.bbox.kind) << t;
  if (s.behavior) {
    out << to_token(s.behavior->head) << t << to_token(s.behavior->motion) << t
        << to_token(s.behavior->direction) << t << to_token(s.behavior->driver_action) << t;
  } else {
    out << "-\t-\t-\t-\t";
  }
  if (s.demographics) {
    out << to_token(s.demographics->age) << t << to_token(s.demographics->gender) << t;
  } else {
    out << "-\t-\t";
  }
  out << s.scene.lanes << t << to_token(s.scene.location) << t
      << (s.scene.signalized ? "true" : "false") << t << (s.scene.designed ? "true" : "false")
      << t << to_token(s.scene.weather) << t << to_token(s.scene.time_of_day) << t
      << (s.crossing ? to_token(*s.crossing) : std::string_view("-"));
  return out.str();
}

void save_annotations(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write annotation file " + path.string());
  out << "# clip_id\tframe_index\tx\ty\tw\th\tkind\thead\tmotion\tdirection\tdriver_action\tage"
         "\tgender\tlanes\tlocation\tsignalized\tdesigned\tweather\ttime_of_day\tcrossing\n";
  for (const auto& s : dataset.samples()) out << format_annotation_line(s) << '\n';
}

RgbImage crop_region(const RgbImage& image, const BoundingBox& bbox, BodyPart part) {
  const int band = std::max(1, bbox.h / 3);
  int y0 = part == BodyPart::head ? bbox.y : bbox.y + bbox.h - band;
  int y1 = y0 + band;
  int x0 = bbox.x;
  int x1 = bbox.x + bbox.w;
  x0 = std::max(x0, 0);
  y0 = std::max(y0, 0);
  x1 = std::min(x1, image.width);
  y1 = std::min(y1, image.height);
  if (x0 >= x1 || y0 >= y1) {
    std::ostringstream out;
    out << "crop region of box (" << bbox.x << "," << bbox.y << "," << bbox.w << "," << bbox.h
        << ") does not intersect the " << image.width << "x" << image.height << " image";
    throw DataError(out.str());
  }
  RgbImage crop(x1 - x0, y1 - y0);
  for (int y = y0; y < y1; ++y) {
    std::copy_n(image.at(x0, y), static_cast<std::size_t>(crop.width) * 3, crop.at(0, y - y0));
  }
  return crop;
}

namespace {

void check_fraction(double f) {
  if (!(f > 0.0 && f < 1.0)) throw UsageError("train fraction must lie in (0,1)");
}

std::map<std::string, std::vector<std::size_t>> frames_by_clip(const Dataset& dataset) {
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < dataset.size(); ++i) groups[dataset[i].clip_id].push_back(i);
  for (auto& [clip, idx] : groups) {
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return dataset[a].frame_index < dataset[b].frame_index;
    });
  }
  return groups;
}

}  // namespace

Split split_by_clip(const Dataset& dataset, double train_fraction, std::uint64_t seed) {
  check_fraction(train_fraction);
  auto clips = dataset.clips();
  if (clips.size() < 2) throw DataError("clip-level split needs at least 2 clips");
  Rng rng(seed);
  seeded_shuffle(std::span<std::string>(clips), rng);

  const auto n = static_cast<double>(clips.size());
  auto n_train = static_cast<std::size_t>(std::ceil(train_fraction * n - 1e-9));
  n_train = std::clamp<std::size_t>(n_train, 1, clips.size() - 1);
  const std::set<std::string> train_clips(clips.begin(), clips.begin() + n_train);

  Split split;
  split.method = SplitMethod::A_by_clip;
  split.seed = seed;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    (train_clips.count(dataset[i].clip_id) ? split.train : split.test).push_back(i);
  }
  return split;
}

Split split_by_frame(const Dataset& dataset, double train_fraction, std::uint64_t seed) {
  check_fraction(train_fraction);
  if (dataset.size() == 0) throw DataError("frame-level split of an empty dataset");
  Rng rng(seed);
  Split split;
  split.method = SplitMethod::B_by_frame;
  split.seed = seed;
  for (auto& [clip, frames] : frames_by_clip(dataset)) {
    const std::size_t n = frames.size();
    // round half up; the epsilon absorbs representation error in fraction*n
    auto n_train = static_cast<std::size_t>(std::floor(train_fraction * n + 0.5 + 1e-9));
    n_train = std::max<std::size_t>(n_train, 1);
    if (n >= 2) n_train = std::min(n_train, n - 1);
    seeded_shuffle(std::span<std::size_t>(frames), rng);
    split.train.insert(split.train.end(), frames.begin(), frames.begin() + n_train);
    split.test.insert(split.test.end(), frames.begin() + n_train, frames.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

std::vector<std::size_t> balance_classes(std::span<const int> labels, std::uint64_t seed) {
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw DataError("balance_classes expects 0/1 labels");
    by_class[labels[i]].push_back(i);
  }
  if (by_class[0].empty() || by_class[1].empty()) {
    throw DataError("cannot balance classes: class " + std::to_string(by_class[0].empty() ? 0 : 1) +
                    " has no samples");
  }
  auto& majority = by_class[0].size() >= by_class[1].size() ? by_class[0] : by_class[1];
  const auto& minority = &majority == &by_class[0] ? by_class[1] : by_class[0];
  if (majority.size() > minority.size()) {
    Rng rng(seed);
    seeded_shuffle(std::span<std::size_t>(majority), rng);
    majority.resize(minority.size());
  }
  std::vector<std::size_t> kept = by_class[0];
  kept.insert(kept.end(), by_class[1].begin(), by_class[1].end());
  std::sort(kept.begin(), kept.end());
  return kept;
}

}  // namespace pedintent
