#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "pedintent/dataset.hpp"
#include "pedintent/error.hpp"
#include "support/corpus.hpp"

using namespace pedintent;
namespace fs = std::filesystem;

namespace {

const char* kLine1 =
    "clip_0001\t0\t10\t20\t30\t90\tpedestrian\tlooking\twalking\tlateral\tmoving_slow\tadult\tfemale\t2\tstreet\t"
    "true\tfalse\tclear\tday\tcrossing\n";
const char* kLine2 =
    "clip_0001\t1\t12\t20\t30\t90\tpedestrian\tnot_looking\tstanding\tlongitudinal\tstopped\tchild\tmale\t6\tplaza\t"
    "false\ttrue\tsnow\tnight\t-\n";

std::string replace_field(std::string line, int field, const std::string& value) {
  std::size_t start = 0;
  for (int f = 0; f < field; ++f) start = line.find('\t', start) + 1;
  const auto end = line.find_first_of("\t\n", start);
  return line.replace(start, end - start, value);
}

std::string error_of(const std::string& text) {
  try {
    parse_annotations(text, "ann.tsv");
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

RgbImage numbered_image(int w, int h) {
  RgbImage img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      auto* p = img.at(x, y);
      p[0] = static_cast<std::uint8_t>(x);
      p[1] = static_cast<std::uint8_t>(y);
      p[2] = 7;
    }
  }
  return img;
}

}  // namespace

TEST_CASE("two valid lines parse into two samples") {
  const auto ds = parse_annotations(std::string("# comment\n") + kLine1 + kLine2);
  REQUIRE(ds.size() == 2);
  const auto& a = ds[0];
  CHECK(a.clip_id == "clip_0001");
  CHECK(a.bbox == BoundingBox{10, 20, 30, 90, BoxKind::pedestrian});
  CHECK(a.behavior->head == HeadOrientation::looking);
  CHECK(a.behavior->driver_action == DriverAction::moving_slow);
  CHECK(a.demographics->gender == Gender::female);
  CHECK(a.scene.lanes == 2);
  CHECK(a.scene.signalized);
  CHECK_FALSE(a.scene.designed);
  CHECK(a.crossing == Crossing::crossing);
  CHECK(ds[1].behavior->driver_action == DriverAction::stopped);
  CHECK_FALSE(ds[1].crossing.has_value());
  CHECK(ds.clips() == std::vector<std::string>{"clip_0001"});
  CHECK(a.id() == "clip_0001/0/10_20_30_90");
  CHECK(a.image_path() == fs::path("clip_0001") / "0.png");
}

TEST_CASE("unknown enum token names line and field") {
  const auto msg = error_of(std::string(kLine1) + replace_field(kLine2, 17, "foggy"));
  CHECK(msg.find("ann.tsv:2") != std::string::npos);
  CHECK(msg.find("weather") != std::string::npos);
  CHECK(msg.find("foggy") != std::string::npos);
}

TEST_CASE("malformed records are rejected") {
  CHECK(error_of(replace_field(kLine1, 13, "7")).find("lanes") != std::string::npos);
  CHECK(error_of(replace_field(kLine1, 13, "0")).find("lanes") != std::string::npos);
  CHECK(error_of(replace_field(kLine1, 4, "0")) != "");
  CHECK(error_of(replace_field(kLine1, 1, "x")).find("frame") != std::string::npos);
  CHECK(error_of(replace_field(kLine1, 15, "yes")) != "");
  CHECK(error_of("clip\t0\t1\n").find("ann.tsv:1") != std::string::npos);
  // behavior may be absent only on non-pedestrian boxes
  CHECK(error_of(replace_field(kLine1, 7, "-")) != "");
  std::string bystander = replace_field(kLine1, 6, "bystander");
  for (int f = 7; f <= 12; ++f) bystander = replace_field(bystander, f, "-");
  CHECK(error_of(bystander) == "");
  CHECK_FALSE(parse_annotations(bystander)[0].trainable());
  // a partial dash is still an unknown token
  CHECK(error_of(replace_field(replace_field(kLine1, 6, "bystander"), 7, "-")) != "");
}

TEST_CASE("duplicate clip, frame and box is an error") {
  const auto msg = error_of(std::string(kLine1) + kLine1);
  CHECK(msg.find("duplicate") != std::string::npos);
  // same box in another frame is fine
  CHECK(error_of(std::string(kLine1) + replace_field(kLine1, 1, "5")) == "");
}

TEST_CASE("missing annotation file is a data error") {
  CHECK_THROWS_AS(load_annotations("/nonexistent/ann.tsv"), DataError);
}

TEST_CASE("346 distinct clips are enumerated") {
  std::vector<PedestrianSample> samples;
  for (int c = 345; c >= 0; --c) samples.push_back(testsupport::make_sample("clip_" + std::to_string(c), 0));
  const Dataset ds(samples);
  const auto clips = ds.clips();
  CHECK(clips.size() == 346);
  CHECK(std::is_sorted(clips.begin(), clips.end()));
}

TEST_CASE("save and load round trip") {
  const auto ds = parse_annotations(std::string(kLine1) + kLine2);
  const auto path = fs::temp_directory_path() / "pedintent_roundtrip.tsv";
  save_annotations(ds, path);
  const auto back = load_annotations(path);
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) CHECK(format_annotation_line(back[i]) == format_annotation_line(ds[i]));
  fs::remove(path);
}

TEST_CASE("crop takes exact thirds of the box") {
  const auto img = numbered_image(100, 100);
  const auto head = crop_region(img, {0, 0, 30, 90, BoxKind::pedestrian}, BodyPart::head);
  CHECK(head.width == 30);
  CHECK(head.height == 30);
  CHECK(head.at(29, 29)[0] == 29);
  CHECK(head.at(29, 29)[1] == 29);

  const auto legs = crop_region(img, {5, 40, 20, 10, BoxKind::pedestrian}, BodyPart::legs);
  CHECK(legs.height == 3);
  CHECK(legs.at(0, 0)[1] == 47);  // rows 47..49
  CHECK(legs.at(0, 0)[0] == 5);

  // boxes shorter than 3 rows still give one row
  CHECK(crop_region(img, {0, 0, 4, 2, BoxKind::pedestrian}, BodyPart::head).height == 1);
}

TEST_CASE("crop is clipped at the image edge") {
  const auto img = numbered_image(50, 60);
  const auto head = crop_region(img, {25, 0, 30, 60, BoxKind::pedestrian}, BodyPart::head);
  CHECK(head.width == 25);
  CHECK(head.height == 20);
  CHECK(head.at(24, 0)[0] == 49);
  CHECK_THROWS_AS(crop_region(img, {60, 0, 10, 30, BoxKind::pedestrian}, BodyPart::head), DataError);
}

TEST_CASE("clip split takes ceil(fraction * clips) training clips") {
  const auto ds = testsupport::corpus_from_sizes(std::vector<int>(233, 3));
  const auto split = split_by_clip(ds, kHeadClipFraction, 11);
  std::set<std::string> train_clips, test_clips;
  for (auto i : split.train) train_clips.insert(ds[i].clip_id);
  for (auto i : split.test) test_clips.insert(ds[i].clip_id);
  CHECK(train_clips.size() == 159);
  CHECK(test_clips.size() == 74);
  for (const auto& c : train_clips) CHECK(test_clips.count(c) == 0);
  CHECK(split.train.size() + split.test.size() == ds.size());

  const auto two = testsupport::corpus_from_sizes({4, 6});
  const auto s2 = split_by_clip(two, 0.5, 3);
  CHECK(std::set<std::string>{two[s2.train[0]].clip_id} != std::set<std::string>{two[s2.test[0]].clip_id});

  const auto again = split_by_clip(ds, kHeadClipFraction, 11);
  CHECK(again.train == split.train);
  CHECK(again.test == split.test);

  CHECK_THROWS_AS(split_by_clip(testsupport::corpus_from_sizes({5}), 0.5, 1), DataError);
  CHECK_THROWS_AS(split_by_clip(ds, 1.0, 1), UsageError);
}

TEST_CASE("frame split rounds per clip") {
  const auto ten = testsupport::corpus_from_sizes({10});
  const auto s = split_by_frame(ten, kFrameFraction, 1);
  CHECK(s.train.size() == 6);
  CHECK(s.test.size() == 4);

  const auto one = testsupport::corpus_from_sizes({1});
  const auto s1 = split_by_frame(one, kFrameFraction, 1);
  CHECK(s1.train.size() == 1);
  CHECK(s1.test.empty());

  // 2 frames: round(1.2) = 1 each side
  const auto s2 = split_by_frame(testsupport::corpus_from_sizes({2}), kFrameFraction, 1);
  CHECK(s2.train.size() == 1);
  CHECK(s2.test.size() == 1);

  CHECK_THROWS_AS(split_by_frame(Dataset{}, kFrameFraction, 1), DataError);
}

TEST_CASE("frame split reproduces the 16611 / 11074 corpus totals") {
  const auto sizes = testsupport::long_corpus_clip_sizes();
  CHECK(std::accumulate(sizes.begin(), sizes.end(), 0) == 27685);
  const auto ds = testsupport::corpus_from_sizes(sizes);
  const auto split = split_by_frame(ds, kFrameFraction, 7);
  CHECK(split.train.size() == 16611);
  CHECK(split.test.size() == 11074);
}

TEST_CASE("property: split laws hold over random corpora") {
  for (unsigned seed = 0; seed < 30; ++seed) {
    std::vector<int> sizes;
    for (unsigned c = 0; c < 3 + seed % 7; ++c) sizes.push_back(1 + static_cast<int>((seed * 31 + c * 17) % 23));
    const auto ds = testsupport::corpus_from_sizes(sizes);
    for (auto method : {SplitMethod::A_by_clip, SplitMethod::B_by_frame}) {
      const auto split = method == SplitMethod::A_by_clip ? split_by_clip(ds, 0.6, seed) : split_by_frame(ds, 0.6, seed);
      std::vector<int> seen(ds.size(), 0);
      for (auto i : split.train) ++seen[i];
      for (auto i : split.test) ++seen[i];
      CHECK(std::all_of(seen.begin(), seen.end(), [](int v) { return v == 1; }));
      std::map<std::string, std::pair<int, int>> per_clip;
      for (auto i : split.train) ++per_clip[ds[i].clip_id].first;
      for (auto i : split.test) ++per_clip[ds[i].clip_id].second;
      for (const auto& [clip, counts] : per_clip) {
        const int n = counts.first + counts.second;
        if (method == SplitMethod::A_by_clip) {
          CHECK((counts.first == 0 || counts.second == 0));
        } else {
          // independent rule: nearest integer to 0.6 n, halves up, kept in [1, n-1]
          int expected = (6 * n + 5) / 10;
          expected = std::max(expected, 1);
          if (n >= 2) expected = std::min(expected, n - 1);
          CHECK(counts.first == expected);
        }
      }
    }
  }
}

TEST_CASE("balance down-samples the majority class") {
  std::vector<int> labels = {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1};
  const auto kept = balance_classes(labels, 5);
  CHECK(kept.size() == 12);
  CHECK(std::count_if(kept.begin(), kept.end(), [&](std::size_t i) { return labels[i] == 1; }) == 6);
  CHECK(std::is_sorted(kept.begin(), kept.end()));
  CHECK(balance_classes(labels, 5) == kept);

  const std::vector<int> even = {1, 0, 1, 0, 0, 1, 1, 0, 0, 1};
  std::vector<std::size_t> all(10);
  std::iota(all.begin(), all.end(), 0);
  CHECK(balance_classes(even, 9) == all);

  CHECK_THROWS_AS(balance_classes(std::vector<int>(8, 1), 1), DataError);
}

TEST_CASE("property: balanced output is an equal-count subset") {
  for (unsigned seed = 0; seed < 50; ++seed) {
    std::vector<int> labels;
    for (unsigned i = 0; i < 5 + seed; ++i) labels.push_back((i * 7 + seed) % 3 == 0 ? 1 : 0);
    if (std::count(labels.begin(), labels.end(), 1) == 0) continue;
    const auto kept = balance_classes(labels, seed);
    std::set<std::size_t> unique(kept.begin(), kept.end());
    CHECK(unique.size() == kept.size());
    CHECK(*unique.rbegin() < labels.size());
    const auto ones = std::count_if(kept.begin(), kept.end(), [&](std::size_t i) { return labels[i] == 1; });
    CHECK(static_cast<std::size_t>(ones * 2) == kept.size());
    // minority class untouched
    const auto minority = std::min(std::count(labels.begin(), labels.end(), 1), std::count(labels.begin(), labels.end(), 0));
    CHECK(static_cast<std::size_t>(minority * 2) == kept.size());
  }
}

TEST_CASE("token tables round trip") {
  for (std::size_t i = 0; i < token_count<Weather>(); ++i) {
    const auto w = static_cast<Weather>(i);
    CHECK(parse_token<Weather>(to_token(w)) == w);
  }
  CHECK_FALSE(parse_token<Weather>("foggy").has_value());
  CHECK(token_count<DriverAction>() == 5);
}
