#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "pedintent/commands.hpp"
#include "pedintent/error.hpp"
#include "pedintent/feature_file.hpp"
#include "pedintent/fixture.hpp"

using namespace pedintent;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::vector<const char*> argv = {"pedintent"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

int spawn(const std::string& args) {
  const std::string cmd = std::string(PEDINTENT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Fresh scratch directory per test case.
fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("pedintent_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::pair<fs::path, std::string>> tree_contents(const fs::path& root) {
  std::vector<std::pair<fs::path, std::string>> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out.emplace_back(fs::relative(e.path(), root), slurp(e.path()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("usage errors exit with 1") {
  CHECK(cli({}).code == 1);
  CHECK(cli({"--help"}).code == 0);
  CHECK(cli({"fixture", "--no-such-flag"}).code == 1);
  CHECK(cli({"extract", "--task", "elbow"}).code == 1);
  CHECK(cli({"fixture", "--seed", "many"}).code == 1);
  CHECK(cli({"extract", "--task", "intent"}).code == 1);
  const auto dir = scratch("usage");
  CHECK(cli({"train-eval", "--feature", "cnn", "--out", dir.string(), "--annotations", "/dev/null"}).code == 1);
}

TEST_CASE("data errors exit with 2") {
  const auto dir = scratch("data");
  const auto r = cli({"extract", "--annotations", (dir / "none.tsv").string(), "--images", dir.string(), "--out",
                      dir.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("none.tsv") != std::string::npos);
  CHECK(cli({"report", "--out", dir.string()}).code == 2);
}

TEST_CASE("the binary reports exit codes to the shell") {
  const auto dir = scratch("spawn");
  CHECK(spawn("--help") == 0);
  CHECK(spawn("") == 1);
  CHECK(spawn("report --out " + dir.string()) == 2);
  CHECK(spawn("fixture --clips 2 --frames 2 --out " + dir.string()) == 0);
}

TEST_CASE("fixture output is deterministic") {
  const auto a = scratch("fixture_a"), b = scratch("fixture_b"), c = scratch("fixture_c");
  REQUIRE(cli({"fixture", "--clips", "3", "--frames", "4", "--out", a.string()}).code == 0);
  REQUIRE(cli({"fixture", "--clips", "3", "--frames", "4", "--out", b.string()}).code == 0);
  REQUIRE(cli({"fixture", "--clips", "3", "--frames", "4", "--seed", "2", "--out", c.string()}).code == 0);
  CHECK(tree_contents(a) == tree_contents(b));
  CHECK(slurp(a / "annotations.tsv") != slurp(c / "annotations.tsv"));
  CHECK(fs::exists(a / "images" / "clip_0001" / "0.png"));
}

TEST_CASE("fixture covers both classes of every binary variable") {
  const auto ds = generate_fixture_annotations({});
  std::size_t pedestrians = 0;
  int counts[7][2] = {};
  for (const auto& s : ds.samples()) {
    if (!s.trainable()) continue;
    ++pedestrians;
    ++counts[0][static_cast<int>(s.behavior->head)];
    ++counts[1][static_cast<int>(s.behavior->motion)];
    ++counts[2][static_cast<int>(s.behavior->direction)];
    ++counts[3][static_cast<int>(s.demographics->gender)];
    ++counts[4][s.scene.signalized];
    ++counts[5][s.scene.designed];
    ++counts[6][static_cast<int>(*s.crossing)];
  }
  CHECK(pedestrians == 200);
  for (auto& c : counts) {
    CHECK(c[0] > 0);
    CHECK(c[1] > 0);
  }
}

TEST_CASE("extract writes one record per pedestrian and is idempotent") {
  const auto dir = scratch("extract");
  REQUIRE(cli({"fixture", "--clips", "2", "--frames", "2", "--out", dir.string()}).code == 0);
  REQUIRE(cli({"extract", "--out", dir.string()}).code == 0);
  const auto path = feature_file_path(dir, Task::head, FeatureSource::hog);
  const auto file = read_feature_file(path);
  CHECK(file.dimension == 3600);
  CHECK(file.records.size() == 4);
  const auto first = slurp(path);
  REQUIRE(cli({"extract", "--out", dir.string(), "--threads", "1"}).code == 0);
  CHECK(slurp(path) == first);

  REQUIRE(cli({"extract", "--task", "motion", "--feature", "lbp", "--out", dir.string()}).code == 0);
  CHECK(read_feature_file(feature_file_path(dir, Task::motion, FeatureSource::lbp)).dimension == 59);
}

TEST_CASE("missing images: strict mode fails naming the sample, default skips") {
  const auto dir = scratch("missing");
  REQUIRE(cli({"fixture", "--clips", "2", "--frames", "3", "--out", dir.string()}).code == 0);
  fs::remove(dir / "images" / "clip_0002" / "1.png");
  const auto strict = cli({"extract", "--strict", "--out", dir.string()});
  CHECK(strict.code == 2);
  CHECK(strict.err.find("clip_0002/1/") != std::string::npos);
  CHECK(spawn("extract --strict --out " + dir.string()) == 2);

  const auto lenient = cli({"extract", "--out", dir.string()});
  CHECK(lenient.code == 0);
  CHECK(lenient.out.find("warning") != std::string::npos);
  CHECK(read_feature_file(feature_file_path(dir, Task::head, FeatureSource::hog)).records.size() == 5);
}

TEST_CASE("cnn extraction emits crops and an id/path manifest") {
  const auto dir = scratch("cnn");
  REQUIRE(cli({"fixture", "--clips", "1", "--frames", "3", "--out", dir.string()}).code == 0);
  REQUIRE(cli({"extract", "--feature", "cnn", "--task", "motion", "--out", dir.string()}).code == 0);
  std::istringstream manifest(slurp(manifest_path(dir, Task::motion)));
  std::string line;
  int rows = 0;
  while (std::getline(manifest, line)) {
    const auto tab = line.find('\t');
    REQUIRE(tab != std::string::npos);
    CHECK(line.substr(0, tab).rfind("clip_0001/", 0) == 0);
    CHECK(fs::exists(line.substr(tab + 1)));
    ++rows;
  }
  CHECK(rows == 3);
}

TEST_CASE("config precedence: defaults, file, then flags") {
  const auto dir = scratch("config");
  {
    std::ofstream cfg(dir / "run.cfg");
    cfg << "# fixture settings\nclips = 2\nframes=3\nseed=5\n";
  }
  REQUIRE(cli({"fixture", "--config", (dir / "run.cfg").string(), "--frames", "1", "--out", (dir / "a").string()})
              .code == 0);
  const auto ds = load_annotations(dir / "a" / "annotations.tsv");
  CHECK(ds.clips().size() == 2);
  std::size_t peds = 0;
  for (const auto& s : ds.samples()) peds += s.trainable();
  CHECK(peds == 2);

  {
    std::ofstream cfg(dir / "bad.cfg");
    cfg << "clips=2\ncolour=blue\n";
  }
  const auto bad = cli({"fixture", "--config", (dir / "bad.cfg").string(), "--out", dir.string()});
  CHECK(bad.code == 1);
  CHECK(bad.err.find(":2") != std::string::npos);

  RunConfig config;
  apply_setting(config, "split", "A");
  CHECK(config.split == SplitMethod::A_by_clip);
  CHECK(config.effective_split_fraction() == doctest::Approx(159.0 / 233.0));
  apply_setting(config, "task", "motion");
  CHECK(config.effective_split_fraction() == doctest::Approx(139.0 / 204.0));
  CHECK_THROWS_AS(apply_setting(config, "threads", "-"), UsageError);
}

TEST_CASE("data root environment variable supplies inputs") {
  const auto dir = scratch("env");
  REQUIRE(cli({"fixture", "--clips", "2", "--frames", "2", "--out", (dir / "data").string()}).code == 0);
  ::setenv(kDataRootEnv, (dir / "data").c_str(), 1);
  const auto r = cli({"extract", "--out", (dir / "out").string()});
  ::unsetenv(kDataRootEnv);
  CHECK(r.code == 0);
  CHECK(fs::exists(feature_file_path(dir / "out", Task::head, FeatureSource::hog)));
}

TEST_CASE("train-eval, select and report on the fixture") {
  const auto dir = scratch("pipeline");
  const auto out = dir.string();
  REQUIRE(cli({"fixture", "--out", out}).code == 0);
  for (const char* task : {"head", "motion"}) {
    REQUIRE(cli({"extract", "--task", task, "--out", out}).code == 0);
    REQUIRE(cli({"train-eval", "--task", task, "--out", out}).code == 0);
  }
  const auto name = run_name(Task::head, FeatureSource::hog, ClassifierKind::svm, SplitMethod::B_by_frame);
  const auto reports = read_report_csv(dir / "reports" / (name + ".csv"));
  REQUIRE(reports.size() == 1);
  const auto& r = reports[0];
  CHECK(r.accuracy >= 90.0);
  CHECK(r.confusion.rows[0].has_value());
  CHECK(r.confusion.rows[1].has_value());
  CHECK(r.member_accuracy.size() == 5);
  CHECK(slurp(dir / "reports" / (name + ".txt")).find("not_looking") != std::string::npos);

  const auto before = slurp(dir / "reports" / (name + ".csv"));
  const auto preds = slurp(predictions_path(dir, Task::head, FeatureSource::hog, ClassifierKind::svm,
                                            SplitMethod::B_by_frame));
  REQUIRE(cli({"train-eval", "--task", "head", "--out", out}).code == 0);
  CHECK(slurp(dir / "reports" / (name + ".csv")) == before);
  CHECK(slurp(predictions_path(dir, Task::head, FeatureSource::hog, ClassifierKind::svm, SplitMethod::B_by_frame)) ==
        preds);

  const auto sel = cli({"select", "--out", out});
  REQUIRE(sel.code == 0);
  CHECK(sel.out.find("warning") == std::string::npos);  // predictions were found
  const auto trace = slurp(dir / "selection" / "trace.csv");
  CHECK(std::count(trace.begin(), trace.end(), '\n') == 13);
  REQUIRE(cli({"select", "--out", out}).code == 0);
  CHECK(slurp(dir / "selection" / "trace.csv") == trace);
  CHECK(fs::exists(dir / "selection" / "intent_summary.txt"));

  const auto rep = cli({"report", "--out", out});
  REQUIRE(rep.code == 0);
  CHECK(slurp(dir / "reports" / "summary.txt").find("Variable selection") != std::string::npos);
}

TEST_CASE("batch mode fills the accuracy table") {
  const auto dir = scratch("batch");
  const auto out = dir.string();
  REQUIRE(cli({"fixture", "--clips", "6", "--frames", "20", "--out", out}).code == 0);
  REQUIRE(cli({"extract", "--feature", "hog", "--out", out}).code == 0);
  REQUIRE(cli({"extract", "--feature", "lbp", "--out", out}).code == 0);
  const auto r = cli({"train-eval", "--batch", "--mlp-epochs", "50", "--out", out});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("no cnn features") != std::string::npos);
  const auto table = slurp(dir / "reports" / "table_B.txt");
  for (const char* row : {"k-NN", "SVM", "ANN", "DT"}) {
    const auto pos = table.find(row);
    REQUIRE(pos != std::string::npos);
    const auto line = table.substr(pos, table.find('\n', pos) - pos);
    // two filled head columns, four dashes
    CHECK(std::count(line.begin(), line.end(), '%') == 2);
    CHECK(std::count(line.begin(), line.end(), '-') - (std::string(row) == "k-NN") == 4);
  }
}

TEST_CASE("report rows survive a CSV round trip") {
  EvalReport r;
  r.config = {"motion", "lbp", "dt", "A"};
  r.accuracy = 81.25;
  r.cv_accuracy = 79.5;
  r.n_train = 120;
  r.n_test = 80;
  r.confusion.rows[0] = std::array<double, 2>{82.5, 17.5};
  r.member_accuracy = {80, 81.25, 82.5};
  const auto path = scratch("csv") / "r.csv";
  std::ofstream(path) << report_csv_header() << report_csv_row(r);
  const auto back = read_report_csv(path);
  REQUIRE(back.size() == 1);
  CHECK(back[0].config.classifier == "dt");
  CHECK(back[0].accuracy == 81.25);
  CHECK(back[0].n_train == 120);
  CHECK((*back[0].confusion.rows[0])[1] == 17.5);
  CHECK_FALSE(back[0].confusion.rows[1].has_value());
  CHECK(back[0].member_accuracy == r.member_accuracy);
}

TEST_CASE("feature files round trip through text bit-exactly") {
  const auto dir = scratch("dump");
  FeatureFile file;
  file.dimension = 4;
  file.records.push_back({"a/0/1_2_3_4", {0.1f, -3.0e-8f, 1.0e30f, 0.0f}});
  file.records.push_back({"b/1/1_2_3_4", {1.0f / 3.0f, 2.5f, -0.0f, 7.0f}});
  write_feature_file(file, dir / "f.bin");
  REQUIRE(cli({"features", "dump", (dir / "f.bin").string(), "-o", (dir / "f.txt").string()}).code == 0);
  REQUIRE(cli({"features", "load", (dir / "f.txt").string(), "-o", (dir / "g.bin").string()}).code == 0);
  CHECK(slurp(dir / "f.bin") == slurp(dir / "g.bin"));
  CHECK(cli({"features", "dump", (dir / "f.bin").string()}).out == slurp(dir / "f.txt"));

  CHECK_THROWS_AS(parse_feature_dump("dimension\t2\nx\t1\n"), DataError);
  CHECK_THROWS_AS(parse_feature_dump("dimension\t1\nx\tone\n"), DataError);
  CHECK_THROWS_AS(parse_feature_dump("x\t1\n"), DataError);
  CHECK(cli({"features", "load", (dir / "missing.txt").string(), "-o", (dir / "h.bin").string()}).code == 2);
}
