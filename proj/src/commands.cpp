#include "pedintent/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <atomic>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "pedintent/error.hpp"
#include "pedintent/feature_file.hpp"
#include "pedintent/fixture.hpp"

namespace pedintent {

namespace fs = std::filesystem;

namespace {

// seed streams
constexpr std::uint64_t kBalanceTrain = 1;
constexpr std::uint64_t kBalanceTest = 2;
constexpr std::uint64_t kFolds = 3;
constexpr std::uint64_t kMlpInit = 4;
constexpr std::uint64_t kIntentBalance = 5;
constexpr std::uint64_t kIntentFolds = 6;

void ensure_dir(const fs::path& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  ensure_dir(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed for " + path.string());
}

/// Annotation and image locations: explicit settings, then the data-root
/// environment variable, then a fixture previously generated into `out`.
struct Inputs {
  fs::path annotations;
  fs::path images;
};

Inputs resolve_inputs(const RunConfig& config) {
  RunConfig c = config;
  apply_environment(c);
  if (c.annotations.empty() && fs::exists(c.out / "annotations.tsv")) c.annotations = c.out / "annotations.tsv";
  if (c.images.empty() && fs::exists(c.out / "images")) c.images = c.out / "images";
  return {c.annotations_path(), c.images.empty() ? fs::path() : c.images};
}

void require_image_task(Task task) {
  if (task == Task::intent) throw UsageError("this command needs --task head or --task motion");
}

std::vector<std::size_t> task_corpus(const Dataset& dataset) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (dataset[i].trainable()) idx.push_back(i);
  }
  return idx;
}

int task_label(const PedestrianSample& s, Task task) {
  return task == Task::head ? static_cast<int>(s.behavior->head) : static_cast<int>(s.behavior->motion);
}

std::array<std::string, 2> class_names(Task task) {
  if (task == Task::head) {
    return {std::string(to_token(HeadOrientation::looking)), std::string(to_token(HeadOrientation::not_looking))};
  }
  return {std::string(to_token(Motion::walking)), std::string(to_token(Motion::standing))};
}

BodyPart task_part(Task task) { return task == Task::head ? BodyPart::head : BodyPart::legs; }

std::string file_safe(std::string id) {
  std::replace(id.begin(), id.end(), '/', '-');
  return id;
}

template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads) : std::thread::hardware_concurrency();
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto body = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

fs::path feature_file_path(const fs::path& out, Task task, FeatureSource feature) {
  return out / "features" / (std::string(to_string(task)) + "_" + std::string(to_string(feature)) + ".bin");
}

fs::path manifest_path(const fs::path& out, Task task) {
  return out / "features" / (std::string(to_string(task)) + "_manifest.tsv");
}

std::string run_name(Task task, FeatureSource feature, ClassifierKind classifier, SplitMethod split) {
  return std::string(to_string(task)) + "_" + std::string(to_string(feature)) + "_" +
         std::string(to_string(classifier)) + "_" + std::string(split_name(split));
}

fs::path predictions_path(const fs::path& out, Task task, FeatureSource feature, ClassifierKind classifier,
                          SplitMethod split) {
  return out / "predictions" / (run_name(task, feature, classifier, split) + ".csv");
}

// ---------------------------------------------------------------- fixture

void cmd_fixture(const RunConfig& config, std::ostream& log) {
  FixtureOptions options;
  options.seed = config.seed;
  options.clips = config.clips;
  options.frames_per_clip = config.frames;
  const auto dataset = generate_fixture(options, config.out);
  log << "fixture: " << dataset.clips().size() << " clips, " << dataset.size() << " annotation records -> "
      << config.out.string() << '\n';
}

// ---------------------------------------------------------------- extract

void cmd_extract(const RunConfig& config, std::ostream& log) {
  require_image_task(config.task);
  const auto inputs = resolve_inputs(config);
  if (inputs.images.empty()) (void)config.images_path();
  const auto dataset = load_annotations(inputs.annotations);
  const auto corpus = task_corpus(dataset);
  const auto part = task_part(config.task);

  auto image_for = [&](const PedestrianSample& s) -> std::optional<RgbImage> {
    const auto path = inputs.images / s.image_path();
    if (!fs::exists(path)) {
      if (config.strict) throw DataError("missing image for sample " + s.id() + ": " + path.string());
      return std::nullopt;
    }
    return read_png(path);
  };

  std::vector<std::optional<FeatureRecord>> results(corpus.size());

  if (config.feature == FeatureSource::cnn) {
    // CNN activations are computed externally; emit crops and a manifest for the exporter
    const auto crop_dir = config.out / "crops" / std::string(to_string(config.task));
    ensure_dir(crop_dir);
    std::vector<std::optional<std::string>> rows(corpus.size());
    parallel_for(corpus.size(), config.threads, [&](std::size_t k) {
      const auto& s = dataset[corpus[k]];
      auto image = image_for(s);
      if (!image) return;
      const auto path = crop_dir / (file_safe(s.id()) + ".png");
      write_png(crop_region(*image, s.bbox, part), path);
      rows[k] = s.id() + "\t" + fs::absolute(path).string();
    });
    std::string manifest;
    std::size_t skipped = 0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      if (rows[k]) manifest += *rows[k] + "\n";
      else {
        ++skipped;
        log << "warning: skipped " << dataset[corpus[k]].id() << " (image missing)\n";
      }
    }
    write_text(manifest_path(config.out, config.task), manifest);
    log << "extract: wrote " << rows.size() - skipped << " crops and " << manifest_path(config.out, config.task).string()
        << "; run the CNN exporter on it and pass the result with --cnn-features\n";
    return;
  }

  const HogParams hog_params;
  LbpParams lbp_params;
  lbp_params.sampling = config.lbp_sampling;
  parallel_for(corpus.size(), config.threads, [&](std::size_t k) {
    const auto& s = dataset[corpus[k]];
    auto image = image_for(s);
    if (!image) return;
    const auto gray = resize(to_gray(crop_region(*image, s.bbox, part)), config.crop_size, config.crop_size);
    const auto values = config.feature == FeatureSource::hog ? hog(gray, hog_params) : lbp(gray, lbp_params);
    results[k] = FeatureRecord{s.id(), {values.begin(), values.end()}};
  });

  FeatureFile file;
  file.dimension = static_cast<std::uint32_t>(config.feature == FeatureSource::hog
                                                  ? hog_params.length(config.crop_size, config.crop_size)
                                                  : static_cast<std::size_t>(lbp_params.bins()));
  for (std::size_t k = 0; k < results.size(); ++k) {
    if (results[k]) file.records.push_back(std::move(*results[k]));
    else log << "warning: skipped " << dataset[corpus[k]].id() << " (image missing)\n";
  }
  const auto path = feature_file_path(config.out, config.task, config.feature);
  ensure_dir(path.parent_path());
  write_feature_file(file, path);
  log << "extract: " << file.records.size() << " x " << file.dimension << " " << to_string(config.feature)
      << " descriptors -> " << path.string() << '\n';
}

// ---------------------------------------------------------------- train-eval

namespace {

struct TaskData {
  Dataset samples;   // task corpus restricted to samples with features
  Matrix X;
  std::vector<int> y;
};

TaskData load_task_data(const RunConfig& config, FeatureSource feature, const Dataset& dataset, std::ostream& log) {
  std::map<std::string, std::vector<double>> by_id;
  if (feature == FeatureSource::cnn) {
    if (config.cnn_features.empty()) throw UsageError("feature cnn requires --cnn-features");
    for (auto& [id, fv] : load_cnn_features(config.cnn_features)) by_id.emplace(id, std::move(fv.values));
  } else {
    const auto path = feature_file_path(config.out, config.task, feature);
    if (!fs::exists(path)) {
      throw DataError("feature file " + path.string() + " not found; run extract first");
    }
    auto file = read_feature_file(path);
    for (auto& rec : file.records) by_id.emplace(rec.id, std::vector<double>(rec.values.begin(), rec.values.end()));
  }

  std::vector<std::size_t> keep;
  std::size_t missing = 0;
  for (auto i : task_corpus(dataset)) {
    if (by_id.count(dataset[i].id())) keep.push_back(i);
    else ++missing;
  }
  if (missing) {
    if (config.strict) throw DataError(std::to_string(missing) + " samples have no " + std::string(to_string(feature)) + " features");
    log << "warning: " << missing << " samples without " << to_string(feature) << " features were dropped\n";
  }
  if (keep.empty()) throw DataError("no samples with features for task " + std::string(to_string(config.task)));

  TaskData data;
  data.samples = dataset.subset(keep);
  const std::size_t dim = by_id.at(data.samples[0].id()).size();
  data.X = Matrix(keep.size(), dim);
  for (std::size_t r = 0; r < data.samples.size(); ++r) {
    const auto& v = by_id.at(data.samples[r].id());
    if (v.size() != dim) throw DataError("inconsistent feature dimension for " + data.samples[r].id());
    data.X.set_row(r, v);
    data.y.push_back(task_label(data.samples[r], config.task));
  }
  return data;
}

EvalReport run_one(const RunConfig& config, FeatureSource feature, ClassifierKind classifier, const Dataset& dataset,
                   std::ostream& log) {
  const auto data = load_task_data(config, feature, dataset, log);
  const Split split = config.split == SplitMethod::A_by_clip
                          ? split_by_clip(data.samples, config.effective_split_fraction(), config.seed)
                          : split_by_frame(data.samples, config.effective_split_fraction(), config.seed);

  auto labels_of = [&](const std::vector<std::size_t>& idx) {
    std::vector<int> y;
    for (auto i : idx) y.push_back(data.y[i]);
    return y;
  };
  auto pick = [](const std::vector<std::size_t>& idx, const std::vector<std::size_t>& positions) {
    std::vector<std::size_t> out;
    for (auto p : positions) out.push_back(idx[p]);
    return out;
  };

  const auto train = pick(split.train, balance_classes(labels_of(split.train), derive_seed(config.seed, kBalanceTrain)));
  if (split.test.empty()) throw DataError("split left no test samples");
  const auto test = config.balance_test
                        ? pick(split.test, balance_classes(labels_of(split.test), derive_seed(config.seed, kBalanceTest)))
                        : split.test;
  const auto y_train = labels_of(train);
  const auto y_test = labels_of(test);
  const Matrix X_train = data.X.select_rows(train);
  const Matrix X_test = data.X.select_rows(test);

  TrainOptions options;
  options.mlp.seed = derive_seed(config.seed, kMlpInit);
  options.mlp.epochs = config.mlp_epochs;
  const auto plan = kfold(train.size(), 5, derive_seed(config.seed, kFolds));
  const auto cv = cross_validate(make_trainer(classifier, options), X_train, y_train, plan);

  auto report = evaluate_ensemble(cv.models, X_test, y_test);
  report.config = {std::string(to_string(config.task)), std::string(to_string(feature)),
                   std::string(to_string(classifier)), std::string(split_name(config.split))};
  report.cv_accuracy = cv.mean_accuracy;
  report.cv_fold_accuracy = cv.fold_accuracy;
  report.n_train = train.size();

  // held-out predictions for the training side, ensemble vote for everything else
  std::vector<int> predicted(data.samples.size(), -1);
  std::vector<const char*> origin(data.samples.size(), "ensemble");
  for (std::size_t k = 0; k < train.size(); ++k) {
    predicted[train[k]] = cv.held_out_predictions[k];
    origin[train[k]] = "cv";
  }
  const auto names = class_names(config.task);
  std::ostringstream preds;
  preds << "sample_id,truth,predicted,origin\n";
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    if (predicted[i] < 0) predicted[i] = ensemble_vote(cv.models, data.X.row(i));
    preds << data.samples[i].id() << ',' << names[data.y[i]] << ',' << names[predicted[i]] << ',' << origin[i] << '\n';
  }

  const auto name = run_name(config.task, feature, classifier, config.split);
  write_text(config.out / "reports" / (name + ".csv"), report_csv_header() + report_csv_row(report));
  write_text(config.out / "reports" / (name + ".txt"), format_report(report, names));
  write_text(predictions_path(config.out, config.task, feature, classifier, config.split), preds.str());
  log << "train-eval " << name << ": cv " << std::fixed << std::setprecision(1) << report.cv_accuracy << "%, test "
      << report.accuracy << "%\n";
  return report;
}

std::vector<EvalReport> all_reports(const fs::path& out) {
  std::vector<EvalReport> reports;
  const auto dir = out / "reports";
  if (!fs::exists(dir)) return reports;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".csv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    auto r = read_report_csv(f);
    reports.insert(reports.end(), r.begin(), r.end());
  }
  return reports;
}

std::string split_title(const std::string& split) {
  return "Correct classifications, data split " + split;
}

}  // namespace

std::vector<EvalReport> read_report_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open report " + path.string());
  std::vector<EvalReport> out;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() < 12) throw DataError("malformed report row in " + path.string());
    EvalReport r;
    r.config = {f[0], f[1], f[2], f[3]};
    r.n_train = std::stoul(f[4]);
    r.n_test = std::stoul(f[5]);
    r.accuracy = std::stod(f[6]);
    r.cv_accuracy = std::stod(f[7]);
    for (int row = 0; row < 2; ++row) {
      if (f[8 + 2 * row] != "nan") {
        r.confusion.rows[row] = std::array<double, 2>{std::stod(f[8 + 2 * row]), std::stod(f[9 + 2 * row])};
      }
    }
    if (f.size() > 12) {
      std::stringstream ms(f[12]);
      for (std::string v; std::getline(ms, v, ';');) r.member_accuracy.push_back(std::stod(v));
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<EvalReport> cmd_train_eval(const RunConfig& config, std::ostream& log) {
  require_image_task(config.task);
  const auto dataset = load_annotations(resolve_inputs(config).annotations);
  std::vector<EvalReport> reports;
  if (!config.batch) {
    reports.push_back(run_one(config, config.feature, config.classifier, dataset, log));
    return reports;
  }
  for (auto feature : {FeatureSource::hog, FeatureSource::lbp, FeatureSource::cnn}) {
    const bool available = feature == FeatureSource::cnn ? !config.cnn_features.empty()
                                                         : fs::exists(feature_file_path(config.out, config.task, feature));
    if (!available) {
      log << "warning: no " << to_string(feature) << " features for task " << to_string(config.task) << ", skipped\n";
      continue;
    }
    for (auto classifier : {ClassifierKind::knn, ClassifierKind::svm, ClassifierKind::ann, ClassifierKind::dt}) {
      reports.push_back(run_one(config, feature, classifier, dataset, log));
    }
  }
  const std::string split(split_name(config.split));
  std::vector<EvalReport> same_split;
  for (auto& r : all_reports(config.out)) {
    if (r.config.split == split) same_split.push_back(std::move(r));
  }
  const auto table = format_accuracy_table(same_split, split_title(split));
  write_text(config.out / "reports" / ("table_" + split + ".txt"), table);
  log << table;
  return reports;
}

// ---------------------------------------------------------------- select

namespace {

std::map<std::string, std::string> read_predictions(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open predictions " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() < 3) throw DataError("malformed prediction row in " + path.string());
    out[f[0]] = f[2];
  }
  return out;
}

fs::path prediction_source(const RunConfig& config, Task task) {
  const auto& explicit_path = task == Task::head ? config.head_predictions : config.motion_predictions;
  if (!explicit_path.empty()) return explicit_path;
  const auto path = predictions_path(config.out, task, config.feature, config.classifier, config.split);
  return fs::exists(path) ? path : fs::path();
}

std::string percent(double v) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(1) << v << '%';
  return out.str();
}

}  // namespace

SelectionTrace cmd_select(const RunConfig& config, std::ostream& log) {
  const auto dataset = load_annotations(resolve_inputs(config).annotations);

  std::map<std::string, std::string> head_pred, motion_pred;
  if (auto p = prediction_source(config, Task::head); !p.empty()) head_pred = read_predictions(p);
  else log << "warning: no head-orientation predictions found; using annotated values\n";
  if (auto p = prediction_source(config, Task::motion); !p.empty()) motion_pred = read_predictions(p);
  else log << "warning: no motion predictions found; using annotated values\n";

  std::vector<IntentSample> samples;
  std::size_t fallback = 0;
  for (const auto& s : dataset.samples()) {
    if (!s.trainable() || !s.crossing) continue;
    std::optional<HeadOrientation> head;
    std::optional<Motion> motion;
    if (auto it = head_pred.find(s.id()); it != head_pred.end()) head = parse_token<HeadOrientation>(it->second);
    if (auto it = motion_pred.find(s.id()); it != motion_pred.end()) motion = parse_token<Motion>(it->second);
    if ((!head_pred.empty() && !head) || (!motion_pred.empty() && !motion)) ++fallback;
    samples.push_back(make_intent_sample(s, head, motion));
  }
  if (fallback) log << "warning: " << fallback << " intent samples lack a prediction; annotated values used\n";

  std::vector<int> labels;
  for (const auto& s : samples) labels.push_back(crossing_class(s.label));
  std::vector<IntentSample> balanced;
  for (auto i : balance_classes(labels, derive_seed(config.seed, kIntentBalance))) balanced.push_back(samples[i]);

  IntentOptions options;
  options.encoding.five_state_driver_action = config.five_state_driver_action;
  options.encoding.lanes_one_hot = config.lanes_one_hot;
  const auto plan = kfold(balanced.size(), 5, derive_seed(config.seed, kIntentFolds));
  const auto all = all_intent_variables();
  const auto trace = forward_select(balanced, all, plan, options);

  const IntentVariable behavior[] = {IntentVariable::head_orientation, IntentVariable::motion};
  const double behavior_err = intent_cv_error(balanced, behavior, plan, options);
  const double all_err = trace.steps.back().error_pct;
  const auto& best = trace.steps[trace.best_index()];

  std::ostringstream summary;
  summary << "intent samples " << balanced.size() << " (balanced from " << samples.size() << ")\n";
  summary << std::left << std::setw(34) << "" << std::setw(28) << "Head orientation & Motion"
          << "All available variables\n";
  summary << std::setw(34) << "SVM cross-validated accuracy" << std::setw(28) << percent(100.0 - behavior_err)
          << percent(100.0 - all_err) << '\n';
  summary << "best subset: " << best.selected.size() << " variables, error " << percent(best.error_pct) << '\n';

  write_text(config.out / "selection" / "trace.csv", selection_csv(trace));
  write_text(config.out / "selection" / "trace.txt", selection_table(trace));
  write_text(config.out / "selection" / "intent_summary.txt", summary.str());
  log << selection_table(trace) << summary.str();
  return trace;
}

// ---------------------------------------------------------------- report

std::string cmd_report(const RunConfig& config, std::ostream& log) {
  const auto reports = all_reports(config.out);
  const auto selection = config.out / "selection" / "trace.txt";
  if (reports.empty() && !fs::exists(selection)) {
    throw DataError("no reports under " + (config.out / "reports").string() + "; run train-eval first");
  }
  std::ostringstream text;
  for (const char* split : {"A", "B"}) {
    std::vector<EvalReport> subset;
    for (const auto& r : reports) {
      if (r.config.split == split) subset.push_back(r);
    }
    if (subset.empty()) continue;
    text << format_accuracy_table(subset, split_title(split)) << '\n';
  }
  for (const auto& r : reports) {
    text << format_report(r, class_names(parse_task(r.config.task))) << '\n';
  }
  if (fs::exists(selection)) {
    std::ifstream in(selection);
    text << "Variable selection\n" << in.rdbuf();
  }
  write_text(config.out / "reports" / "summary.txt", text.str());
  log << text.str();
  return text.str();
}

// ---------------------------------------------------------------- features

std::string dump_feature_file(const FeatureFile& file) {
  std::string text = "dimension\t" + std::to_string(file.dimension) + "\n";
  char buf[64];
  for (const auto& rec : file.records) {
    text += rec.id;
    for (float v : rec.values) {
      auto res = std::to_chars(buf, buf + sizeof buf, v);
      text += '\t';
      text.append(buf, res.ptr);
    }
    text += '\n';
  }
  return text;
}

FeatureFile parse_feature_dump(std::string_view text, std::string_view source) {
  FeatureFile file;
  std::size_t line_no = 0;
  bool header = false;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view() : text.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;
    const auto where = std::string(source) + ":" + std::to_string(line_no) + ": ";
    std::vector<std::string_view> cells;
    for (std::size_t start = 0;;) {
      const auto tab = line.find('\t', start);
      cells.push_back(line.substr(start, tab - start));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    if (!header) {
      if (cells.size() != 2 || cells[0] != "dimension") throw DataError(where + "expected 'dimension<TAB>N' header");
      auto [p, ec] = std::from_chars(cells[1].data(), cells[1].data() + cells[1].size(), file.dimension);
      if (ec != std::errc() || p != cells[1].data() + cells[1].size()) throw DataError(where + "bad dimension");
      header = true;
      continue;
    }
    FeatureRecord rec{std::string(cells[0]), {}};
    for (std::size_t c = 1; c < cells.size(); ++c) {
      float v = 0.0f;
      auto [p, ec] = std::from_chars(cells[c].data(), cells[c].data() + cells[c].size(), v);
      if (ec != std::errc() || p != cells[c].data() + cells[c].size()) {
        throw DataError(where + "bad value '" + std::string(cells[c]) + "'");
      }
      rec.values.push_back(v);
    }
    if (rec.values.size() != file.dimension) {
      throw DataError(where + "record '" + rec.id + "' has " + std::to_string(rec.values.size()) + " values, expected " +
                      std::to_string(file.dimension));
    }
    file.records.push_back(std::move(rec));
  }
  if (!header) throw DataError(std::string(source) + ": empty feature dump");
  // reuse the binary validation (duplicates, non-finite values)
  return decode_feature_file(encode_feature_file(file), source);
}

// ---------------------------------------------------------------- CLI

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pedestrian head orientation, motion and crossing-intention pipeline"};
  app.require_subcommand(1);

  static const std::vector<std::pair<std::string, std::string>> subcommands = {
      {"fixture", "write a synthetic annotated corpus"},
      {"extract", "compute HOG/LBP descriptors (or CNN crops + manifest)"},
      {"train-eval", "five-fold CV training and ensemble test evaluation"},
      {"select", "forward variable selection for crossing intention"},
      {"report", "collect reports into summary tables"}};
  const std::vector<std::string> flag_keys = {"strict", "batch", "balance-test"};
  const std::map<std::string, std::string> key_help = {
      {"task", "head | motion | intent (default head)"},
      {"feature", "hog | lbp | cnn (default hog)"},
      {"classifier", "knn | svm | ann | dt (default svm)"},
      {"split", "A (by clip) | B (by frame, default)"},
      {"seed", "base seed (default 1)"},
      {"annotations", "annotation TSV (default <data root>/annotations.tsv)"},
      {"images", "image root (default <data root>/images)"},
      {"cnn-features", "CNNF file from the external exporter"},
      {"out", "output directory (default out)"},
      {"strict", "fail on missing images instead of skipping them"},
      {"batch", "train-eval every available feature with every classifier"},
      {"balance-test", "also class-balance the test side"},
      {"split-fraction", "override the training fraction, in (0,1)"},
      {"crop-size", "square crop side in pixels (default 220)"},
      {"lbp-sampling", "nearest (default) | bilinear"},
      {"mlp-epochs", "MLP gradient steps (default 300)"},
      {"threads", "worker threads, 0 = all cores"},
      {"clips", "fixture clip count (default 10)"},
      {"frames", "fixture frames per clip (default 20)"},
      {"driver-action-states", "4 (default) | 5"},
      {"lanes", "numeric (default) | one_hot"},
      {"head-predictions", "predictions CSV for head orientation"},
      {"motion-predictions", "predictions CSV for motion"}};

  std::map<std::string, std::string> values;
  std::map<std::string, bool> flags;
  std::string config_file;
  for (const auto& [name, help] : subcommands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_file, "key=value configuration file");
    for (const auto& key : config_keys()) {
      if (std::find(flag_keys.begin(), flag_keys.end(), key) != flag_keys.end()) {
        sub->add_flag("--" + key, flags[key], key_help.at(key));
      } else {
        sub->add_option("--" + key, values[key], key_help.at(key));
      }
    }
  }

  std::string features_in, features_out;
  auto* features = app.add_subcommand("features", "convert feature files to and from tab-separated text");
  features->require_subcommand(1);
  auto* dump = features->add_subcommand("dump", "binary feature file to text");
  auto* load = features->add_subcommand("load", "text back to a binary feature file");
  for (auto* sub : {dump, load}) {
    sub->add_option("input", features_in, "input file")->required();
    sub->add_option("-o,--output", features_out, "output file (default: stdout for dump)");
  }
  load->get_option("--output")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, er;
    const int code = app.exit(e, o, er);
    out << o.str();
    err << er.str();
    return code == 0 ? 0 : 1;
  }

  try {
    if (features->parsed()) {
      if (dump->parsed()) {
        const auto text = dump_feature_file(read_feature_file(features_in));
        if (features_out.empty()) out << text;
        else write_text(features_out, text);
      } else {
        std::ifstream in(features_in, std::ios::binary);
        if (!in) throw DataError("cannot open " + features_in);
        std::ostringstream buf;
        buf << in.rdbuf();
        write_feature_file(parse_feature_dump(buf.str(), features_in), features_out);
      }
      return 0;
    }
    RunConfig config;
    if (!config_file.empty()) load_config_file(config, config_file);
    auto* sub = app.get_subcommands().front();
    for (const auto& key : config_keys()) {
      if (sub->count("--" + key) == 0) continue;
      if (flags.count(key)) apply_setting(config, key, flags[key] ? "true" : "false");
      else apply_setting(config, key, values[key]);
    }
    apply_environment(config);

    const auto name = sub->get_name();
    if (name == "fixture") cmd_fixture(config, out);
    else if (name == "extract") cmd_extract(config, out);
    else if (name == "train-eval") cmd_train_eval(config, out);
    else if (name == "select") cmd_select(config, out);
    else cmd_report(config, out);
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace pedintent
