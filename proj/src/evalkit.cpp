#include "pedintent/evalkit.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>

#include "pedintent/error.hpp"
#include "pedintent/random.hpp"

namespace pedintent {

std::vector<std::size_t> FoldPlan::members(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (static_cast<std::size_t>(fold_of[i]) == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldPlan::complement(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (static_cast<std::size_t>(fold_of[i]) != fold) out.push_back(i);
  }
  return out;
}

FoldPlan kfold(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw UsageError("k-fold needs k >= 2");
  if (n < k) {
    throw DataError("cannot split " + std::to_string(n) + " samples into " + std::to_string(k) + " folds");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  seeded_shuffle(std::span<std::size_t>(order), rng);

  FoldPlan plan;
  plan.k = k;
  plan.fold_of.assign(n, 0);
  const std::size_t base = n / k;
  const std::size_t extra = n % k;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    for (std::size_t t = 0; t < size; ++t) plan.fold_of[order[pos++]] = static_cast<int>(f);
  }
  return plan;
}

Trainer make_trainer(ClassifierKind kind, const TrainOptions& options) {
  return [kind, options](const Matrix& X, std::span<const int> y) -> ClassifierPtr {
    return std::make_shared<TrainedModel>(train_classifier(kind, X, y, options));
  };
}

double accuracy_percent(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) throw DataError("prediction/label length mismatch");
  if (labels.empty()) throw DataError("accuracy of an empty set");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) correct += predictions[i] == labels[i];
  return 100.0 * static_cast<double>(correct) / static_cast<double>(labels.size());
}

CvResult cross_validate(const Trainer& trainer, const Matrix& X, std::span<const int> labels,
                        const FoldPlan& plan) {
  if (plan.fold_of.size() != X.rows() || labels.size() != X.rows()) {
    throw DataError("fold plan, samples and labels must have the same length");
  }
  CvResult result;
  result.held_out_predictions.assign(X.rows(), 0);
  std::size_t correct = 0;
  for (std::size_t f = 0; f < plan.k; ++f) {
    const auto held = plan.members(f);
    const auto train = plan.complement(f);
    bool seen[2] = {false, false};
    for (auto i : held) seen[labels[i] == 1] = true;
    if (!seen[0] || !seen[1]) {
      throw DataError("fold " + std::to_string(f) + " contains a single class");
    }
    std::vector<int> train_labels;
    for (auto i : train) train_labels.push_back(labels[i]);

    auto model = trainer(X.select_rows(train), train_labels);
    std::size_t fold_correct = 0;
    for (auto i : held) {
      const int p = model->predict(X.row(i));
      result.held_out_predictions[i] = p;
      fold_correct += p == labels[i];
    }
    correct += fold_correct;
    result.fold_accuracy.push_back(100.0 * fold_correct / static_cast<double>(held.size()));
    result.models.push_back(std::move(model));
  }
  result.mean_accuracy = 100.0 * static_cast<double>(correct) / static_cast<double>(X.rows());
  return result;
}

Confusion confusion_matrix(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) throw DataError("prediction/label length mismatch");
  std::size_t counts[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if ((labels[i] != 0 && labels[i] != 1) || (predictions[i] != 0 && predictions[i] != 1)) {
      throw DataError("confusion matrix expects 0/1 classes");
    }
    ++counts[labels[i]][predictions[i]];
  }
  Confusion c;
  for (int r = 0; r < 2; ++r) {
    const std::size_t total = counts[r][0] + counts[r][1];
    if (total == 0) continue;
    c.rows[r] = std::array<double, 2>{100.0 * counts[r][0] / static_cast<double>(total),
                                      100.0 * counts[r][1] / static_cast<double>(total)};
  }
  return c;
}

int ensemble_vote(std::span<const ClassifierPtr> models, std::span<const double> x) {
  std::size_t ones = 0;
  for (const auto& m : models) ones += m->predict(x) == 1;
  return 2 * ones >= models.size() ? 1 : 0;
}

EvalReport evaluate_ensemble(std::span<const ClassifierPtr> models, const Matrix& X,
                             std::span<const int> labels) {
  if (models.empty()) throw DataError("ensemble has no models");
  if (labels.size() != X.rows()) throw DataError("label count does not match sample count");
  EvalReport report;
  report.n_test = X.rows();
  std::array<std::array<double, 2>, 2> sums{};
  std::array<std::size_t, 2> defined{};
  std::vector<int> pred(X.rows());
  for (const auto& m : models) {
    if (m->input_dim() != X.cols()) {
      throw DataError("model expects " + std::to_string(m->input_dim()) + " features, test set has " +
                      std::to_string(X.cols()));
    }
    for (std::size_t i = 0; i < X.rows(); ++i) pred[i] = m->predict(X.row(i));
    report.member_accuracy.push_back(accuracy_percent(pred, labels));
    const auto c = confusion_matrix(pred, labels);
    for (int r = 0; r < 2; ++r) {
      if (!c.rows[r]) continue;
      ++defined[r];
      sums[r][0] += (*c.rows[r])[0];
      sums[r][1] += (*c.rows[r])[1];
    }
  }
  report.accuracy = std::accumulate(report.member_accuracy.begin(), report.member_accuracy.end(), 0.0) /
                    static_cast<double>(models.size());
  for (int r = 0; r < 2; ++r) {
    if (defined[r] == 0) continue;
    report.confusion.rows[r] = std::array<double, 2>{sums[r][0] / defined[r], sums[r][1] / defined[r]};
  }
  return report;
}

namespace {

std::string fixed(double v, int digits) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(digits) << v;
  return out.str();
}

std::string cell(const std::optional<std::array<double, 2>>& row, int col) {
  return row ? fixed((*row)[col], 4) : std::string("nan");
}

}  // namespace

std::string report_csv_header() {
  return "task,feature,classifier,split,n_train,n_test,accuracy,cv_accuracy,"
         "c00,c01,c10,c11,member_accuracy\n";
}

std::string report_csv_row(const EvalReport& r) {
  std::ostringstream out;
  out << r.config.task << ',' << r.config.feature << ',' << r.config.classifier << ',' << r.config.split
      << ',' << r.n_train << ',' << r.n_test << ',' << fixed(r.accuracy, 4) << ','
      << fixed(r.cv_accuracy, 4) << ',' << cell(r.confusion.rows[0], 0) << ','
      << cell(r.confusion.rows[0], 1) << ',' << cell(r.confusion.rows[1], 0) << ','
      << cell(r.confusion.rows[1], 1) << ',';
  for (std::size_t i = 0; i < r.member_accuracy.size(); ++i) {
    out << (i ? ";" : "") << fixed(r.member_accuracy[i], 4);
  }
  out << '\n';
  return out.str();
}

std::string format_report(const EvalReport& r, const std::array<std::string, 2>& names) {
  std::ostringstream out;
  out << "task " << r.config.task << "  feature " << r.config.feature << "  classifier "
      << r.config.classifier << "  split " << r.config.split << '\n';
  out << "train " << r.n_train << "  test " << r.n_test << "  cv accuracy " << fixed(r.cv_accuracy, 1)
      << "%  test accuracy " << fixed(r.accuracy, 1) << "%\n\n";
  const std::size_t w = std::max<std::size_t>({names[0].size(), names[1].size(), 8}) + 2;
  out << std::setw(static_cast<int>(w)) << "" << std::setw(static_cast<int>(w)) << names[0]
      << std::setw(static_cast<int>(w)) << names[1] << '\n';
  for (int row = 0; row < 2; ++row) {
    out << std::setw(static_cast<int>(w)) << names[row];
    for (int col = 0; col < 2; ++col) {
      const auto& cr = r.confusion.rows[row];
      out << std::setw(static_cast<int>(w)) << (cr ? fixed((*cr)[col], 1) + "%" : std::string("-"));
    }
    out << '\n';
  }
  return out.str();
}

std::string format_accuracy_table(std::span<const EvalReport> reports, const std::string& title) {
  static const char* classifiers[] = {"knn", "svm", "ann", "dt"};
  static const char* classifier_titles[] = {"k-NN", "SVM", "ANN", "DT"};
  static const char* tasks[] = {"head", "motion"};
  static const char* features[] = {"hog", "lbp", "cnn"};

  std::map<std::tuple<std::string, std::string, std::string>, double> acc;
  for (const auto& r : reports) acc[{r.config.task, r.config.feature, r.config.classifier}] = r.accuracy;

  std::ostringstream out;
  out << title << '\n';
  out << std::left << std::setw(12) << "" << std::setw(24) << "Head orientation" << "Motion detection\n";
  out << std::setw(12) << "Classifier";
  for (int t = 0; t < 2; ++t) {
    for (const char* f : features) {
      std::string name = f;
      std::transform(name.begin(), name.end(), name.begin(), ::toupper);
      out << std::setw(8) << name;
    }
  }
  out << '\n';
  for (int c = 0; c < 4; ++c) {
    out << std::setw(12) << classifier_titles[c];
    for (const char* task : tasks) {
      for (const char* f : features) {
        auto it = acc.find({task, f, classifiers[c]});
        out << std::setw(8) << (it == acc.end() ? std::string("-") : fixed(it->second, 0) + "%");
      }
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace pedintent
