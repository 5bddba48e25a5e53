#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pedintent/learners.hpp"
#include "pedintent/matrix.hpp"

namespace pedintent {

struct FoldPlan {
  std::size_t k = 5;
  std::vector<int> fold_of;  // per sample, in [0, k)

  std::vector<std::size_t> members(std::size_t fold) const;
  std::vector<std::size_t> complement(std::size_t fold) const;
};

/// Seeded shuffle then contiguous chunking; the first n % k folds hold one
/// extra sample.
FoldPlan kfold(std::size_t n, std::size_t k = 5, std::uint64_t seed = 0);

using ClassifierPtr = std::shared_ptr<const Classifier>;
using Trainer = std::function<ClassifierPtr(const Matrix&, std::span<const int>)>;

Trainer make_trainer(ClassifierKind kind, const TrainOptions& options = {});

struct CvResult {
  std::vector<ClassifierPtr> models;   // model i never saw fold i
  std::vector<double> fold_accuracy;   // percent
  double mean_accuracy = 0.0;          // percent, pooled over all held-out samples
  std::vector<int> held_out_predictions;
};

CvResult cross_validate(const Trainer& trainer, const Matrix& X, std::span<const int> labels,
                        const FoldPlan& plan);

/// Row-normalised 2x2 confusion in percent; row = true class, column =
/// predicted class. A class absent from the labels leaves its row unset.
struct Confusion {
  std::array<std::optional<std::array<double, 2>>, 2> rows;
};

Confusion confusion_matrix(std::span<const int> predictions, std::span<const int> labels);
double accuracy_percent(std::span<const int> predictions, std::span<const int> labels);

struct EvalConfig {
  std::string task;
  std::string feature;
  std::string classifier;
  std::string split;
};

struct EvalReport {
  EvalConfig config;
  double accuracy = 0.0;                 // mean of member test accuracies
  Confusion confusion;                   // mean of member confusions
  std::vector<double> member_accuracy;   // test accuracy of each CV model
  double cv_accuracy = 0.0;
  std::vector<double> cv_fold_accuracy;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
};

/// Every model is scored on the whole test set; accuracy and confusion are
/// macro-averaged over the models.
EvalReport evaluate_ensemble(std::span<const ClassifierPtr> models, const Matrix& X,
                             std::span<const int> labels);

/// Majority vote of the models; a tie goes to class 1.
int ensemble_vote(std::span<const ClassifierPtr> models, std::span<const double> x);

std::string report_csv_header();
std::string report_csv_row(const EvalReport& report);

/// Human-readable block: accuracy line plus confusion table.
std::string format_report(const EvalReport& report, const std::array<std::string, 2>& class_names);

/// Accuracy grid: one row per classifier, one column per (task, feature).
/// Missing combinations print as "-".
std::string format_accuracy_table(std::span<const EvalReport> reports, const std::string& title);

}  // namespace pedintent
