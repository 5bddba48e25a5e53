#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "pedintent/matrix.hpp"
#include "pedintent/mlp.hpp"
#include "pedintent/svm.hpp"
#include "pedintent/tree.hpp"

namespace pedintent {

/// Per-feature mean and population standard deviation.
struct Standardizer {
  std::vector<double> means;
  std::vector<double> stds;
  std::vector<bool> constant;  // zero variance; such features map to 0

  std::size_t dimension() const { return means.size(); }
  void apply(std::span<const double> x, std::span<double> out) const;
};

Standardizer standardize_fit(const Matrix& X);
Matrix standardize_apply(const Standardizer& s, const Matrix& X);

struct KnnModel {
  Matrix points;
  std::vector<int> labels;
  int k = 1;
};

KnnModel knn_fit(const Matrix& X, std::span<const int> labels, int k = 1);

/// Euclidean k-NN; distance ties go to the lower training index. For k > 1
/// the majority label wins and a tied vote falls back to the nearest point.
int knn_predict(const KnnModel& model, std::span<const double> x);

enum class ClassifierKind { knn, svm, ann, dt };

std::string_view to_string(ClassifierKind kind);
ClassifierKind parse_classifier_kind(std::string_view text);

/// Anything that maps a feature vector to class 0 or 1.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual int predict(std::span<const double> x) const = 0;
  virtual std::size_t input_dim() const = 0;
};

using ModelVariant = std::variant<KnnModel, SvmModel, MlpModel, TreeModel>;

/// A trained learner together with the standardisation fitted on its
/// training data.
class TrainedModel final : public Classifier {
 public:
  TrainedModel(Standardizer scaler, ModelVariant model)
      : scaler_(std::move(scaler)), model_(std::move(model)) {}

  int predict(std::span<const double> x) const override;
  std::size_t input_dim() const override { return scaler_.dimension(); }

  ClassifierKind kind() const;
  const Standardizer& scaler() const { return scaler_; }
  const ModelVariant& model() const { return model_; }

 private:
  Standardizer scaler_;
  ModelVariant model_;
};

struct TrainOptions {
  SvmOptions svm;
  MlpOptions mlp;
  TreeOptions tree;
  int knn_k = 1;
};

/// Standardises X, then fits the requested learner. Labels are 0/1 and both
/// classes must be present.
TrainedModel train_classifier(ClassifierKind kind, const Matrix& X, std::span<const int> labels,
                              const TrainOptions& options = {});

void check_binary_labels(std::span<const int> labels, std::size_t rows);

}  // namespace pedintent
