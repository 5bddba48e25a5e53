#include "pedintent/learners.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "pedintent/error.hpp"

namespace pedintent {

void Standardizer::apply(std::span<const double> x, std::span<double> out) const {
  if (x.size() != means.size() || out.size() != means.size()) {
    throw DataError("standardizer dimension mismatch: expected " + std::to_string(means.size()) +
                    ", got " + std::to_string(x.size()));
  }
  for (std::size_t c = 0; c < x.size(); ++c) {
    out[c] = constant[c] ? 0.0 : (x[c] - means[c]) / stds[c];
  }
}

Standardizer standardize_fit(const Matrix& X) {
  if (X.rows() == 0) throw DataError("cannot fit a standardizer on zero samples");
  const std::size_t d = X.cols();
  Standardizer s;
  s.means.assign(d, 0.0);
  s.stds.assign(d, 0.0);
  s.constant.assign(d, true);
  const double n = static_cast<double>(X.rows());
  for (std::size_t r = 0; r < X.rows(); ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      s.means[c] += X(r, c);
      if (X(r, c) != X(0, c)) s.constant[c] = false;
    }
  }
  for (auto& m : s.means) m /= n;
  for (std::size_t r = 0; r < X.rows(); ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      const double e = X(r, c) - s.means[c];
      s.stds[c] += e * e;
    }
  }
  for (std::size_t c = 0; c < d; ++c) {
    s.stds[c] = std::sqrt(s.stds[c] / n);
    if (s.stds[c] == 0.0) s.constant[c] = true;
  }
  return s;
}

Matrix standardize_apply(const Standardizer& s, const Matrix& X) {
  Matrix out(X.rows(), X.cols());
  for (std::size_t r = 0; r < X.rows(); ++r) s.apply(X.row(r), out.row(r));
  return out;
}

void check_binary_labels(std::span<const int> labels, std::size_t rows) {
  if (labels.size() != rows) throw DataError("label count does not match sample count");
  bool seen[2] = {false, false};
  for (int l : labels) {
    if (l != 0 && l != 1) throw DataError("labels must be 0 or 1");
    seen[l] = true;
  }
  if (!seen[0] || !seen[1]) throw DataError("training data must contain both classes");
}

KnnModel knn_fit(const Matrix& X, std::span<const int> labels, int k) {
  if (X.rows() == 0) throw DataError("k-NN needs at least one training point");
  if (labels.size() != X.rows()) throw DataError("label count does not match sample count");
  if (k < 1) throw UsageError("k must be >= 1");
  return KnnModel{X, {labels.begin(), labels.end()}, k};
}

int knn_predict(const KnnModel& model, std::span<const double> x) {
  if (model.points.rows() == 0) throw DataError("k-NN model is empty");
  if (x.size() != model.points.cols()) throw DataError("k-NN input dimension mismatch");
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(model.k), model.points.rows());

  // (distance, index) of the k nearest, kept sorted; strict < keeps lower indices on ties
  std::vector<std::pair<double, std::size_t>> nearest;
  nearest.reserve(k + 1);
  for (std::size_t i = 0; i < model.points.rows(); ++i) {
    const auto p = model.points.row(i);
    double d2 = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) {
      const double e = p[c] - x[c];
      d2 += e * e;
    }
    if (nearest.size() == k && !(d2 < nearest.back().first)) continue;
    auto pos = nearest.end();
    while (pos != nearest.begin() && d2 < std::prev(pos)->first) --pos;
    nearest.insert(pos, {d2, i});
    if (nearest.size() > k) nearest.pop_back();
  }
  std::size_t votes1 = 0;
  for (const auto& [d, i] : nearest) votes1 += model.labels[i];
  const std::size_t votes0 = nearest.size() - votes1;
  if (votes1 == votes0) return model.labels[nearest.front().second];
  return votes1 > votes0 ? 1 : 0;
}

std::string_view to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::knn: return "knn";
    case ClassifierKind::svm: return "svm";
    case ClassifierKind::ann: return "ann";
    case ClassifierKind::dt: return "dt";
  }
  return "?";
}

ClassifierKind parse_classifier_kind(std::string_view text) {
  if (text == "knn") return ClassifierKind::knn;
  if (text == "svm") return ClassifierKind::svm;
  if (text == "ann") return ClassifierKind::ann;
  if (text == "dt") return ClassifierKind::dt;
  throw UsageError("unknown classifier '" + std::string(text) + "'");
}

namespace {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
}  // namespace

int TrainedModel::predict(std::span<const double> x) const {
  std::vector<double> z(x.size());
  scaler_.apply(x, z);
  return std::visit(overloaded{[&](const KnnModel& m) { return knn_predict(m, z); },
                               [&](const SvmModel& m) { return svm_predict(m, z); },
                               [&](const MlpModel& m) { return mlp_predict(m, z); },
                               [&](const TreeModel& m) { return tree_predict(m, z); }},
                    model_);
}

ClassifierKind TrainedModel::kind() const {
  return std::visit(overloaded{[](const KnnModel&) { return ClassifierKind::knn; },
                               [](const SvmModel&) { return ClassifierKind::svm; },
                               [](const MlpModel&) { return ClassifierKind::ann; },
                               [](const TreeModel&) { return ClassifierKind::dt; }},
                    model_);
}

TrainedModel train_classifier(ClassifierKind kind, const Matrix& X, std::span<const int> labels,
                              const TrainOptions& options) {
  check_binary_labels(labels, X.rows());
  auto scaler = standardize_fit(X);
  const Matrix Z = standardize_apply(scaler, X);
  switch (kind) {
    case ClassifierKind::knn:
      return {std::move(scaler), knn_fit(Z, labels, options.knn_k)};
    case ClassifierKind::svm: {
      auto model = svm_train(Z, labels, options.svm);
      if (!model.converged) {
        throw NumericalError("SVM did not converge within " + std::to_string(options.svm.max_iter) +
                             " iterations (KKT gap " + std::to_string(model.kkt_violation) + ")");
      }
      return {std::move(scaler), std::move(model)};
    }
    case ClassifierKind::ann:
      return {std::move(scaler), mlp_train(Z, labels, options.mlp)};
    case ClassifierKind::dt:
      return {std::move(scaler), tree_train(Z, labels, options.tree)};
  }
  throw UsageError("unknown classifier kind");
}

}  // namespace pedintent
