#include "pedintent/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <unordered_map>

#include "pedintent/error.hpp"

namespace pedintent {

double kernel_cubic(std::span<const double> x, std::span<const double> z) {
  if (x.size() != z.size()) throw DataError("kernel dimension mismatch");
  const double t = 1.0 + dot(x, z);
  return t * t * t;
}

namespace {

constexpr double kTau = 1e-12;

std::vector<double> signed_labels(std::span<const int> labels, std::size_t rows) {
  if (labels.size() != rows) throw DataError("label count does not match sample count");
  std::vector<double> y(labels.size());
  bool seen[2] = {false, false};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw DataError("SVM labels must be 0 or 1");
    seen[labels[i]] = true;
    y[i] = labels[i] == 1 ? 1.0 : -1.0;
  }
  if (!seen[0] || !seen[1]) throw DataError("SVM training needs both classes");
  return y;
}

/// LRU cache of kernel matrix rows.
class KernelRows {
 public:
  KernelRows(const Matrix& X, std::size_t cache_mb) : X_(X) {
    const std::size_t row_bytes = std::max<std::size_t>(X.rows(), 1) * sizeof(double);
    capacity_ = std::max<std::size_t>(2, cache_mb * 1024 * 1024 / row_bytes);
    diag_.resize(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i) diag_[i] = kernel_cubic(X.row(i), X.row(i));
  }

  double diag(std::size_t i) const { return diag_[i]; }

  const std::vector<double>& row(std::size_t i) {
    if (auto it = index_.find(i); it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      return it->second->second;
    }
    if (lru_.size() >= capacity_) {
      index_.erase(lru_.back().first);
      lru_.pop_back();
    }
    std::vector<double> values(X_.rows());
    const auto xi = X_.row(i);
    for (std::size_t j = 0; j < X_.rows(); ++j) values[j] = kernel_cubic(xi, X_.row(j));
    lru_.emplace_front(i, std::move(values));
    index_[i] = lru_.begin();
    return lru_.front().second;
  }

 private:
  using Entry = std::pair<std::size_t, std::vector<double>>;
  const Matrix& X_;
  std::size_t capacity_;
  std::vector<double> diag_;
  std::list<Entry> lru_;
  std::unordered_map<std::size_t, std::list<Entry>::iterator> index_;
};

bool in_up(double y, double a, double C) { return (y > 0 && a < C) || (y < 0 && a > 0); }
bool in_low(double y, double a, double C) { return (y > 0 && a > 0) || (y < 0 && a < C); }

// Gradient convention: G = Q alpha - e with Q_ij = y_i y_j K_ij.
double kkt_gap(std::span<const double> y, std::span<const double> alpha, std::span<const double> G,
               double C) {
  double m = -std::numeric_limits<double>::infinity();
  double M = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < y.size(); ++t) {
    const double v = -y[t] * G[t];
    if (in_up(y[t], alpha[t], C)) m = std::max(m, v);
    if (in_low(y[t], alpha[t], C)) M = std::min(M, v);
  }
  return std::max(0.0, m - M);
}

}  // namespace

SvmModel svm_train(const Matrix& X, std::span<const int> labels, const SvmOptions& options,
                   SvmTrace* trace) {
  const std::size_t n = X.rows();
  const auto y = signed_labels(labels, n);
  const double C = options.C;
  if (!(C > 0.0)) throw UsageError("SVM C must be positive");

  KernelRows K(X, options.cache_mb);
  std::vector<double> alpha(n, 0.0);
  std::vector<double> G(n, -1.0);
  auto objective = [&] {
    // dual objective = -(1/2 alpha'Q alpha - e'alpha) = -1/2 sum alpha_i (G_i - 1)
    double f = 0.0;
    for (std::size_t t = 0; t < n; ++t) f += alpha[t] * (G[t] - 1.0);
    return -0.5 * f;
  };
  if (trace) trace->objective.clear();

  SvmModel model;
  model.C = C;
  std::size_t iter = 0;
  for (; iter < options.max_iter; ++iter) {
    std::size_t i = n, j = n;
    double m = -std::numeric_limits<double>::infinity();
    double M = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      const double v = -y[t] * G[t];
      if (in_up(y[t], alpha[t], C) && v > m) {
        m = v;
        i = t;
      }
      if (in_low(y[t], alpha[t], C) && v < M) {
        M = v;
        j = t;
      }
    }
    if (i == n || j == n || m - M <= options.tol) {
      model.converged = true;
      break;
    }

    const auto& Ki = K.row(i);
    const auto& Kj = K.row(j);
    const double old_ai = alpha[i];
    const double old_aj = alpha[j];
    const double Qij = y[i] * y[j] * Ki[j];

    if (y[i] != y[j]) {
      double quad = K.diag(i) + K.diag(j) + 2.0 * Qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-G[i] - G[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = C - diff;
        }
      } else if (alpha[j] > C) {
        alpha[j] = C;
        alpha[i] = C + diff;
      }
    } else {
      double quad = K.diag(i) + K.diag(j) - 2.0 * Qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (G[i] - G[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = sum - C;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > C) {
        if (alpha[j] > C) {
          alpha[j] = C;
          alpha[i] = sum - C;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }

    const double dai = alpha[i] - old_ai;
    const double daj = alpha[j] - old_aj;
    for (std::size_t t = 0; t < n; ++t) {
      G[t] += y[t] * (y[i] * Ki[t] * dai + y[j] * Kj[t] * daj);
    }
    if (trace && options.record_objective) trace->objective.push_back(objective());
  }
  model.iterations = iter;
  model.kkt_violation = kkt_gap(y, alpha, G, C);

  // rho: mean of y_t G_t over free vectors, else midpoint of the feasible interval
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yG = y[t] * G[t];
    if (alpha[t] >= C) {
      if (y[t] < 0) ub = std::min(ub, yG);
      else lb = std::max(lb, yG);
    } else if (alpha[t] <= 0.0) {
      if (y[t] > 0) ub = std::min(ub, yG);
      else lb = std::max(lb, yG);
    } else {
      ++n_free;
      sum_free += yG;
    }
  }
  const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;
  model.bias = -rho;

  std::size_t n_sv = 0;
  for (double a : alpha) n_sv += a > 0.0;
  model.support_vectors = Matrix(n_sv, X.cols());
  model.dual_coeffs.reserve(n_sv);
  for (std::size_t t = 0, k = 0; t < n; ++t) {
    if (alpha[t] > 0.0) {
      model.support_vectors.set_row(k++, X.row(t));
      model.dual_coeffs.push_back(alpha[t] * y[t]);
    }
  }
  if (trace) trace->alpha = std::move(alpha);
  return model;
}

double svm_decision(const SvmModel& model, std::span<const double> x) {
  if (x.size() != model.support_vectors.cols()) throw DataError("SVM input dimension mismatch");
  double f = model.bias;
  for (std::size_t i = 0; i < model.dual_coeffs.size(); ++i) {
    f += model.dual_coeffs[i] * kernel_cubic(model.support_vectors.row(i), x);
  }
  return f;
}

int svm_predict(const SvmModel& model, std::span<const double> x) {
  return svm_decision(model, x) >= 0.0 ? 1 : 0;
}

double svm_dual_objective(const Matrix& X, std::span<const int> labels, std::span<const double> alpha) {
  const auto y = signed_labels(labels, X.rows());
  double linear = 0.0;
  double quad = 0.0;
  for (std::size_t i = 0; i < X.rows(); ++i) {
    linear += alpha[i];
    for (std::size_t j = 0; j < X.rows(); ++j) {
      quad += alpha[i] * alpha[j] * y[i] * y[j] * kernel_cubic(X.row(i), X.row(j));
    }
  }
  return linear - 0.5 * quad;
}

double svm_kkt_violation(const Matrix& X, std::span<const int> labels, std::span<const double> alpha,
                         double C) {
  const auto y = signed_labels(labels, X.rows());
  const std::size_t n = X.rows();
  std::vector<double> G(n, -1.0);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t s = 0; s < n; ++s) {
      G[t] += y[t] * y[s] * alpha[s] * kernel_cubic(X.row(t), X.row(s));
    }
  }
  return kkt_gap(y, alpha, G, C);
}

}  // namespace pedintent
