#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pedintent/matrix.hpp"

namespace pedintent {

/// (1 + x.z)^3
double kernel_cubic(std::span<const double> x, std::span<const double> z);

struct SvmOptions {
  double C = 1.0;
  double tol = 1e-3;
  std::size_t max_iter = 100000;
  std::size_t cache_mb = 256;
  bool record_objective = false;
};

/// Binary soft-margin SVM with the cubic kernel. Class 1 maps to +1.
struct SvmModel {
  Matrix support_vectors;
  std::vector<double> dual_coeffs;  // alpha_i * y_i, alpha_i > 0
  double bias = 0.0;
  double C = 1.0;
  bool converged = false;
  std::size_t iterations = 0;
  double kkt_violation = 0.0;
};

struct SvmTrace {
  std::vector<double> alpha;      // one per training sample
  std::vector<double> objective;  // dual objective after each iteration
};

/// SMO on the dual with maximal-violating-pair selection. Stops when the
/// KKT gap m(alpha) - M(alpha) is at most `tol`; after `max_iter` the model
/// comes back with `converged == false`.
SvmModel svm_train(const Matrix& X, std::span<const int> labels, const SvmOptions& options = {},
                   SvmTrace* trace = nullptr);

double svm_decision(const SvmModel& model, std::span<const double> x);

/// Sign of the decision value; zero goes to class 1.
int svm_predict(const SvmModel& model, std::span<const double> x);

/// Dual objective sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij,
/// evaluated directly.
double svm_dual_objective(const Matrix& X, std::span<const int> labels, std::span<const double> alpha);

/// Maximal KKT gap m(alpha) - M(alpha) recomputed from scratch (0 when
/// optimal).
double svm_kkt_violation(const Matrix& X, std::span<const int> labels, std::span<const double> alpha,
                         double C);

}  // namespace pedintent
