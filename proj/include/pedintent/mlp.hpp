#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "pedintent/matrix.hpp"

namespace pedintent {

/// One hidden layer of tanh units feeding two tanh outputs, one per class.
/// All weights live in one flat vector: W1 (hidden x d), b1, W2 (2 x hidden), b2.
struct MlpModel {
  std::size_t input_dim = 0;
  std::size_t hidden = 10;
  std::vector<double> params;

  MlpModel() = default;
  MlpModel(std::size_t d, std::size_t h) : input_dim(d), hidden(h), params(size_for(d, h), 0.0) {}

  static std::size_t size_for(std::size_t d, std::size_t h) { return h * d + h + 2 * h + 2; }

  std::span<const double> w1() const { return {params.data(), hidden * input_dim}; }
  std::span<const double> b1() const { return {params.data() + hidden * input_dim, hidden}; }
  std::span<const double> w2() const { return {params.data() + hidden * (input_dim + 1), 2 * hidden}; }
  std::span<const double> b2() const { return {params.data() + hidden * (input_dim + 3), 2}; }
};

struct MlpOptions {
  std::size_t hidden = 10;
  std::size_t epochs = 300;
  std::uint64_t seed = 0;
  double initial_step = 0.5;
  double min_loss = 1e-6;
};

std::array<double, 2> mlp_forward(const MlpModel& model, std::span<const double> x);

/// argmax of the two outputs; ties go to class 1.
int mlp_predict(const MlpModel& model, std::span<const double> x);

/// One-hot targets for 0/1 labels, n x 2.
Matrix one_hot(std::span<const int> labels);

/// Mean over all n x 2 outputs of the squared error.
double mlp_loss(const MlpModel& model, const Matrix& X, const Matrix& targets);

/// Gradient of mlp_loss with respect to `params`, same layout.
std::vector<double> mlp_grad(const MlpModel& model, const Matrix& X, const Matrix& targets);

struct MlpTrace {
  std::vector<double> loss;  // loss after each accepted step, loss[0] = initial
};

/// Full-batch gradient descent with Armijo backtracking; accepted steps
/// never increase the loss. Weights start uniform in [-0.5, 0.5].
MlpModel mlp_train(const Matrix& X, std::span<const int> labels, const MlpOptions& options = {},
                   MlpTrace* trace = nullptr);

}  // namespace pedintent
