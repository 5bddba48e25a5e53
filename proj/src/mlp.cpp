#include "pedintent/mlp.hpp"

#include <cmath>
#include <string>

#include "pedintent/error.hpp"
#include "pedintent/random.hpp"

namespace pedintent {

namespace {

struct Activations {
  std::vector<double> hidden;
  std::array<double, 2> out{};
};

void forward(const MlpModel& m, std::span<const double> x, Activations& a) {
  const auto w1 = m.w1();
  const auto b1 = m.b1();
  const auto w2 = m.w2();
  const auto b2 = m.b2();
  a.hidden.resize(m.hidden);
  for (std::size_t h = 0; h < m.hidden; ++h) {
    a.hidden[h] = std::tanh(b1[h] + dot(w1.subspan(h * m.input_dim, m.input_dim), x));
  }
  for (std::size_t k = 0; k < 2; ++k) {
    a.out[k] = std::tanh(b2[k] + dot(w2.subspan(k * m.hidden, m.hidden), a.hidden));
  }
}

void check_shapes(const MlpModel& m, const Matrix& X, const Matrix& T) {
  if (X.cols() != m.input_dim) throw DataError("MLP input dimension mismatch");
  if (T.rows() != X.rows() || T.cols() != 2) throw DataError("MLP targets must be n x 2");
  if (X.rows() == 0) throw DataError("MLP needs at least one sample");
}

}  // namespace

std::array<double, 2> mlp_forward(const MlpModel& model, std::span<const double> x) {
  if (x.size() != model.input_dim) throw DataError("MLP input dimension mismatch");
  Activations a;
  forward(model, x, a);
  return a.out;
}

int mlp_predict(const MlpModel& model, std::span<const double> x) {
  const auto out = mlp_forward(model, x);
  return out[1] >= out[0] ? 1 : 0;
}

Matrix one_hot(std::span<const int> labels) {
  Matrix T(labels.size(), 2);
  for (std::size_t i = 0; i < labels.size(); ++i) T(i, labels[i] == 1 ? 1 : 0) = 1.0;
  return T;
}

double mlp_loss(const MlpModel& model, const Matrix& X, const Matrix& targets) {
  check_shapes(model, X, targets);
  Activations a;
  double sum = 0.0;
  for (std::size_t i = 0; i < X.rows(); ++i) {
    forward(model, X.row(i), a);
    for (std::size_t k = 0; k < 2; ++k) {
      const double e = a.out[k] - targets(i, k);
      sum += e * e;
    }
  }
  return sum / (2.0 * static_cast<double>(X.rows()));
}

std::vector<double> mlp_grad(const MlpModel& model, const Matrix& X, const Matrix& targets) {
  check_shapes(model, X, targets);
  const std::size_t d = model.input_dim;
  const std::size_t H = model.hidden;
  std::vector<double> g(model.params.size(), 0.0);
  double* gw1 = g.data();
  double* gb1 = gw1 + H * d;
  double* gw2 = gb1 + H;
  double* gb2 = gw2 + 2 * H;
  const auto w2 = model.w2();
  const double scale = 1.0 / static_cast<double>(X.rows());

  Activations a;
  std::vector<double> delta1(H);
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const auto x = X.row(i);
    forward(model, x, a);
    double delta2[2];
    for (std::size_t k = 0; k < 2; ++k) {
      delta2[k] = scale * (a.out[k] - targets(i, k)) * (1.0 - a.out[k] * a.out[k]);
      gb2[k] += delta2[k];
      for (std::size_t h = 0; h < H; ++h) gw2[k * H + h] += delta2[k] * a.hidden[h];
    }
    for (std::size_t h = 0; h < H; ++h) {
      const double back = w2[h] * delta2[0] + w2[H + h] * delta2[1];
      delta1[h] = back * (1.0 - a.hidden[h] * a.hidden[h]);
      gb1[h] += delta1[h];
      double* row = gw1 + h * d;
      for (std::size_t c = 0; c < d; ++c) row[c] += delta1[h] * x[c];
    }
  }
  return g;
}

MlpModel mlp_train(const Matrix& X, std::span<const int> labels, const MlpOptions& options,
                   MlpTrace* trace) {
  if (X.cols() == 0) throw DataError("MLP needs at least one input feature");
  if (labels.size() != X.rows()) throw DataError("label count does not match sample count");
  bool seen[2] = {false, false};
  for (int l : labels) {
    if (l != 0 && l != 1) throw DataError("MLP labels must be 0 or 1");
    seen[l] = true;
  }
  // a single sample is allowed (overfit checks); otherwise both classes are required
  if (X.rows() > 1 && !(seen[0] && seen[1])) throw DataError("MLP training needs both classes");

  MlpModel model(X.cols(), options.hidden);
  Rng rng(options.seed);
  for (double& p : model.params) p = uniform01(rng) - 0.5;

  const Matrix T = one_hot(labels);
  double loss = mlp_loss(model, X, T);
  if (!std::isfinite(loss)) throw NumericalError("MLP loss is non-finite at epoch 0");
  if (trace) trace->loss.assign(1, loss);

  constexpr double armijo = 1e-4;
  double step = options.initial_step;
  MlpModel candidate = model;
  for (std::size_t epoch = 1; epoch <= options.epochs && loss > options.min_loss; ++epoch) {
    const auto g = mlp_grad(model, X, T);
    double gg = 0.0;
    for (double v : g) gg += v * v;
    if (!std::isfinite(gg)) {
      throw NumericalError("MLP gradient is non-finite at epoch " + std::to_string(epoch));
    }
    if (gg < 1e-24) break;

    bool accepted = false;
    for (int attempt = 0; attempt < 60; ++attempt) {
      for (std::size_t p = 0; p < g.size(); ++p) candidate.params[p] = model.params[p] - step * g[p];
      const double trial = mlp_loss(candidate, X, T);
      if (std::isfinite(trial) && trial <= loss - armijo * step * gg) {
        std::swap(model.params, candidate.params);
        loss = trial;
        accepted = true;
        step *= 2.0;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    if (trace) trace->loss.push_back(loss);
  }
  return model;
}

}  // namespace pedintent
