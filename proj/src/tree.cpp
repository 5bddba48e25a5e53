#include "pedintent/tree.hpp"

#include <algorithm>
#include <numeric>

#include "pedintent/error.hpp"

namespace pedintent {

double gini(std::size_t count0, std::size_t count1) {
  const double n = static_cast<double>(count0 + count1);
  if (n == 0.0) return 0.0;
  const double p0 = count0 / n;
  const double p1 = count1 / n;
  return 1.0 - p0 * p0 - p1 * p1;
}

std::size_t TreeModel::depth() const {
  std::size_t best = 0;
  std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [node, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    if (nodes[node].feature >= 0) {
      stack.emplace_back(nodes[node].left, d + 1);
      stack.emplace_back(nodes[node].right, d + 1);
    }
  }
  return best;
}

namespace {

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double gain = -1.0;
};

SplitChoice best_split(const Matrix& X, std::span<const int> y, std::span<const std::size_t> idx,
                       std::size_t min_leaf) {
  const std::size_t n = idx.size();
  std::size_t total1 = 0;
  for (auto i : idx) total1 += y[i];
  const double parent = gini(n - total1, total1);

  SplitChoice best;
  std::vector<std::size_t> order(idx.begin(), idx.end());
  for (std::size_t f = 0; f < X.cols(); ++f) {
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return X(a, f) < X(b, f) || (X(a, f) == X(b, f) && a < b);
    });
    std::size_t left1 = 0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      left1 += y[order[k]];
      const double lo = X(order[k], f);
      const double hi = X(order[k + 1], f);
      if (lo == hi) continue;
      const std::size_t nl = k + 1;
      const std::size_t nr = n - nl;
      if (nl < min_leaf || nr < min_leaf) continue;
      const double child = (nl * gini(nl - left1, left1) + nr * gini(nr - (total1 - left1), total1 - left1)) /
                           static_cast<double>(n);
      const double gain = parent - child;
      if (gain > best.gain) {
        double thr = lo + (hi - lo) / 2.0;
        if (!(thr < hi)) thr = lo;  // adjacent doubles
        best = {static_cast<int>(f), thr, gain};
      }
    }
  }
  return best;
}

}  // namespace

TreeModel tree_train(const Matrix& X, std::span<const int> labels, const TreeOptions& options) {
  if (X.rows() == 0) throw DataError("tree training needs at least one sample");
  if (labels.size() != X.rows()) throw DataError("label count does not match sample count");
  for (int l : labels) {
    if (l != 0 && l != 1) throw DataError("tree labels must be 0 or 1");
  }
  const std::size_t min_leaf = std::max<std::size_t>(1, options.min_leaf);

  TreeModel model;
  model.input_dim = X.cols();
  struct Pending {
    int node;
    std::vector<std::size_t> idx;
  };
  std::vector<std::size_t> all(X.rows());
  std::iota(all.begin(), all.end(), 0);
  model.nodes.emplace_back();
  std::vector<Pending> stack;
  stack.push_back({0, std::move(all)});

  while (!stack.empty()) {
    Pending job = std::move(stack.back());
    stack.pop_back();
    std::size_t ones = 0;
    for (auto i : job.idx) ones += labels[i];
    const std::size_t zeros = job.idx.size() - ones;
    {
      auto& node = model.nodes[job.node];
      node.label = ones >= zeros ? 1 : 0;
      node.purity = static_cast<double>(std::max(ones, zeros)) / job.idx.size();
    }
    if (ones == 0 || zeros == 0 || job.idx.size() < 2 * min_leaf) continue;

    const auto split = best_split(X, labels, job.idx, min_leaf);
    if (split.feature < 0) continue;

    std::vector<std::size_t> left, right;
    for (auto i : job.idx) (X(i, split.feature) <= split.threshold ? left : right).push_back(i);
    const int l = static_cast<int>(model.nodes.size());
    model.nodes.emplace_back();
    model.nodes.emplace_back();
    auto& node = model.nodes[job.node];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = l + 1;
    stack.push_back({l + 1, std::move(right)});
    stack.push_back({l, std::move(left)});
  }
  return model;
}

int tree_predict(const TreeModel& model, std::span<const double> x) {
  if (x.size() != model.input_dim) throw DataError("tree input dimension mismatch");
  int node = 0;
  while (model.nodes[node].feature >= 0) {
    const auto& n = model.nodes[node];
    node = x[n.feature] <= n.threshold ? n.left : n.right;
  }
  return model.nodes[node].label;
}

}  // namespace pedintent
