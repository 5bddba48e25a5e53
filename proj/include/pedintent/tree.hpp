#pragma once

#include <span>
#include <vector>

#include "pedintent/matrix.hpp"

namespace pedintent {

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;     // x[feature] <= threshold
  int right = -1;
  int label = 0;
  double purity = 1.0;
};

struct TreeModel {
  std::size_t input_dim = 0;
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  std::size_t depth() const;
};

struct TreeOptions {
  std::size_t min_leaf = 1;
};

double gini(std::size_t count0, std::size_t count1);

/// Unpruned CART on Gini impurity. Thresholds are midpoints between
/// consecutive distinct values; ties prefer the lower feature index, then
/// the lower threshold.
TreeModel tree_train(const Matrix& X, std::span<const int> labels, const TreeOptions& options = {});

int tree_predict(const TreeModel& model, std::span<const double> x);

}  // namespace pedintent
