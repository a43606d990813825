#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "narrative/types.hpp"

namespace narrative {

struct SvmConfig {
  int epochs = 300;
  double learning_rate = 0.05;
  double l1 = 1e-4;  // L1 penalty weight, applied per step (proximal)
  std::uint64_t seed = 0;
};

/// One-vs-rest linear SVM with hinge loss and an L1 penalty, trained by SGD
/// with a proximal soft-threshold step.
class LinearSvm {
 public:
  static LinearSvm train(const Eigen::MatrixXf& features,
                         const std::vector<int>& labels, int num_classes,
                         const SvmConfig& config = {});

  /// Argmax margin; exact ties resolve toward the lower class index.
  int predict(const Eigen::VectorXf& x) const;

  const Eigen::MatrixXf& weights() const { return w_; }
  const Eigen::VectorXf& biases() const { return b_; }

 private:
  Eigen::MatrixXf w_;  // num_classes x dim
  Eigen::VectorXf b_;
};

struct ForestConfig {
  int n_trees = 100;
  int max_depth = 32;
  int min_samples_leaf = 1;
  int max_features = 0;  // 0 = floor(sqrt(dim)), the usual default
  std::uint64_t seed = 0;
};

/// Bootstrap-aggregated CART trees with Gini splits and per-split random
/// feature subsets; prediction is a majority vote.
class RandomForest {
 public:
  static RandomForest train(const Eigen::MatrixXf& features,
                            const std::vector<int>& labels, int num_classes,
                            const ForestConfig& config = {});

  int predict(const Eigen::VectorXf& x) const;
  std::size_t tree_count() const { return trees_.size(); }

 private:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    float threshold = 0.0f;
    int left = -1;
    int right = -1;
    int leaf_label = -1;
  };
  std::vector<std::vector<Node>> trees_;
  int num_classes_ = 0;
};

}  // namespace narrative
