#include "narrative/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <set>

#include "narrative/rng.hpp"

namespace narrative {

namespace {

void check_training_inputs(const Eigen::MatrixXf& features,
                           const std::vector<int>& labels, int num_classes) {
  if (features.rows() == 0) throw DataError("empty training set");
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw std::invalid_argument("feature/label count mismatch");
  }
  std::set<int> distinct(labels.begin(), labels.end());
  for (int label : distinct) {
    if (label < 0 || label >= num_classes) {
      throw std::invalid_argument("label out of range: " + std::to_string(label));
    }
  }
  if (distinct.size() < 2) {
    throw DataError("degenerate single-class training data");
  }
}

}  // namespace

LinearSvm LinearSvm::train(const Eigen::MatrixXf& features,
                           const std::vector<int>& labels, int num_classes,
                           const SvmConfig& config) {
  check_training_inputs(features, labels, num_classes);
  const Eigen::Index n = features.rows();
  const Eigen::Index dim = features.cols();

  LinearSvm svm;
  svm.w_ = Eigen::MatrixXf::Zero(num_classes, dim);
  svm.b_ = Eigen::VectorXf::Zero(num_classes);

  SplitMix64 rng(config.seed);
  std::vector<std::size_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const float lr = static_cast<float>(config.learning_rate /
                                        (1.0 + 0.01 * epoch));
    const float shrink = lr * static_cast<float>(config.l1);
    rng.shuffle(order);
    for (std::size_t idx : order) {
      const auto x = features.row(static_cast<Eigen::Index>(idx));
      for (int c = 0; c < num_classes; ++c) {
        const float y = labels[idx] == c ? 1.0f : -1.0f;
        const float margin = y * (svm.w_.row(c).dot(x) + svm.b_(c));
        if (margin < 1.0f) {
          svm.w_.row(c) += lr * y * x;
          svm.b_(c) += lr * y;
        }
        // proximal L1 step
        for (Eigen::Index d = 0; d < dim; ++d) {
          float& w = svm.w_(c, d);
          if (w > shrink) {
            w -= shrink;
          } else if (w < -shrink) {
            w += shrink;
          } else {
            w = 0.0f;
          }
        }
      }
    }
  }
  return svm;
}

int LinearSvm::predict(const Eigen::VectorXf& x) const {
  if (x.size() != w_.cols()) {
    throw std::invalid_argument("feature dimension mismatch");
  }
  Eigen::VectorXf margins = w_ * x + b_;
  int best = 0;
  for (int c = 1; c < margins.size(); ++c) {
    if (margins(c) > margins(best)) best = c;
  }
  return best;
}

RandomForest RandomForest::train(const Eigen::MatrixXf& features,
                                 const std::vector<int>& labels,
                                 int num_classes, const ForestConfig& config) {
  check_training_inputs(features, labels, num_classes);
  const std::size_t n = static_cast<std::size_t>(features.rows());
  const int dim = static_cast<int>(features.cols());
  const int max_features =
      config.max_features > 0
          ? std::min(config.max_features, dim)
          : std::max(1, static_cast<int>(std::sqrt(static_cast<double>(dim))));

  RandomForest forest;
  forest.num_classes_ = num_classes;

  auto gini = [&](const std::vector<std::size_t>& counts, std::size_t total) {
    if (total == 0) return 0.0;
    double sum = 0.0;
    for (std::size_t c : counts) {
      const double p = static_cast<double>(c) / static_cast<double>(total);
      sum += p * p;
    }
    return 1.0 - sum;
  };

  auto majority = [&](const std::vector<std::size_t>& samples) {
    std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes), 0);
    for (std::size_t i : samples) counts[static_cast<std::size_t>(labels[i])]++;
    int best = 0;
    for (int c = 1; c < num_classes; ++c) {
      if (counts[static_cast<std::size_t>(c)] >
          counts[static_cast<std::size_t>(best)]) {
        best = c;
      }
    }
    return best;
  };

  for (int t = 0; t < config.n_trees; ++t) {
    SplitMix64 tree_rng(splitmix64(config.seed) ^
                        splitmix64(static_cast<std::uint64_t>(t) + 1));
    std::vector<std::size_t> sample(n);
    for (std::size_t i = 0; i < n; ++i) sample[i] = tree_rng.uniform_index(n);

    std::vector<Node> nodes;
    std::vector<int> feature_pool(static_cast<std::size_t>(dim));
    std::iota(feature_pool.begin(), feature_pool.end(), 0);

    // recursive CART growth; returns node index
    std::function<int(std::vector<std::size_t>&, int)> grow =
        [&](std::vector<std::size_t>& samples, int depth) -> int {
      const int node_index = static_cast<int>(nodes.size());
      nodes.push_back(Node{});

      bool pure = true;
      for (std::size_t i = 1; i < samples.size(); ++i) {
        if (labels[samples[i]] != labels[samples[0]]) {
          pure = false;
          break;
        }
      }
      if (pure || depth >= config.max_depth ||
          samples.size() < 2 * static_cast<std::size_t>(config.min_samples_leaf)) {
        nodes[static_cast<std::size_t>(node_index)].leaf_label =
            majority(samples);
        return node_index;
      }

      // random feature subset: partial Fisher-Yates over the pool
      for (int k = 0; k < max_features; ++k) {
        std::size_t j = k + tree_rng.uniform_index(
                                static_cast<std::size_t>(dim - k));
        std::swap(feature_pool[static_cast<std::size_t>(k)], feature_pool[j]);
      }

      double best_impurity = std::numeric_limits<double>::infinity();
      int best_feature = -1;
      float best_threshold = 0.0f;
      std::vector<float> values;
      for (int k = 0; k < max_features; ++k) {
        const int f = feature_pool[static_cast<std::size_t>(k)];
        values.clear();
        for (std::size_t i : samples) {
          values.push_back(features(static_cast<Eigen::Index>(i), f));
        }
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        if (values.size() < 2) continue;
        for (std::size_t v = 0; v + 1 < values.size(); ++v) {
          const float threshold = 0.5f * (values[v] + values[v + 1]);
          std::vector<std::size_t> left_counts(
              static_cast<std::size_t>(num_classes), 0);
          std::vector<std::size_t> right_counts(
              static_cast<std::size_t>(num_classes), 0);
          std::size_t n_left = 0;
          for (std::size_t i : samples) {
            if (features(static_cast<Eigen::Index>(i), f) <= threshold) {
              left_counts[static_cast<std::size_t>(labels[i])]++;
              ++n_left;
            } else {
              right_counts[static_cast<std::size_t>(labels[i])]++;
            }
          }
          const std::size_t n_right = samples.size() - n_left;
          if (n_left < static_cast<std::size_t>(config.min_samples_leaf) ||
              n_right < static_cast<std::size_t>(config.min_samples_leaf)) {
            continue;
          }
          const double impurity =
              (static_cast<double>(n_left) * gini(left_counts, n_left) +
               static_cast<double>(n_right) * gini(right_counts, n_right)) /
              static_cast<double>(samples.size());
          if (impurity < best_impurity) {
            best_impurity = impurity;
            best_feature = f;
            best_threshold = threshold;
          }
        }
      }

      std::vector<std::size_t> class_counts(
          static_cast<std::size_t>(num_classes), 0);
      for (std::size_t i : samples) {
        class_counts[static_cast<std::size_t>(labels[i])]++;
      }
      if (best_feature < 0 ||
          best_impurity >= gini(class_counts, samples.size())) {
        nodes[static_cast<std::size_t>(node_index)].leaf_label =
            majority(samples);
        return node_index;
      }

      std::vector<std::size_t> left, right;
      for (std::size_t i : samples) {
        if (features(static_cast<Eigen::Index>(i), best_feature) <=
            best_threshold) {
          left.push_back(i);
        } else {
          right.push_back(i);
        }
      }
      samples.clear();
      samples.shrink_to_fit();

      const int left_index = grow(left, depth + 1);
      const int right_index = grow(right, depth + 1);
      Node& node = nodes[static_cast<std::size_t>(node_index)];
      node.feature = best_feature;
      node.threshold = best_threshold;
      node.left = left_index;
      node.right = right_index;
      return node_index;
    };

    grow(sample, 0);
    forest.trees_.push_back(std::move(nodes));
  }
  return forest;
}

int RandomForest::predict(const Eigen::VectorXf& x) const {
  std::vector<std::size_t> votes(static_cast<std::size_t>(num_classes_), 0);
  for (const std::vector<Node>& tree : trees_) {
    int at = 0;
    while (tree[static_cast<std::size_t>(at)].feature >= 0) {
      const Node& node = tree[static_cast<std::size_t>(at)];
      at = x(node.feature) <= node.threshold ? node.left : node.right;
    }
    votes[static_cast<std::size_t>(
        tree[static_cast<std::size_t>(at)].leaf_label)]++;
  }
  int best = 0;
  for (int c = 1; c < num_classes_; ++c) {
    if (votes[static_cast<std::size_t>(c)] >
        votes[static_cast<std::size_t>(best)]) {
      best = c;
    }
  }
  return best;
}

}  // namespace narrative
