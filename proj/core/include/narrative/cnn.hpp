#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "narrative/features.hpp"
#include "narrative/rng.hpp"
#include "narrative/types.hpp"

namespace narrative {

struct CnnConfig {
  std::vector<int> filter_widths = {2, 3, 4};
  int filters_per_width = 30;
  int hidden_dim = 45;
  int num_classes = 3;
  double dropout = 0.3;
  int embedding_dim = 300;
  int pos_dim = 45;
  bool use_pos = true;

  int input_dim() const { return embedding_dim + pos_dim; }
  int pooled_dim() const {
    return filters_per_width * static_cast<int>(filter_widths.size());
  }
  int max_filter_width() const {
    return *std::max_element(filter_widths.begin(), filter_widths.end());
  }
};

struct TrainConfig {
  double learning_rate = 5e-5;
  int batch_size = 64;
  int max_epochs = 60;
  int patience = 5;  // epochs without validation improvement before stopping
  bool restore_best = true;
  std::uint64_t seed = 0;
};

struct TrainLog {
  std::vector<double> train_loss;  // per epoch, mean cross-entropy
  std::vector<double> val_error;   // per epoch, fraction misclassified
  int best_epoch = -1;             // 0-based epoch of the restored weights
  int epochs_run = 0;
};

/// Max-over-time CNN over per-token embedding+POS rows: one convolution bank
/// per filter width, ReLU, 1-max pooling, then two affine layers with dropout
/// and a softmax. The embedding block is a trainable parameter (non-static).
template <typename Scalar>
class CnnModelT {
 public:
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  CnnModelT(CnnConfig config, Mat embedding, std::uint64_t init_seed)
      : config_(std::move(config)), embedding_(std::move(embedding)) {
    if (embedding_.cols() != config_.embedding_dim) {
      throw std::invalid_argument("embedding width does not match config");
    }
    const int d = config_.input_dim();
    SplitMix64 rng(init_seed);
    auto glorot = [&](Eigen::Index rows, Eigen::Index cols) {
      Mat m(rows, cols);
      const double bound =
          std::sqrt(6.0 / static_cast<double>(rows + cols));
      for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
          m(r, c) = static_cast<Scalar>(rng.uniform_real(-bound, bound));
        }
      }
      return m;
    };
    for (int w : config_.filter_widths) {
      conv_w_.push_back(glorot(config_.filters_per_width, w * d));
      conv_b_.push_back(Mat::Zero(config_.filters_per_width, 1));
    }
    w1_ = glorot(config_.hidden_dim, config_.pooled_dim());
    b1_ = Mat::Zero(config_.hidden_dim, 1);
    w2_ = glorot(config_.num_classes, config_.hidden_dim);
    b2_ = Mat::Zero(config_.num_classes, 1);
  }

  const CnnConfig& config() const { return config_; }
  const Mat& embedding() const { return embedding_; }

  /// Embedding+one-hot input rows for one clause, right-padded with zeros.
  Mat input_matrix(const EncodedClause& encoded, int pad_to) const {
    const int t = static_cast<int>(encoded.word_ids.size());
    const int rows = std::max(t, pad_to);
    Mat input = Mat::Zero(rows, config_.input_dim());
    for (int i = 0; i < t; ++i) {
      const int word = encoded.word_ids[static_cast<std::size_t>(i)];
      if (word < 0 || word >= embedding_.rows()) {
        throw std::invalid_argument("word id out of embedding range");
      }
      input.row(i).head(config_.embedding_dim) = embedding_.row(word);
      const int pos = encoded.pos_ids[static_cast<std::size_t>(i)];
      if (config_.use_pos && pos >= 0 && pos < config_.pos_dim) {
        input(i, config_.embedding_dim + pos) = Scalar(1);
      }
    }
    return input;
  }

  /// Inference forward pass (dropout off). Output sums to 1 within 1e-6.
  Vec forward(const Mat& clause_matrix) const {
    Cache cache;
    return forward_impl(clause_matrix, Scalar(0), nullptr, cache);
  }

  Vec forward_encoded(const EncodedClause& encoded) const {
    return forward(input_matrix(encoded, config_.max_filter_width()));
  }

  /// Post-pooling feature vector (inference mode); one ReLU'd max per filter.
  Vec pooled_features(const Mat& clause_matrix) const {
    Cache cache;
    forward_impl(clause_matrix, Scalar(0), nullptr, cache);
    return cache.pooled;
  }

  /// Argmax class; exact ties resolve toward the lower index.
  int predict_class(const Mat& clause_matrix) const {
    return argmax(forward(clause_matrix));
  }

  int predict_encoded(const EncodedClause& encoded) const {
    return argmax(forward_encoded(encoded));
  }

  static int argmax(const Vec& v) {
    int best = 0;
    for (int i = 1; i < v.size(); ++i) {
      if (v(i) > v(best)) best = i;
    }
    return best;
  }

  struct ParamRef {
    std::string name;
    Mat* value;
  };

  std::vector<ParamRef> params() {
    std::vector<ParamRef> refs;
    refs.push_back({"embedding", &embedding_});
    for (std::size_t i = 0; i < conv_w_.size(); ++i) {
      const std::string w = std::to_string(config_.filter_widths[i]);
      refs.push_back({"conv_w" + w, &conv_w_[i]});
      refs.push_back({"conv_b" + w, &conv_b_[i]});
    }
    refs.push_back({"w1", &w1_});
    refs.push_back({"b1", &b1_});
    refs.push_back({"w2", &w2_});
    refs.push_back({"b2", &b2_});
    return refs;
  }

  std::vector<Mat> snapshot() const {
    std::vector<Mat> copy;
    auto refs = const_cast<CnnModelT*>(this)->params();
    copy.reserve(refs.size());
    for (const ParamRef& p : refs) copy.push_back(*p.value);
    return copy;
  }

  void restore(const std::vector<Mat>& snapshot_params) {
    auto refs = params();
    if (snapshot_params.size() != refs.size()) {
      throw std::invalid_argument("snapshot shape mismatch");
    }
    for (std::size_t i = 0; i < refs.size(); ++i) {
      *refs[i].value = snapshot_params[i];
    }
  }

  /// Mean cross-entropy over the batch plus parameter gradients (aligned with
  /// params()). Dropout masks are drawn from `rng` when dropout_p > 0; the
  /// gradient check runs this with dropout_p = 0.
  double loss_and_gradients(const std::vector<EncodedClause>& batch,
                            Scalar dropout_p, SplitMix64* rng,
                            std::vector<Mat>& grads) {
    auto refs = params();
    grads.clear();
    for (const ParamRef& p : refs) {
      grads.push_back(Mat::Zero(p.value->rows(), p.value->cols()));
    }
    if (batch.empty()) throw std::invalid_argument("empty batch");

    int pad_to = config_.max_filter_width();
    for (const EncodedClause& e : batch) {
      pad_to = std::max(pad_to, static_cast<int>(e.word_ids.size()));
    }

    const double inv_n = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;
    for (const EncodedClause& example : batch) {
      if (example.label < 0 || example.label >= config_.num_classes) {
        throw std::invalid_argument("clause " + example.clause_id +
                                    " lacks a class label");
      }
      Cache cache;
      Mat input = input_matrix(example, pad_to);
      Vec probs = forward_impl(input, dropout_p, rng, cache);
      const Scalar p_y = probs(example.label);
      loss -= inv_n * std::log(std::max(static_cast<double>(p_y), 1e-300));
      backward_example(example, cache, probs, example.label,
                       static_cast<Scalar>(inv_n), grads);
    }
    return loss;
  }

 private:
  struct Cache {
    Mat input;                          // T' x D
    std::vector<Mat> windows;           // per width: positions x (w*D)
    std::vector<Mat> responses;         // per width: positions x F, pre-ReLU
    std::vector<std::vector<int>> best; // per width: argmax position per filter
    Vec pooled, mask1, h_drop, z1, a1, mask2, a1_drop, z2;
  };

  Vec forward_impl(const Mat& input, Scalar dropout_p, SplitMix64* rng,
                   Cache& cache) const {
    if (input.cols() != config_.input_dim()) {
      throw std::invalid_argument(
          "input matrix width " + std::to_string(input.cols()) +
          " does not match model input dim " +
          std::to_string(config_.input_dim()));
    }
    if (input.rows() < config_.max_filter_width()) {
      throw std::invalid_argument("input has fewer rows than the widest filter");
    }
    const int d = config_.input_dim();
    const int f = config_.filters_per_width;

    cache.input = input;
    cache.pooled = Vec(config_.pooled_dim());
    cache.windows.clear();
    cache.responses.clear();
    cache.best.clear();
    for (std::size_t b = 0; b < config_.filter_widths.size(); ++b) {
      const int w = config_.filter_widths[b];
      const int positions = static_cast<int>(input.rows()) - w + 1;
      Mat windows(positions, w * d);
      for (int p = 0; p < positions; ++p) {
        for (int r = 0; r < w; ++r) {
          windows.row(p).segment(r * d, d) = input.row(p + r);
        }
      }
      // convolve over time, ReLU, max over positions (order commutes).
      // Responses are computed per position so a window's value never depends
      // on how many other windows exist; zero-padding can then only add
      // candidates to the max, never perturb existing ones.
      Mat responses(positions, f);
      for (int p = 0; p < positions; ++p) {
        responses.row(p) =
            (conv_w_[b] * windows.row(p).transpose()).transpose() +
            conv_b_[b].col(0).transpose();
      }
      std::vector<int> best(static_cast<std::size_t>(f), 0);
      for (int k = 0; k < f; ++k) {
        int arg = 0;
        Scalar max_val = responses(0, k);
        for (int p = 1; p < positions; ++p) {
          if (responses(p, k) > max_val) {
            max_val = responses(p, k);
            arg = p;
          }
        }
        best[static_cast<std::size_t>(k)] = arg;
        cache.pooled(static_cast<int>(b) * f + k) =
            max_val > Scalar(0) ? max_val : Scalar(0);
      }
      cache.windows.push_back(std::move(windows));
      cache.responses.push_back(std::move(responses));
      cache.best.push_back(std::move(best));
    }

    cache.mask1 = dropout_mask(cache.pooled.size(), dropout_p, rng);
    cache.h_drop = cache.pooled.cwiseProduct(cache.mask1);
    cache.z1 = w1_ * cache.h_drop + b1_.col(0);
    cache.a1 = cache.z1.cwiseMax(Scalar(0));
    cache.mask2 = dropout_mask(cache.a1.size(), dropout_p, rng);
    cache.a1_drop = cache.a1.cwiseProduct(cache.mask2);
    cache.z2 = w2_ * cache.a1_drop + b2_.col(0);
    return softmax(cache.z2);
  }

  // grads layout follows params(): embedding, then (conv_w, conv_b) per
  // width, then w1, b1, w2, b2.
  void backward_example(const EncodedClause& example, const Cache& cache,
                        const Vec& probs, int label, Scalar weight,
                        std::vector<Mat>& grads) const {
    const int d = config_.input_dim();
    const int f = config_.filters_per_width;
    const std::size_t banks = config_.filter_widths.size();
    Mat& g_embedding = grads[0];
    Mat& g_w1 = grads[1 + 2 * banks];
    Mat& g_b1 = grads[2 + 2 * banks];
    Mat& g_w2 = grads[3 + 2 * banks];
    Mat& g_b2 = grads[4 + 2 * banks];

    Vec dz2 = probs * weight;
    dz2(label) -= weight;

    g_w2 += dz2 * cache.a1_drop.transpose();
    g_b2.col(0) += dz2;

    Vec da1 = (w2_.transpose() * dz2).cwiseProduct(cache.mask2);
    Vec dz1 = da1;
    for (int i = 0; i < dz1.size(); ++i) {
      if (cache.z1(i) <= Scalar(0)) dz1(i) = Scalar(0);
    }
    g_w1 += dz1 * cache.h_drop.transpose();
    g_b1.col(0) += dz1;

    Vec dpooled = (w1_.transpose() * dz1).cwiseProduct(cache.mask1);

    Mat dinput = Mat::Zero(cache.input.rows(), cache.input.cols());
    for (std::size_t b = 0; b < banks; ++b) {
      const int w = config_.filter_widths[b];
      Mat& g_conv_w = grads[1 + 2 * b];
      Mat& g_conv_b = grads[2 + 2 * b];
      for (int k = 0; k < f; ++k) {
        const int unit = static_cast<int>(b) * f + k;
        const int p = cache.best[b][static_cast<std::size_t>(k)];
        // relu'(max response): zero when the pooled value came out zero
        if (cache.responses[b](p, k) <= Scalar(0)) continue;
        const Scalar dresp = dpooled(unit);
        if (dresp == Scalar(0)) continue;
        g_conv_w.row(k) += dresp * cache.windows[b].row(p);
        g_conv_b(k, 0) += dresp;
        for (int r = 0; r < w; ++r) {
          dinput.row(p + r) +=
              dresp * conv_w_[b].row(k).segment(r * d, d);
        }
      }
    }

    // word-vector block flows into the (non-static) embedding; the one-hot
    // POS block is a constant input
    const int t = static_cast<int>(example.word_ids.size());
    for (int i = 0; i < t && i < dinput.rows(); ++i) {
      g_embedding.row(example.word_ids[static_cast<std::size_t>(i)]) +=
          dinput.row(i).head(config_.embedding_dim);
    }
  }

  Vec dropout_mask(Eigen::Index n, Scalar p, SplitMix64* rng) const {
    if (p <= Scalar(0) || rng == nullptr) return Vec::Ones(n);
    Vec mask(n);
    const Scalar scale = Scalar(1) / (Scalar(1) - p);
    for (Eigen::Index i = 0; i < n; ++i) {
      mask(i) = rng->uniform_real() < static_cast<double>(p) ? Scalar(0) : scale;
    }
    return mask;
  }

  static Vec softmax(const Vec& logits) {
    Vec exps = (logits.array() - logits.maxCoeff()).exp().matrix();
    return exps / exps.sum();
  }

  CnnConfig config_;
  Mat embedding_;
  std::vector<Mat> conv_w_;
  std::vector<Mat> conv_b_;
  Mat w1_, b1_, w2_, b2_;
};

using CnnModel = CnnModelT<float>;

/// Argmax predictions mapped through the label-order contract.
template <typename Scalar>
std::vector<ClauseType> predict(const CnnModelT<Scalar>& model,
                                const std::vector<EncodedClause>& clauses) {
  std::vector<ClauseType> out;
  out.reserve(clauses.size());
  for (const EncodedClause& clause : clauses) {
    out.push_back(class_label(model.predict_encoded(clause)));
  }
  return out;
}

template <typename Scalar>
double validation_error(const CnnModelT<Scalar>& model,
                        const std::vector<EncodedClause>& examples) {
  if (examples.empty()) throw std::invalid_argument("empty validation set");
  std::size_t wrong = 0;
  for (const EncodedClause& example : examples) {
    if (model.predict_encoded(example) != example.label) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(examples.size());
}

/// Adam + early stopping on validation error. Deterministic given the seed:
/// shuffles, dropout, and the (sequential) reduction order all derive from it.
template <typename Scalar>
TrainLog train(CnnModelT<Scalar>& model,
               const std::vector<EncodedClause>& train_set,
               const std::vector<EncodedClause>& val_set,
               const TrainConfig& config) {
  if (train_set.empty()) throw std::invalid_argument("empty training set");
  if (val_set.empty()) throw std::invalid_argument("empty validation set");
  if (config.learning_rate <= 0) {
    throw std::invalid_argument("learning rate must be positive");
  }
  if (config.patience < 1) throw std::invalid_argument("patience must be >= 1");

  using Mat = typename CnnModelT<Scalar>::Mat;
  auto refs = model.params();
  std::vector<Mat> m, v;
  for (const auto& p : refs) {
    m.push_back(Mat::Zero(p.value->rows(), p.value->cols()));
    v.push_back(Mat::Zero(p.value->rows(), p.value->cols()));
  }
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long step = 0;

  SplitMix64 shuffle_rng(splitmix64(config.seed));
  SplitMix64 dropout_rng(splitmix64(config.seed ^ 0x9E3779B97F4A7C15ull));

  TrainLog log;
  double best_error = std::numeric_limits<double>::infinity();
  std::vector<Mat> best_weights;
  int since_best = 0;

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<Mat> grads;
  std::vector<EncodedClause> batch;

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      batch.clear();
      const std::size_t end = std::min(
          order.size(), start + static_cast<std::size_t>(config.batch_size));
      for (std::size_t i = start; i < end; ++i) {
        batch.push_back(train_set[order[i]]);
      }
      double loss = model.loss_and_gradients(
          batch, static_cast<Scalar>(model.config().dropout), &dropout_rng,
          grads);
      epoch_loss += loss * static_cast<double>(batch.size());
      seen += batch.size();

      ++step;
      const double correction =
          std::sqrt(1.0 - std::pow(beta2, static_cast<double>(step))) /
          (1.0 - std::pow(beta1, static_cast<double>(step)));
      const Scalar alpha = static_cast<Scalar>(config.learning_rate * correction);
      const Scalar b1 = static_cast<Scalar>(beta1);
      const Scalar b2 = static_cast<Scalar>(beta2);
      const Scalar eps_s = static_cast<Scalar>(eps);
      for (std::size_t i = 0; i < refs.size(); ++i) {
        m[i] = b1 * m[i] + (Scalar(1) - b1) * grads[i];
        v[i] = (b2 * v[i].array() +
                (Scalar(1) - b2) * grads[i].array().square())
                   .matrix();
        refs[i].value->array() -=
            alpha * m[i].array() / (v[i].array().sqrt() + eps_s);
      }
    }
    log.train_loss.push_back(epoch_loss / static_cast<double>(seen));
    const double err = validation_error(model, val_set);
    log.val_error.push_back(err);
    log.epochs_run = epoch + 1;

    if (err < best_error) {
      best_error = err;
      log.best_epoch = epoch;
      since_best = 0;
      if (config.restore_best) best_weights = model.snapshot();
    } else {
      ++since_best;
      if (since_best >= config.patience) break;
    }
  }
  if (config.restore_best && !best_weights.empty()) {
    model.restore(best_weights);
  }
  return log;
}

}  // namespace narrative
