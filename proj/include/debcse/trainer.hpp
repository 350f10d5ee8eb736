// Copyright 2026 The debcse Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "debcse/encoder.hpp"
#include "debcse/negative_miner.hpp"
#include "debcse/positive_miner.hpp"

namespace debcse {

struct TrainConfig {
  double tau = 0.05;
  std::size_t batch_size = 64;
  std::size_t m = 2;
  double lr = 1e-3;
  std::size_t epochs = 1;
  std::uint64_t seed = 0;
  bool include_positive_in_denominator = false;
  bool stop_gradient_on_z = false;
  double bn_eps = 1e-5;
  std::size_t max_steps = 0;  // 0 = run all epochs
  std::size_t eval_every = 125;

  /// tau > 0, batch_size > m >= 1, lr >= 0.
  void validate() const;
};

/// One (anchor, positive) pair with the anchor's m mined negatives.
struct TrainingPair {
  SentenceId anchor_id = 0;
  Tokens anchor;
  Tokens positive;
  std::vector<Tokens> negatives;
};

/// A step's worth of pairs plus, for each pair, the indices of the N - m other
/// pairs whose z vectors fill the in-batch part of the denominator.
struct TrainingBatch {
  std::vector<TrainingPair> pairs;
  std::vector<std::vector<std::size_t>> in_batch;

  std::size_t size() const { return pairs.size(); }
};

/// Raw (h) and jointly batch-normalised (z) representations of a batch.
/// Row layout of the negatives: pair i, negative k -> row i * m + k.
struct BatchTensors {
  Eigen::MatrixXd h_anchor, h_pos, h_neg;
  Eigen::MatrixXd z_anchor, z_pos, z_neg;
  std::vector<std::vector<std::size_t>> in_batch;
  std::size_t m = 0;
};

/// Per column: (x - mean) / sqrt(var + eps) with the biased variance and no
/// affine terms. Rows are samples. InvalidArgument for fewer than 2 rows.
Eigen::MatrixXd batch_normalize(const Eigen::MatrixXd& h, double eps = 1e-5);

/// Debias-InfoNCE term for one query:
///   -log( exp(cos(z_a, h_p)/tau) / (sum_k exp(cos(z_a, neg_k)/tau) + sum_j exp(cos(z_a, inb_j)/tau)) )
/// The positive is left out of the denominator unless include_positive is set,
/// so the value can be negative. Rows of z_negs / z_inbatch are vectors.
double debias_infonce(const Eigen::VectorXd& z_a, const Eigen::VectorXd& h_p, const Eigen::MatrixXd& z_negs,
                      const Eigen::MatrixXd& z_inbatch, double tau, bool include_positive = false);

/// Chooses N - m partners per pair uniformly among the other pairs, keyed by
/// (seed, step).
std::vector<std::vector<std::size_t>> choose_in_batch(std::size_t n, std::size_t m, std::uint64_t seed,
                                                      std::uint64_t step);

BatchTensors forward_batch(const EncoderParams& params, const TrainingBatch& batch, const TrainConfig& cfg);

/// Mean over pairs of L(z_a, h_p) + L(z_p, h_a). The anchor-side query uses the
/// in-batch partners' anchor z vectors, the positive-side query their positive
/// z vectors, so the loss is symmetric in the two roles.
double alternative_norm_loss(const BatchTensors& batch, const TrainConfig& cfg);

struct Gradients {
  Eigen::MatrixXd embed_table;
  Eigen::MatrixXd proj;
  Eigen::VectorXd proj_bias;
};

struct LossAndGradients {
  double loss = 0.0;
  Gradients grads;
};

/// Analytic gradient of alternative_norm_loss through cosine, batch norm,
/// tanh, projection and mean pooling. NonFiniteError names the offending
/// parameter block.
LossAndGradients gradients(const EncoderParams& params, const TrainingBatch& batch, const TrainConfig& cfg);

/// Loss only, same computation path as `gradients`.
double batch_loss(const EncoderParams& params, const TrainingBatch& batch, const TrainConfig& cfg);

class AdamOptimizer {
 public:
  AdamOptimizer(const EncoderParams& like, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  void step(EncoderParams& params, const Gradients& grads);

 private:
  double lr_, beta1_, beta2_, eps_;
  std::size_t t_ = 0;
  Gradients m_, v_;
};

/// Expands mined outputs into training pairs: one pair per (anchor, mined
/// positive). Anchors lacking positives or exactly m negatives are skipped and
/// counted in `skipped`.
std::vector<TrainingPair> build_training_pairs(const Corpus& corpus, const std::vector<MinedPositives>& positives,
                                               const std::vector<MinedNegatives>& negatives, std::size_t m,
                                               std::size_t* skipped = nullptr);

/// Higher is better (e.g. dev Spearman).
using DevMetric = std::function<double(const EncoderParams&)>;

struct TrainResult {
  EncoderParams final_params;
  EncoderParams best_params;  // final_params when no dev metric is given
  std::vector<double> loss_curve;  // one entry per optimizer step
  std::vector<std::pair<std::size_t, double>> dev_scores;
  std::size_t steps = 0;
};

/// Adam training with deterministic batch order and in-batch choices given
/// cfg.seed. A trailing batch with no more than m pairs is dropped.
TrainResult train(const EncoderParams& init, const std::vector<TrainingPair>& pairs, const TrainConfig& cfg,
                  const DevMetric& dev = {});

/// Batches of `pairs` in their given order with in-batch choices keyed by
/// (seed, batch index); used to evaluate a fixed loss before and after training.
std::vector<TrainingBatch> fixed_batches(const std::vector<TrainingPair>& pairs, const TrainConfig& cfg);

}  // namespace debcse
