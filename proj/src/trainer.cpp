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

#include "debcse/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <string>

#include "debcse/error.hpp"
#include "debcse/log.hpp"
#include "debcse/rng.hpp"
#include "debcse/sampling.hpp"

namespace debcse {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

Index idx(std::size_t i) { return static_cast<Index>(i); }

// Forward state for one batch, kept for the backward pass.
struct Forward {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<const Tokens*> rows;  // anchors, positives, negatives
  MatrixXd pooled;                  // R x d, mean of embedding rows
  MatrixXd h;                       // R x d
  MatrixXd z;                       // R x d
  VectorXd col_std;                 // sqrt(var + eps) per feature

  std::size_t anchor(std::size_t i) const { return i; }
  std::size_t positive(std::size_t i) const { return n + i; }
  std::size_t negative(std::size_t i, std::size_t k) const { return 2 * n + i * m + k; }
};

Forward run_forward(const EncoderParams& params, const TrainingBatch& batch, const TrainConfig& cfg) {
  Forward f;
  f.n = batch.size();
  f.m = cfg.m;
  if (f.n <= f.m) throw InvalidArgument("batch must hold more than m pairs");
  if (batch.in_batch.size() != f.n) throw InvalidArgument("in-batch index lists must match the batch size");
  if (!params.embed_table.allFinite()) throw NonFiniteError("embed_table", "non-finite value in embed_table");
  if (!params.proj.allFinite()) throw NonFiniteError("proj", "non-finite value in proj");
  if (!params.proj_bias.allFinite()) throw NonFiniteError("proj_bias", "non-finite value in proj_bias");
  for (const auto& p : batch.pairs) f.rows.push_back(&p.anchor);
  for (const auto& p : batch.pairs) f.rows.push_back(&p.positive);
  for (const auto& p : batch.pairs) {
    if (p.negatives.size() != f.m) throw InvalidArgument("every pair needs exactly m negatives");
    for (const auto& neg : p.negatives) f.rows.push_back(&neg);
  }
  const std::size_t r = f.rows.size();
  const Index d = params.embed_table.cols();
  f.pooled = MatrixXd::Zero(idx(r), d);
  for (std::size_t row = 0; row < r; ++row) {
    const Tokens& tokens = *f.rows[row];
    if (tokens.empty()) throw InvalidArgument("cannot encode an empty sentence");
    for (const auto& t : tokens) f.pooled.row(idx(row)) += params.embed_table.row(idx(params.row_of(t)));
    f.pooled.row(idx(row)) /= static_cast<double>(tokens.size());
  }
  f.h = (f.pooled * params.proj.transpose()).rowwise() + params.proj_bias.transpose();
  if (params.use_tanh) f.h = f.h.array().tanh().matrix();

  const VectorXd mean = f.h.colwise().mean().transpose();
  const MatrixXd centered = f.h.rowwise() - mean.transpose();
  const VectorXd var = centered.array().square().colwise().mean().transpose();
  f.col_std = (var.array() + cfg.bn_eps).sqrt().matrix();
  f.z = centered.array().rowwise() / f.col_std.transpose().array();
  return f;
}

struct CosineGrad {
  double value;
  VectorXd du;
  VectorXd dv;
};

CosineGrad cosine_with_grad(const VectorXd& u, const VectorXd& v, bool want_grad) {
  const double nu = u.norm();
  const double nv = v.norm();
  if (!(nu > 0.0) || !(nv > 0.0)) throw InvalidArgument("cosine of a zero vector");
  const double c = u.dot(v) / (nu * nv);
  CosineGrad g{c, {}, {}};
  if (want_grad) {
    g.du = v / (nu * nv) - c * u / (nu * nu);
    g.dv = u / (nu * nv) - c * v / (nv * nv);
  }
  return g;
}

double plain_cosine(const VectorXd& u, const VectorXd& v) { return cosine_with_grad(u, v, false).value; }

// One Debias-InfoNCE term. Query and denominator members are z rows, the
// numerator target is an h row. Gradients are accumulated with `scale`.
double infonce_term(const Forward& f, std::size_t query, std::size_t target, const std::vector<std::size_t>& denom,
                    const TrainConfig& cfg, MatrixXd* dz, MatrixXd* dh, double scale) {
  const bool want_grad = dz != nullptr;
  const VectorXd q = f.z.row(idx(query)).transpose();
  const CosineGrad pos = cosine_with_grad(q, f.h.row(idx(target)).transpose(), want_grad);
  const double s_pos = pos.value / cfg.tau;

  std::vector<CosineGrad> neg;
  std::vector<double> logits;
  neg.reserve(denom.size());
  for (std::size_t row : denom) {
    neg.push_back(cosine_with_grad(q, f.z.row(idx(row)).transpose(), want_grad));
    logits.push_back(neg.back().value / cfg.tau);
  }
  if (cfg.include_positive_in_denominator) logits.push_back(s_pos);
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double s : logits) total += std::exp(s - top);
  const double lse = top + std::log(total);
  const double loss = lse - s_pos;
  if (!std::isfinite(loss)) throw NonFiniteError("loss", "non-finite Debias-InfoNCE term");

  if (want_grad) {
    double d_pos = -1.0;
    if (cfg.include_positive_in_denominator) d_pos += std::exp(s_pos - lse);
    d_pos *= scale / cfg.tau;
    dz->row(idx(query)) += d_pos * pos.du.transpose();
    dh->row(idx(target)) += d_pos * pos.dv.transpose();
    for (std::size_t k = 0; k < denom.size(); ++k) {
      const double w = std::exp(logits[k] - lse) * scale / cfg.tau;
      dz->row(idx(query)) += w * neg[k].du.transpose();
      dz->row(idx(denom[k])) += w * neg[k].dv.transpose();
    }
  }
  return loss;
}

double loss_and_row_grads(const Forward& f, const TrainingBatch& batch, const TrainConfig& cfg, MatrixXd* dz,
                          MatrixXd* dh) {
  const double scale = 1.0 / static_cast<double>(f.n);
  double total = 0.0;
  for (std::size_t i = 0; i < f.n; ++i) {
    std::vector<std::size_t> denom_a;
    std::vector<std::size_t> denom_p;
    for (std::size_t k = 0; k < f.m; ++k) {
      denom_a.push_back(f.negative(i, k));
      denom_p.push_back(f.negative(i, k));
    }
    for (std::size_t j : batch.in_batch[i]) {
      denom_a.push_back(f.anchor(j));
      denom_p.push_back(f.positive(j));
    }
    total += infonce_term(f, f.anchor(i), f.positive(i), denom_a, cfg, dz, dh, scale);
    total += infonce_term(f, f.positive(i), f.anchor(i), denom_p, cfg, dz, dh, scale);
  }
  return total * scale;
}

void require_finite(const MatrixXd& m, const char* name) {
  if (!m.allFinite()) throw NonFiniteError(name, std::string("non-finite gradient in ") + name);
}

}  // namespace

void TrainConfig::validate() const {
  if (!(tau > 0.0)) throw InvalidArgument("tau must be > 0");
  if (m < 1 || batch_size <= m) throw InvalidArgument("need batch_size > m >= 1");
  if (!(lr >= 0.0)) throw InvalidArgument("lr must be >= 0");
  if (!(bn_eps >= 0.0)) throw InvalidArgument("bn_eps must be >= 0");
}

Eigen::MatrixXd batch_normalize(const Eigen::MatrixXd& h, double eps) {
  if (h.rows() < 2) throw InvalidArgument("batch_normalize needs at least 2 rows");
  const VectorXd mean = h.colwise().mean().transpose();
  const MatrixXd centered = h.rowwise() - mean.transpose();
  const VectorXd var = centered.array().square().colwise().mean().transpose();
  const VectorXd std = (var.array() + eps).sqrt().matrix();
  MatrixXd out = centered;
  for (Index c = 0; c < h.cols(); ++c) {
    // A constant column has a zero numerator; keep it at zero even when eps == 0.
    if (std(c) > 0.0) {
      out.col(c) /= std(c);
    } else {
      out.col(c).setZero();
    }
  }
  return out;
}

double debias_infonce(const Eigen::VectorXd& z_a, const Eigen::VectorXd& h_p, const Eigen::MatrixXd& z_negs,
                      const Eigen::MatrixXd& z_inbatch, double tau, bool include_positive) {
  if (!(tau > 0.0)) throw InvalidArgument("tau must be > 0");
  const double s_pos = plain_cosine(z_a, h_p) / tau;
  std::vector<double> logits;
  for (Index k = 0; k < z_negs.rows(); ++k) logits.push_back(plain_cosine(z_a, z_negs.row(k).transpose()) / tau);
  for (Index j = 0; j < z_inbatch.rows(); ++j) logits.push_back(plain_cosine(z_a, z_inbatch.row(j).transpose()) / tau);
  if (include_positive) logits.push_back(s_pos);
  if (logits.empty()) throw InvalidArgument("debias_infonce needs at least one denominator term");
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double s : logits) total += std::exp(s - top);
  const double loss = top + std::log(total) - s_pos;
  if (!std::isfinite(loss)) throw NonFiniteError("loss", "non-finite Debias-InfoNCE value");
  return loss;
}

std::vector<std::vector<std::size_t>> choose_in_batch(std::size_t n, std::size_t m, std::uint64_t seed,
                                                      std::uint64_t step) {
  if (n <= m) throw InvalidArgument("batch must hold more than m pairs");
  KeyedRng rng(seed, step, Stream::kInBatch);
  std::vector<std::vector<std::size_t>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k : uniform_subset(n - 1, n - m, rng)) out[i].push_back(k < i ? k : k + 1);
  }
  return out;
}

BatchTensors forward_batch(const EncoderParams& params, const TrainingBatch& batch, const TrainConfig& cfg) {
  const Forward f = run_forward(params, batch, cfg);
  const Index n = idx(f.n);
  const Index nm = idx(f.n * f.m);
  BatchTensors t;
  t.h_anchor = f.h.topRows(n);
  t.h_pos = f.h.middleRows(n, n);
  t.h_neg = f.h.bottomRows(nm);
  t.z_anchor = f.z.topRows(n);
  t.z_pos = f.z.middleRows(n, n);
  t.z_neg = f.z.bottomRows(nm);
  t.in_batch = batch.in_batch;
  t.m = f.m;
  return t;
}

double alternative_norm_loss(const BatchTensors& batch, const TrainConfig& cfg) {
  const auto n = static_cast<std::size_t>(batch.h_anchor.rows());
  const std::size_t m = batch.m;
  if (n == 0 || batch.in_batch.size() != n) throw InvalidArgument("malformed batch tensors");
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const MatrixXd negs = batch.z_neg.middleRows(idx(i * m), idx(m));
    MatrixXd inb_a(idx(batch.in_batch[i].size()), batch.z_anchor.cols());
    MatrixXd inb_p(inb_a.rows(), inb_a.cols());
    for (std::size_t k = 0; k < batch.in_batch[i].size(); ++k) {
      inb_a.row(idx(k)) = batch.z_anchor.row(idx(batch.in_batch[i][k]));
      inb_p.row(idx(k)) = batch.z_pos.row(idx(batch.in_batch[i][k]));
    }
    total += debias_infonce(batch.z_anchor.row(idx(i)).transpose(), batch.h_pos.row(idx(i)).transpose(), negs, inb_a,
                            cfg.tau, cfg.include_positive_in_denominator);
    total += debias_infonce(batch.z_pos.row(idx(i)).transpose(), batch.h_anchor.row(idx(i)).transpose(), negs, inb_p,
                            cfg.tau, cfg.include_positive_in_denominator);
  }
  return total / static_cast<double>(n);
}

double batch_loss(const EncoderParams& params, const TrainingBatch& batch, const TrainConfig& cfg) {
  const Forward f = run_forward(params, batch, cfg);
  return loss_and_row_grads(f, batch, cfg, nullptr, nullptr);
}

LossAndGradients gradients(const EncoderParams& params, const TrainingBatch& batch, const TrainConfig& cfg) {
  const Forward f = run_forward(params, batch, cfg);
  const Index r = f.h.rows();
  const Index d = f.h.cols();
  MatrixXd dz = MatrixXd::Zero(r, d);
  MatrixXd dh = MatrixXd::Zero(r, d);
  LossAndGradients out;
  out.loss = loss_and_row_grads(f, batch, cfg, &dz, &dh);

  if (!cfg.stop_gradient_on_z) {
    // Batch-norm backward without affine terms:
    // dx = (g - mean(g) - z * mean(g .* z)) / std, per column.
    const Eigen::RowVectorXd mean_g = dz.colwise().mean();
    const Eigen::RowVectorXd mean_gz = (dz.array() * f.z.array()).colwise().mean();
    MatrixXd dx = dz.rowwise() - mean_g;
    dx -= (f.z.array().rowwise() * mean_gz.array()).matrix();
    dx = dx.array().rowwise() / f.col_std.transpose().array();
    dh += dx;
  }

  MatrixXd da = dh;
  if (params.use_tanh) da = (dh.array() * (1.0 - f.h.array().square())).matrix();

  out.grads.proj = da.transpose() * f.pooled;
  out.grads.proj_bias = da.colwise().sum().transpose();
  const MatrixXd dpooled = da * params.proj;
  out.grads.embed_table = MatrixXd::Zero(params.embed_table.rows(), params.embed_table.cols());
  for (Index row = 0; row < r; ++row) {
    const Tokens& tokens = *f.rows[static_cast<std::size_t>(row)];
    const double share = 1.0 / static_cast<double>(tokens.size());
    for (const auto& t : tokens) out.grads.embed_table.row(idx(params.row_of(t))) += share * dpooled.row(row);
  }
  require_finite(out.grads.embed_table, "embed_table");
  require_finite(out.grads.proj, "proj");
  require_finite(out.grads.proj_bias, "proj_bias");
  return out;
}

AdamOptimizer::AdamOptimizer(const EncoderParams& like, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  m_.embed_table = MatrixXd::Zero(like.embed_table.rows(), like.embed_table.cols());
  m_.proj = MatrixXd::Zero(like.proj.rows(), like.proj.cols());
  m_.proj_bias = VectorXd::Zero(like.proj_bias.size());
  v_ = m_;
}

void AdamOptimizer::step(EncoderParams& params, const Gradients& grads) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  auto update = [&](auto& param, const auto& grad, auto& m, auto& v, const char* name) {
    m = beta1_ * m + (1.0 - beta1_) * grad;
    v = beta2_ * v + (1.0 - beta2_) * grad.cwiseProduct(grad);
    param.array() -= lr_ * (m.array() / c1) / ((v.array() / c2).sqrt() + eps_);
    if (!param.allFinite()) throw NonFiniteError(name, std::string("non-finite parameter after update: ") + name);
  };
  update(params.embed_table, grads.embed_table, m_.embed_table, v_.embed_table, "embed_table");
  update(params.proj, grads.proj, m_.proj, v_.proj, "proj");
  update(params.proj_bias, grads.proj_bias, m_.proj_bias, v_.proj_bias, "proj_bias");
}

std::vector<TrainingPair> build_training_pairs(const Corpus& corpus, const std::vector<MinedPositives>& positives,
                                               const std::vector<MinedNegatives>& negatives, std::size_t m,
                                               std::size_t* skipped) {
  std::map<SentenceId, const MinedNegatives*> neg_by_anchor;
  for (const auto& n : negatives) neg_by_anchor[n.anchor_id] = &n;
  std::size_t missing = 0;
  std::vector<TrainingPair> pairs;
  for (const auto& p : positives) {
    const auto it = neg_by_anchor.find(p.anchor_id);
    if (p.anchor_id >= corpus.size() || it == neg_by_anchor.end() || it->second->negative_ids.size() != m ||
        p.positives.empty()) {
      ++missing;
      continue;
    }
    std::vector<Tokens> negs;
    for (SentenceId id : it->second->negative_ids) {
      if (id >= corpus.size()) throw DataError("negative id " + std::to_string(id) + " outside corpus");
      negs.push_back(corpus[id].tokens);
    }
    for (const auto& text : p.positives) {
      Tokens pos = tokenize(text);
      if (pos.empty()) continue;
      pairs.push_back(TrainingPair{p.anchor_id, corpus[p.anchor_id].tokens, std::move(pos), negs});
    }
  }
  std::set<SentenceId> with_pos;
  for (const auto& p : positives) with_pos.insert(p.anchor_id);
  for (const auto& n : negatives) {
    if (!with_pos.count(n.anchor_id)) ++missing;
  }
  if (missing > 0) logger().info("{} anchors lack complete mined pairs and were skipped", missing);
  if (skipped != nullptr) *skipped = missing;
  return pairs;
}

std::vector<TrainingBatch> fixed_batches(const std::vector<TrainingPair>& pairs, const TrainConfig& cfg) {
  cfg.validate();
  std::vector<TrainingBatch> out;
  for (std::size_t b = 0; b < pairs.size(); b += cfg.batch_size) {
    const std::size_t end = std::min(pairs.size(), b + cfg.batch_size);
    if (end - b <= cfg.m) break;
    TrainingBatch batch;
    batch.pairs.assign(pairs.begin() + idx(b), pairs.begin() + idx(end));
    batch.in_batch = choose_in_batch(batch.size(), cfg.m, cfg.seed, out.size());
    out.push_back(std::move(batch));
  }
  return out;
}

TrainResult train(const EncoderParams& init, const std::vector<TrainingPair>& pairs, const TrainConfig& cfg,
                  const DevMetric& dev) {
  cfg.validate();
  if (pairs.size() <= cfg.m) throw DataError("not enough training pairs for one batch");
  TrainResult result;
  result.final_params = init;
  result.best_params = init;
  EncoderParams& params = result.final_params;
  AdamOptimizer adam(params, cfg.lr);
  double best = -std::numeric_limits<double>::infinity();

  auto evaluate = [&](std::size_t step) {
    if (!dev) return;
    const double score = dev(params);
    result.dev_scores.emplace_back(step, score);
    if (score > best) {
      best = score;
      result.best_params = params;
    }
  };

  std::size_t step = 0;
  bool done = false;
  for (std::size_t epoch = 0; epoch < cfg.epochs && !done; ++epoch) {
    std::vector<std::size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    KeyedRng rng(cfg.seed, epoch, Stream::kBatchOrder);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), b + cfg.batch_size);
      if (end - b <= cfg.m) break;
      TrainingBatch batch;
      for (std::size_t k = b; k < end; ++k) batch.pairs.push_back(pairs[order[k]]);
      batch.in_batch = choose_in_batch(batch.size(), cfg.m, cfg.seed, step);
      const LossAndGradients lg = gradients(params, batch, cfg);
      adam.step(params, lg.grads);
      result.loss_curve.push_back(lg.loss);
      ++step;
      if (cfg.eval_every > 0 && step % cfg.eval_every == 0) evaluate(step);
      if (cfg.max_steps > 0 && step >= cfg.max_steps) {
        done = true;
        break;
      }
    }
  }
  result.steps = step;
  if (dev && (result.dev_scores.empty() || result.dev_scores.back().first != step)) evaluate(step);
  if (!dev) result.best_params = params;
  return result;
}

}  // namespace debcse
