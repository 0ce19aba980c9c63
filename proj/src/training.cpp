/*
 * Copyright (c) 2026 The artemis-head Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "artemis/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "artemis/error.hpp"
#include "json.hpp"

namespace artemis {

using nlohmann::json;

namespace {

std::vector<Vec64*> blocks_of(HeadParams& p) {
  std::vector<Vec64*> out;
  for_each_block(p, [&](Vec64& v) { out.push_back(&v); });
  return out;
}

std::vector<const Vec64*> blocks_of(const HeadParams& p) {
  std::vector<const Vec64*> out;
  for_each_block(p, [&](const Vec64& v) { out.push_back(&v); });
  return out;
}

// Block indices follow for_each_block: 0-3 attn_is, 4-7 attn_em, 8-9 proj.
bool block_enabled(std::size_t index, const BlockMask& mask) {
  if (index < 4) return mask.attn_is;
  if (index < 8) return mask.attn_em;
  return mask.proj;
}

}  // namespace

void validate_train_config(const TrainConfig& c) {
  auto fail = [](const std::string& why) { throw Error(ErrorCode::kConfig, why); };
  if (c.batch_size < 2) fail("batch_size must be >= 2 (the loss needs in-batch negatives)");
  if (!(c.lr0 > 0.0)) fail("lr0 must be > 0");
  if (!(c.lr_decay > 0.0)) fail("lr_decay must be > 0");
  if (c.decay_every == 0) fail("decay_every must be >= 1");
  if (!(c.weight_decay >= 0.0)) fail("weight_decay must be >= 0");
  if (!(c.beta1 >= 0.0 && c.beta1 < 1.0) || !(c.beta2 >= 0.0 && c.beta2 < 1.0)) {
    fail("betas must lie in [0, 1)");
  }
  if (!(c.eps > 0.0)) fail("eps must be > 0");
}

LossResult bbc_loss(std::span<const BatchItem> batch, const HeadParams& params, Flavor flavor) {
  if (batch.size() < 2) {
    throw Error(ErrorCode::kShapeMismatch, "bbc_loss needs at least two triplets per batch");
  }
  const HeadDims& d = params.dims;
  for (const BatchItem& item : batch) {
    if (item.r.size() != d.image || item.t.size() != d.image || item.m.size() != d.text) {
      throw Error(ErrorCode::kShapeMismatch, "batch item does not match head dims");
    }
  }
  Tape tape;
  const HeadVars vars = bind_params(tape, params);
  const std::size_t b = batch.size();
  std::vector<TapeQuery> queries;
  std::vector<Tape::Var> targets;
  queries.reserve(b);
  targets.reserve(b);
  for (const BatchItem& item : batch) {
    const Tape::Var r = tape.constant(item.r);
    const Tape::Var m = tape.constant(item.m);
    queries.push_back(tape_query(tape, vars, r, m, flavor));
    targets.push_back(tape.constant(item.t));
  }
  std::vector<Tape::Var> row(b);
  std::vector<Tape::Var> row_losses;
  row_losses.reserve(b);
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < b; ++j) row[j] = tape_score(tape, queries[i], targets[j], flavor);
    const Tape::Var logits = tape.scale(tape.stack(row), vars.gamma);
    row_losses.push_back(tape.cross_entropy(logits, i));
  }
  const Tape::Var loss = tape.mean(row_losses);
  tape.backward(loss);
  LossResult result;
  result.loss = tape.scalar(loss);
  result.grads = collect_grads(tape, vars, d);
  return result;
}

double bbc_loss_from_scores(const Mat64& scores, double gamma) {
  if (scores.rows != scores.cols || scores.rows < 2) {
    throw Error(ErrorCode::kShapeMismatch, "score matrix must be square with B >= 2");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < scores.rows; ++i) {
    double top = gamma * scores(i, 0);
    for (std::size_t j = 1; j < scores.cols; ++j) top = std::max(top, gamma * scores(i, j));
    double sum = 0.0;
    for (std::size_t j = 0; j < scores.cols; ++j) sum += std::exp(gamma * scores(i, j) - top);
    total += top + std::log(sum) - gamma * scores(i, i);
  }
  return total / static_cast<double>(scores.rows);
}

BlockMask reachable_blocks(Flavor flavor) {
  switch (flavor) {
    case Flavor::kImageOnly:
    case Flavor::kTextOnly:
    case Flavor::kLateFusion: return {false, false, false, true};
    case Flavor::kIsOnly: return {true, false, false, true};
    case Flavor::kEmOnly: return {false, true, true, true};
    case Flavor::kArtemis: return {true, true, true, true};
  }
  return {};
}

AdamWState make_adamw_state(const HeadDims& dims) {
  AdamWState s;
  s.first = zero_params(dims);
  s.second = zero_params(dims);
  s.first.gamma = 0.0;
  s.second.gamma = 0.0;
  return s;
}

void adamw_step(HeadParams& params, const HeadParams& grads, AdamWState& state, double lr,
                const TrainConfig& config, const BlockMask& mask) {
  auto p = blocks_of(params);
  auto g = blocks_of(grads);
  auto m = blocks_of(state.first);
  auto v = blocks_of(state.second);
  if (g.size() != p.size()) throw Error(ErrorCode::kShapeMismatch, "gradient layout");
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (!block_enabled(k, mask)) continue;
    if (g[k]->size() != p[k]->size()) {
      throw Error(ErrorCode::kShapeMismatch, "gradient block size differs from parameters");
    }
    if (!all_finite(*g[k])) throw Error(ErrorCode::kNonFiniteGradient, "non-finite gradient");
  }
  if (mask.gamma && !std::isfinite(grads.gamma)) {
    throw Error(ErrorCode::kNonFiniteGradient, "non-finite gamma gradient");
  }

  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  const double decay = 1.0 - lr * config.weight_decay;
  auto update = [&](double& w, double grad, double& m1, double& m2) {
    m1 = config.beta1 * m1 + (1.0 - config.beta1) * grad;
    m2 = config.beta2 * m2 + (1.0 - config.beta2) * grad * grad;
    w -= lr * (m1 / c1) / (std::sqrt(m2 / c2) + config.eps);
  };
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (!block_enabled(k, mask)) continue;
    Vec64& w = *p[k];
    const Vec64& gk = *g[k];
    Vec64& mk = *m[k];
    Vec64& vk = *v[k];
    for (std::size_t i = 0; i < w.size(); ++i) {
      w[i] *= decay;
      update(w[i], gk[i], mk[i], vk[i]);
    }
  }
  if (mask.gamma) {
    update(params.gamma, grads.gamma, state.first.gamma, state.second.gamma);
    params.gamma = std::max(params.gamma, kMinGamma);
  }
}

double lr_at_epoch(std::size_t epoch, const TrainConfig& config) {
  const auto decays = static_cast<double>(epoch / config.decay_every);
  return config.lr0 * std::pow(config.lr_decay, decays);
}

std::string epoch_log_jsonl(std::span<const EpochLog> logs) {
  std::string out;
  for (const EpochLog& log : logs) {
    json line;
    line["epoch"] = log.epoch;
    line["loss"] = log.loss;
    line["lr"] = log.lr;
    json metrics = json::object();
    for (const auto& [split, row] : log.metrics) metrics[split] = row;
    line["metrics"] = metrics;
    line["seconds"] = log.seconds;
    out += line.dump();
    out += '\n';
  }
  return out;
}

HeadDims dims_for(const TrainData& data, const TrainConfig& config) {
  HeadDims dims;
  dims.image = data.images.dim();
  dims.text = data.modifiers.dim();
  dims.hidden = config.hidden == 0 ? dims.image : config.hidden;
  return dims;
}

MetricRow evaluate_split(const TrainData& data, const Gallery& gallery, const HeadParams& params,
                         Flavor flavor, Split split, bool exclude_ref, std::size_t threads) {
  const std::vector<QuerySpec> queries = build_queries(data.triplets, split, exclude_ref);
  if (queries.empty()) {
    throw Error(ErrorCode::kEmptySplit, "split '" + std::string(split_name(split)) +
                                            "' has no queries");
  }
  const ScoreMatrix scores =
      score_matrix(queries, data.images, data.modifiers, gallery, params, flavor, threads);
  return evaluate_ranks(queries, scores, gallery);
}

TrainResult train(const TrainData& data, const TrainConfig& config, const EpochCallback& on_epoch) {
  validate_train_config(config);
  const std::vector<std::size_t> train_idx = data.triplets.indices(Split::kTrain);
  if (train_idx.empty()) throw Error(ErrorCode::kEmptySplit, "train split is empty");
  const HeadDims dims = dims_for(data, config);

  std::vector<BatchItem> items;
  items.reserve(train_idx.size());
  for (std::size_t i : train_idx) {
    const Triplet& t = data.triplets.records[i];
    items.push_back({data.images.vector(data.images.index_of(t.ref_id)),
                     data.modifiers.vector(data.modifiers.index_of(t.mod_id)),
                     data.images.vector(data.images.index_of(t.tgt_id))});
  }
  std::size_t batches_per_epoch = items.size() / config.batch_size;
  const std::size_t tail = items.size() % config.batch_size;
  if (!config.drop_last && tail >= 2) ++batches_per_epoch;
  if (batches_per_epoch == 0) {
    throw Error(ErrorCode::kEmptySplit, "train split holds fewer triplets than one batch");
  }

  std::optional<Gallery> gallery;
  if (!config.monitor.empty()) gallery = make_gallery(data.images);

  TrainResult result;
  result.params = init_params(dims, config.seed);
  AdamWState state = make_adamw_state(dims);
  const BlockMask mask = reachable_blocks(config.flavor);
  std::mt19937_64 shuffle_rng(config.seed ^ 0x9E3779B97F4A7C15ULL);
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  std::map<std::string, double> best_value;
  std::vector<BatchItem> batch;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    const double lr = lr_at_epoch(epoch, config);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    for (std::size_t bi = 0; bi < batches_per_epoch; ++bi) {
      const std::size_t begin = bi * config.batch_size;
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      batch.clear();
      for (std::size_t k = begin; k < end; ++k) batch.push_back(items[order[k]]);
      const LossResult step = bbc_loss(batch, result.params, config.flavor);
      loss_sum += step.loss;
      adamw_step(result.params, step.grads, state, lr, config, mask);
    }
    EpochLog log;
    log.epoch = epoch;
    log.loss = loss_sum / static_cast<double>(batches_per_epoch);
    log.lr = lr;
    for (Split split : config.monitor) {
      const std::string name(split_name(split));
      MetricRow row = evaluate_split(data, *gallery, result.params, config.flavor, split,
                                     config.exclude_ref, config.threads);
      const double selected = selection_metric(row, config.convention);
      row["selection"] = selected;
      auto it = best_value.find(name);
      if (it == best_value.end() || selected > it->second) {
        best_value[name] = selected;
        result.best.insert_or_assign(name, std::make_pair(epoch, result.params));
      }
      log.metrics[name] = std::move(row);
    }
    log.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    if (on_epoch) on_epoch(log);
    result.logs.push_back(std::move(log));
  }
  return result;
}

CheckpointChoice select_checkpoint(std::span<const double> series_a,
                                   std::span<const double> series_b) {
  if (series_a.empty() || series_b.empty()) {
    throw Error(ErrorCode::kEmptyInput, "select_checkpoint: empty metric series");
  }
  if (series_a.size() != series_b.size()) {
    throw Error(ErrorCode::kLengthMismatch, "select_checkpoint: series lengths differ");
  }
  auto argmax = [](std::span<const double> s) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < s.size(); ++i) {
      if (s[i] > s[best]) best = i;
    }
    return best;
  };
  return {argmax(series_a), argmax(series_b)};
}

}  // namespace artemis
