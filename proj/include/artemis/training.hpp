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

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "artemis/datasets.hpp"
#include "artemis/evaluation.hpp"
#include "artemis/head.hpp"

namespace artemis {

struct TrainConfig {
  std::size_t batch_size = 32;
  std::size_t epochs = 50;
  double lr0 = 5e-4;
  double lr_decay = 0.5;
  std::size_t decay_every = 10;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t seed = 0;
  Flavor flavor = Flavor::kArtemis;
  std::size_t hidden = 0;  // attention MLP width; 0 selects H_I
  bool drop_last = true;
  // Splits evaluated after every epoch; checkpoints are selected on them.
  std::vector<Split> monitor;
  Convention convention = Convention::kShoes;
  bool exclude_ref = false;
  std::size_t threads = 1;
};

void validate_train_config(const TrainConfig& config);

// One (r, m, t) training triplet, already widened and normalized.
struct BatchItem {
  Vec64 r;
  Vec64 m;
  Vec64 t;
};

struct LossResult {
  double loss = 0.0;
  HeadParams grads;  // same layout as the parameters; gamma holds d loss / d gamma
};

// Batch-based classification loss: mean over i of
// -log softmax_j(gamma * s(r_i, m_i, t_j))[i], the denominator running over
// every target in the batch.
LossResult bbc_loss(std::span<const BatchItem> batch, const HeadParams& params, Flavor flavor);

// Same loss on a precomputed B x B score matrix (rows = queries).
double bbc_loss_from_scores(const Mat64& scores, double gamma);

// Which parameter blocks a flavor's score reaches; the rest never change.
struct BlockMask {
  bool attn_is = false;
  bool attn_em = false;
  bool proj = false;
  bool gamma = true;
};
BlockMask reachable_blocks(Flavor flavor);

struct AdamWState {
  HeadParams first;   // m
  HeadParams second;  // v
  std::uint64_t step = 0;
};

AdamWState make_adamw_state(const HeadDims& dims);

// Decoupled weight decay followed by the bias-corrected Adam update for every
// block in `mask`; gamma is never decayed and stays >= kMinGamma.
void adamw_step(HeadParams& params, const HeadParams& grads, AdamWState& state, double lr,
                const TrainConfig& config, const BlockMask& mask = {true, true, true, true});

double lr_at_epoch(std::size_t epoch, const TrainConfig& config);

struct EpochLog {
  std::size_t epoch = 0;
  double loss = 0.0;
  double lr = 0.0;
  std::map<std::string, MetricRow> metrics;  // split name -> metrics
  double seconds = 0.0;
};

std::string epoch_log_jsonl(std::span<const EpochLog> logs);

struct TrainData {
  const FeatureBank& images;
  const FeatureBank& modifiers;
  const TripletSet& triplets;
};

struct TrainResult {
  HeadParams params;  // after the last epoch
  std::vector<EpochLog> logs;
  // Best epoch and parameters per monitored split, by the selection metric.
  std::map<std::string, std::pair<std::size_t, HeadParams>> best;
};

using EpochCallback = std::function<void(const EpochLog&)>;

TrainResult train(const TrainData& data, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

// Evaluates one split with the given parameters.
MetricRow evaluate_split(const TrainData& data, const Gallery& gallery, const HeadParams& params,
                         Flavor flavor, Split split, bool exclude_ref, std::size_t threads);

HeadDims dims_for(const TrainData& data, const TrainConfig& config);

// Bidirectional cross-validation: the epoch maximizing A's series is where B
// is reported and vice versa. Ties go to the earlier epoch.
struct CheckpointChoice {
  std::size_t epoch_for_b = 0;
  std::size_t epoch_for_a = 0;
};
CheckpointChoice select_checkpoint(std::span<const double> series_a,
                                   std::span<const double> series_b);

}  // namespace artemis
