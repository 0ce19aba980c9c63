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

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "artemis/datasets.hpp"
#include "artemis/head.hpp"

namespace artemis {

struct QuerySpec {
  std::string ref_id;
  std::string mod_id;
  std::vector<std::string> ground_truth;
  std::optional<std::vector<std::string>> subset_members;
  bool exclude_ref = false;
};

// Queries of one split; records sharing (ref, mod) merge into a single
// query whose ground truth is the union of their targets. Subsets come from
// the first record of each group.
std::vector<QuerySpec> build_queries(const TripletSet& set, Split split, bool exclude_ref);

// Candidate images, widened and L2-normalized once.
struct Gallery {
  std::vector<std::string> ids;
  std::vector<std::size_t> id_rank;  // position of each id in ascending id order
  Mat64 vectors;                     // rows = candidates
  std::unordered_map<std::string, std::size_t> index;

  std::size_t size() const { return ids.size(); }
  std::size_t index_of(std::string_view id) const;
};

Gallery make_gallery(const FeatureBank& images);
Gallery make_gallery(const FeatureBank& images, std::span<const std::string> ids);

struct ScoreMatrix {
  std::size_t queries = 0;
  std::size_t candidates = 0;
  std::vector<double> values;

  std::span<const double> row(std::size_t q) const {
    return {values.data() + q * candidates, candidates};
  }
};

// Query-side vectors for one flavor, computed once per query and reused for
// every candidate.
struct EncodedQueries {
  Flavor flavor = Flavor::kArtemis;
  std::size_t dim = 0;
  std::size_t count = 0;
  // image_only / text_only / late_fusion: unit query vector.
  // is_only, artemis: a_is^2 * r and a_is^2, plus ||a_is * r||.
  // em_only, artemis: a_em * T(m) / ||T(m)|| and a_em^2.
  std::vector<double> unit;
  std::vector<double> is_weighted, is_sq, is_ref_norm;
  std::vector<double> em_weighted, em_sq;
};

struct EncodedGallery {
  std::size_t dim = 0;
  std::size_t count = 0;
  std::vector<double> unit;  // normalized candidates
};

EncodedQueries encode_queries(std::span<const QuerySpec> queries, const FeatureBank& images,
                              const FeatureBank& modifiers, const HeadParams& params,
                              Flavor flavor);
EncodedGallery encode_gallery(const Gallery& gallery);
ScoreMatrix score_encoded(const EncodedQueries& queries, const EncodedGallery& gallery,
                          std::size_t threads = 1);

ScoreMatrix score_matrix(std::span<const QuerySpec> queries, const FeatureBank& images,
                         const FeatureBank& modifiers, const Gallery& gallery,
                         const HeadParams& params, Flavor flavor, std::size_t threads = 1);

struct RankResult {
  std::vector<std::size_t> order;  // candidate indices, best first
  std::size_t rank = 0;            // 1-based rank of the best ground-truth item
};

// Descending score, ascending candidate id on ties.
RankResult rank_targets(std::span<const double> row, const Gallery& gallery,
                        const QuerySpec& query);
// Same rank as rank_targets() without materializing the order.
std::size_t best_rank(std::span<const double> row, const Gallery& gallery,
                      const QuerySpec& query);
std::size_t subset_rank(std::span<const double> row, const Gallery& gallery,
                        const QuerySpec& query);

double recall_at_k(std::span<const std::size_t> ranks, std::size_t k);
double recall_subset_at_k(std::span<const QuerySpec> queries, const ScoreMatrix& matrix,
                          const Gallery& gallery, std::size_t k);
double median_rank(std::span<const std::size_t> ranks);

using MetricRow = std::map<std::string, double>;
using MetricTable = std::map<std::string, MetricRow>;  // category -> metric -> value

enum class Convention { kFashionIq, kShoes, kCirr };
std::string_view convention_name(Convention convention);
Convention parse_convention(std::string_view name);

struct MetricReport {
  Convention convention = Convention::kShoes;
  MetricTable cells;
  MetricRow aggregates;
  std::string headline;  // key into aggregates
};

MetricReport aggregate_suite(const MetricTable& table, Convention convention);

// Half-up rounding applied only when a report is emitted.
double round_half_up(double value, int decimals = 2);

std::string report_json(const MetricReport& report);
std::string report_table(const MetricReport& report);

// R@{1,5,10,50}, median rank and, when every query has a subset,
// R_subset@{1,2,3} of one split.
MetricRow evaluate_ranks(std::span<const QuerySpec> queries, const ScoreMatrix& matrix,
                         const Gallery& gallery);

// Checkpoint-selection value for one split under a dataset convention:
// fashioniq mean(R@10, R@50); shoes mean(R@1, R@10, R@50);
// cirr (R@5 + R_subset@1) / 2.
double selection_metric(const MetricRow& metrics, Convention convention);

// One JSON object per query: ids, best rank and the top-k candidates.
std::string ranking_dump(std::span<const QuerySpec> queries, const ScoreMatrix& matrix,
                         const Gallery& gallery, std::size_t top_k);

}  // namespace artemis
