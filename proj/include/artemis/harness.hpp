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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "artemis/datasets.hpp"
#include "artemis/evaluation.hpp"
#include "artemis/gradcheck.hpp"
#include "artemis/head.hpp"
#include "artemis/training.hpp"

namespace artemis {

// The harness probes with a smaller step than the library default; ReLU
// kinks inside a 1e-3 window are common at random init.
inline GradCheckOptions default_gradcheck_options() {
  GradCheckOptions options;
  options.step = 1e-5;
  return options;
}

// Everything a CLI run needs. Populated from "key = value" settings text;
// later lines override earlier ones, so flags appended after a config file win.
struct RunConfig {
  std::string images;
  std::string modifiers;
  std::string triplets;
  std::optional<std::string> subsets;
  std::optional<std::string> gallery;  // newline-separated ids; default: every image
  std::string checkpoint;              // written by train, read by eval/bench
  std::string out;                     // report path (JSON); stdout when empty
  std::string log;                     // epoch log path (JSONL)
  std::string dump;                    // per-query ranking dump path (JSONL)
  std::size_t dump_top_k = 10;
  TrainConfig train;
  Split eval_split = Split::kTest;
  std::size_t bench_repeats = 5;
  // gradcheck
  std::size_t gradcheck_instances = 100;
  std::size_t gradcheck_dim = 8;
  std::size_t gradcheck_batch = 4;
  std::size_t gradcheck_coordinates = 0;  // 0 probes every coordinate
  GradCheckOptions gradcheck = default_gradcheck_options();
  // synth
  SynthSpec synth;
  std::string synth_dir;
};

struct SettingInfo {
  std::string_view key;
  std::string_view help;
};

// Documented keys in display order.
const std::vector<SettingInfo>& setting_keys();

// Parses "key = value" lines; '#' starts a comment. Unknown keys and bad
// values raise Config errors naming the line.
std::vector<std::pair<std::string, std::string>> parse_settings(std::string_view text);
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);
// Applies every line of `text` in order; errors carry the line number.
void apply_settings(RunConfig& config, std::string_view text);
RunConfig run_config_from_settings(std::string_view text);
// Current value of a path-valued setting ("" when unset).
std::string path_setting(const RunConfig& config, std::string_view key);

struct LoadedData {
  FeatureBank images;
  FeatureBank modifiers;
  TripletSet triplets;
  std::vector<std::string> gallery_ids;

  TrainData view() const { return {images, modifiers, triplets}; }
};

LoadedData load_data(const RunConfig& config);

struct EvalOutcome {
  MetricRow metrics;
  MetricReport report;
  std::string dump;  // filled when dump_top_k > 0 and requested
};

EvalOutcome evaluate_checkpoint(const LoadedData& data, const HeadParams& params,
                                const RunConfig& config, bool with_dump);

struct AblationRow {
  Flavor flavor;
  MetricRow metrics;
  double final_loss = 0.0;
};

struct AblationReport {
  std::vector<AblationRow> rows;  // kAllFlavors order
  Split split = Split::kTest;
};

AblationReport run_ablation(const LoadedData& data, const RunConfig& config);
std::string ablation_json(const AblationReport& report);
std::string ablation_table(const AblationReport& report);

struct PhaseTimes {
  double query = 0.0;    // attention/projection vectors per query
  double gallery = 0.0;  // target-side precompute
  double scoring = 0.0;  // all query x target scores
  double total() const { return query + gallery + scoring; }
};

struct LatencyEntry {
  Flavor flavor;
  std::vector<PhaseTimes> runs;
  PhaseTimes min;     // per-phase minimum
  PhaseTimes median;  // per-phase median
  double min_total = 0.0;
  double median_total = 0.0;
};

struct LatencyReport {
  std::size_t queries = 0;
  std::size_t candidates = 0;
  std::size_t dim = 0;
  std::vector<LatencyEntry> entries;  // late_fusion, artemis
  double ratio = 0.0;                 // artemis min total / late_fusion min total
};

LatencyReport bench_latency(const LoadedData& data, const HeadParams& params,
                            const RunConfig& config);
std::string latency_json(const LatencyReport& report);
std::string latency_table(const LatencyReport& report);

struct GradcheckRun {
  Flavor flavor;
  std::string target;  // "loss", "s_is" or "s_em"
  std::size_t instance = 0;
  GradCheckReport report;
};

struct GradcheckSummary {
  std::vector<GradcheckRun> runs;
  bool passed = true;
  double max_error = 0.0;
};

// Random batches of unit vectors and a random head at `dim`; compares the
// tape gradient of the batch loss with central differences for every flavor.
GradcheckSummary run_gradcheck(const RunConfig& config);
std::string gradcheck_json(const GradcheckSummary& summary);

std::string bank_summary_json(const FeatureBank& bank);

}  // namespace artemis
