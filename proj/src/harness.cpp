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

#include "artemis/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "artemis/error.hpp"
#include "json.hpp"

namespace artemis {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* expected) {
  throw Error(ErrorCode::kConfig, "setting '" + std::string(key) + "': '" + std::string(value) +
                                      "' is not " + expected);
}

std::size_t to_size(std::string_view key, std::string_view v) {
  std::size_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "a non-negative integer");
  return out;
}

std::uint64_t to_u64(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "a non-negative integer");
  return out;
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "a number");
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, v, "a boolean");
}

std::vector<Split> to_splits(std::string_view key, std::string_view v) {
  std::vector<Split> out;
  std::string item;
  std::istringstream in{std::string(v)};
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      out.push_back(parse_split(item));
    } catch (const Error&) {
      bad_value(key, item, "a split (train, val, test)");
    }
  }
  return out;
}

template <typename Fn>
auto config_parse(std::string_view key, std::string_view value, const char* what, Fn&& fn) {
  try {
    return fn(value);
  } catch (const Error&) {
    bad_value(key, value, what);
  }
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<std::string> read_id_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open gallery list " + path);
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (!line.empty()) ids.push_back(line);
  }
  if (ids.empty()) throw Error(ErrorCode::kEmptyInput, "gallery list " + path + " is empty");
  return ids;
}

json rounded(const MetricRow& row) {
  json j = json::object();
  for (const auto& [k, v] : row) j[k] = round_half_up(v);
  return j;
}

}  // namespace

const std::vector<SettingInfo>& setting_keys() {
  static const std::vector<SettingInfo> keys = {
      {"images", "image feature bank (AFB1)"},
      {"modifiers", "modifier feature bank (AFB1)"},
      {"triplets", "triplet file (JSONL)"},
      {"subsets", "optional subset file (JSONL)"},
      {"gallery", "optional candidate id list, one per line (default: every image)"},
      {"checkpoint", "checkpoint path (written by train, read by eval and bench)"},
      {"out", "report path (JSON); the table goes to stdout"},
      {"log", "epoch log path (JSONL)"},
      {"dump", "per-query ranking dump path (JSONL)"},
      {"dump_top_k", "candidates listed per query in the dump (10)"},
      {"flavor", "image_only | text_only | late_fusion | is_only | em_only | artemis"},
      {"seed", "RNG seed for init and shuffling (0)"},
      {"batch_size", "triplets per batch (32)"},
      {"epochs", "training epochs (50)"},
      {"lr", "initial learning rate (5e-4)"},
      {"lr_decay", "multiplicative decay factor (0.5)"},
      {"decay_every", "epochs between decays (10)"},
      {"weight_decay", "AdamW decoupled weight decay (0.01)"},
      {"beta1", "AdamW beta1 (0.9)"},
      {"beta2", "AdamW beta2 (0.999)"},
      {"eps", "AdamW epsilon (1e-8)"},
      {"hidden", "attention MLP width; 0 uses the image dim (0)"},
      {"drop_last", "drop the last incomplete batch (true)"},
      {"monitor", "comma-separated splits evaluated every epoch (none)"},
      {"convention", "fashioniq | shoes | cirr (shoes)"},
      {"exclude_ref", "remove the reference from its own candidates (false)"},
      {"threads", "evaluation threads (1)"},
      {"split", "split evaluated by eval, ablate and bench (test)"},
      {"repeats", "bench repetitions (5)"},
      {"gradcheck.instances", "seeded instances per flavor (100)"},
      {"gradcheck.dim", "H_T = H_I = hidden for gradcheck (8)"},
      {"gradcheck.batch", "batch size of the checked loss (4)"},
      {"gradcheck.coordinates", "coordinates probed per check; 0 probes all (0)"},
      {"gradcheck.step", "central-difference step (1e-5)"},
      {"gradcheck.tolerance", "relative tolerance (1e-4)"},
      {"synth.dir", "output directory of synth"},
      {"synth.attributes", "latent attributes (12)"},
      {"synth.dim_image", "image embedding dim (64)"},
      {"synth.dim_text", "modifier embedding dim (64)"},
      {"synth.train", "train triplets (2000)"},
      {"synth.eval", "triplets per val and test split (500)"},
      {"synth.gallery", "gallery size (1000)"},
      {"synth.noise", "embedding noise sigma (0.05)"},
      {"synth.flips", "attributes flipped per query (3)"},
      {"synth.near_miss", "fraction of one-flip near-miss distractors (0.5)"},
      {"synth.text_alignment", "modifier map correlation with the image map (0.3)"},
      {"synth.subset_size", "candidate subset size per query; 0 disables (0)"},
  };
  return keys;
}

namespace {

struct SettingLine {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

std::vector<SettingLine> parse_setting_lines(std::string_view text) {
  std::vector<SettingLine> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kConfig,
                  "line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(std::string_view(body).substr(0, eq));
    std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) {
      throw Error(ErrorCode::kConfig, "line " + std::to_string(line_no) + ": empty key");
    }
    out.push_back({std::move(key), std::move(value), line_no});
  }
  return out;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> parse_settings(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  for (SettingLine& s : parse_setting_lines(text)) out.emplace_back(std::move(s.key), std::move(s.value));
  return out;
}

void apply_settings(RunConfig& config, std::string_view text) {
  for (const SettingLine& s : parse_setting_lines(text)) {
    try {
      apply_setting(config, s.key, s.value);
    } catch (const Error& e) {
      std::string detail = e.what();
      if (const auto colon = detail.find(": "); colon != std::string::npos) detail.erase(0, colon + 2);
      throw Error(e.code(), "line " + std::to_string(s.line) + ": " + detail);
    }
  }
}

void apply_setting(RunConfig& c, std::string_view key, std::string_view v) {
  TrainConfig& t = c.train;
  SynthSpec& s = c.synth;
  if (key == "images") c.images = v;
  else if (key == "modifiers") c.modifiers = v;
  else if (key == "triplets") c.triplets = v;
  else if (key == "subsets") c.subsets = v.empty() ? std::nullopt : std::optional<std::string>(v);
  else if (key == "gallery") c.gallery = v.empty() ? std::nullopt : std::optional<std::string>(v);
  else if (key == "checkpoint") c.checkpoint = v;
  else if (key == "out") c.out = v;
  else if (key == "log") c.log = v;
  else if (key == "dump") c.dump = v;
  else if (key == "dump_top_k") c.dump_top_k = to_size(key, v);
  else if (key == "flavor") t.flavor = config_parse(key, v, "a flavor", [](auto x) { return parse_flavor(x); });
  else if (key == "seed") t.seed = to_u64(key, v);
  else if (key == "batch_size") t.batch_size = to_size(key, v);
  else if (key == "epochs") t.epochs = to_size(key, v);
  else if (key == "lr") t.lr0 = to_double(key, v);
  else if (key == "lr_decay") t.lr_decay = to_double(key, v);
  else if (key == "decay_every") t.decay_every = to_size(key, v);
  else if (key == "weight_decay") t.weight_decay = to_double(key, v);
  else if (key == "beta1") t.beta1 = to_double(key, v);
  else if (key == "beta2") t.beta2 = to_double(key, v);
  else if (key == "eps") t.eps = to_double(key, v);
  else if (key == "hidden") t.hidden = to_size(key, v);
  else if (key == "drop_last") t.drop_last = to_bool(key, v);
  else if (key == "monitor") t.monitor = to_splits(key, v);
  else if (key == "convention") t.convention = config_parse(key, v, "a convention", [](auto x) { return parse_convention(x); });
  else if (key == "exclude_ref") t.exclude_ref = to_bool(key, v);
  else if (key == "threads") t.threads = std::max<std::size_t>(1, to_size(key, v));
  else if (key == "split") c.eval_split = config_parse(key, v, "a split", [](auto x) { return parse_split(x); });
  else if (key == "repeats") c.bench_repeats = to_size(key, v);
  else if (key == "gradcheck.instances") c.gradcheck_instances = to_size(key, v);
  else if (key == "gradcheck.dim") c.gradcheck_dim = to_size(key, v);
  else if (key == "gradcheck.batch") c.gradcheck_batch = to_size(key, v);
  else if (key == "gradcheck.coordinates") c.gradcheck_coordinates = to_size(key, v);
  else if (key == "gradcheck.step") c.gradcheck.step = to_double(key, v);
  else if (key == "gradcheck.tolerance") c.gradcheck.tolerance = to_double(key, v);
  else if (key == "synth.dir") c.synth_dir = v;
  else if (key == "synth.attributes") s.n_attributes = to_size(key, v);
  else if (key == "synth.dim_image") s.dim_image = to_size(key, v);
  else if (key == "synth.dim_text") s.dim_text = to_size(key, v);
  else if (key == "synth.train") s.n_train = to_size(key, v);
  else if (key == "synth.eval") s.n_eval = to_size(key, v);
  else if (key == "synth.gallery") s.gallery_size = to_size(key, v);
  else if (key == "synth.noise") s.noise_sigma = to_double(key, v);
  else if (key == "synth.flips") s.flip_count = to_size(key, v);
  else if (key == "synth.near_miss") s.near_miss_fraction = to_double(key, v);
  else if (key == "synth.text_alignment") s.text_alignment = to_double(key, v);
  else if (key == "synth.subset_size") s.subset_size = to_size(key, v);
  else throw Error(ErrorCode::kConfig, "unknown setting '" + std::string(key) + "'");
}

RunConfig run_config_from_settings(std::string_view text) {
  RunConfig config;
  apply_settings(config, text);
  return config;
}

std::string path_setting(const RunConfig& c, std::string_view key) {
  if (key == "images") return c.images;
  if (key == "modifiers") return c.modifiers;
  if (key == "triplets") return c.triplets;
  if (key == "subsets") return c.subsets.value_or("");
  if (key == "gallery") return c.gallery.value_or("");
  if (key == "checkpoint") return c.checkpoint;
  if (key == "out") return c.out;
  if (key == "log") return c.log;
  if (key == "dump") return c.dump;
  if (key == "synth.dir") return c.synth_dir;
  throw Error(ErrorCode::kConfig, "'" + std::string(key) + "' is not a path setting");
}

LoadedData load_data(const RunConfig& config) {
  for (const auto* path : {&config.images, &config.modifiers, &config.triplets}) {
    if (path->empty()) {
      throw Error(ErrorCode::kConfig, "images, modifiers and triplets paths are required");
    }
  }
  LoadedData data{read_feature_bank(config.images), read_feature_bank(config.modifiers), {}, {}};
  data.triplets = load_triplets(config.triplets, data.images, data.modifiers, config.subsets);
  if (config.gallery) {
    data.gallery_ids = read_id_list(*config.gallery);
  } else {
    data.gallery_ids = data.images.ids();
  }
  return data;
}

EvalOutcome evaluate_checkpoint(const LoadedData& data, const HeadParams& params,
                                const RunConfig& config, bool with_dump) {
  const TrainConfig& t = config.train;
  const std::vector<QuerySpec> queries =
      build_queries(data.triplets, config.eval_split, t.exclude_ref);
  const std::string split(split_name(config.eval_split));
  if (queries.empty()) throw Error(ErrorCode::kEmptySplit, "split '" + split + "' has no queries");
  const Gallery gallery = make_gallery(data.images, data.gallery_ids);
  const ScoreMatrix scores =
      score_matrix(queries, data.images, data.modifiers, gallery, params, t.flavor, t.threads);
  EvalOutcome out;
  out.metrics = evaluate_ranks(queries, scores, gallery);
  const MetricTable table = {{split, out.metrics}};
  if (t.convention == Convention::kFashionIq) {
    // A single category cannot form the three-category challenge metric;
    // report its own (R@10 + R@50) / 2.
    out.report.convention = t.convention;
    out.report.cells = table;
    out.report.headline = split + " avg";
    out.report.aggregates[out.report.headline] = selection_metric(out.metrics, t.convention);
  } else {
    out.report = aggregate_suite(table, t.convention);
  }
  if (with_dump) out.dump = ranking_dump(queries, scores, gallery, config.dump_top_k);
  return out;
}

AblationReport run_ablation(const LoadedData& data, const RunConfig& config) {
  AblationReport report;
  report.split = config.eval_split;
  const TrainData view = data.view();
  const Gallery gallery = make_gallery(data.images, data.gallery_ids);
  for (Flavor flavor : kAllFlavors) {
    TrainConfig tc = config.train;
    tc.flavor = flavor;
    tc.monitor.clear();
    const TrainResult trained = train(view, tc, {});
    AblationRow row;
    row.flavor = flavor;
    row.final_loss = trained.logs.empty() ? 0.0 : trained.logs.back().loss;
    row.metrics = evaluate_split(view, gallery, trained.params, flavor, config.eval_split,
                                 tc.exclude_ref, tc.threads);
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string ablation_json(const AblationReport& report) {
  json rows = json::array();
  for (const AblationRow& row : report.rows) {
    json r = rounded(row.metrics);
    r["flavor"] = std::string(flavor_name(row.flavor));
    r["final_loss"] = row.final_loss;
    rows.push_back(r);
  }
  json j;
  j["split"] = std::string(split_name(report.split));
  j["rows"] = rows;
  return j.dump(2);
}

std::string ablation_table(const AblationReport& report) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-12s  %8s  %8s  %8s  %11s\n", "flavor", "R@1", "R@10",
                "R@50", "median_rank");
  out += buf;
  for (const AblationRow& row : report.rows) {
    std::snprintf(buf, sizeof(buf), "%-12s  %8.2f  %8.2f  %8.2f  %11.2f\n",
                  std::string(flavor_name(row.flavor)).c_str(),
                  round_half_up(row.metrics.at("R@1")), round_half_up(row.metrics.at("R@10")),
                  round_half_up(row.metrics.at("R@50")),
                  round_half_up(row.metrics.at("median_rank")));
    out += buf;
  }
  return out;
}

LatencyReport bench_latency(const LoadedData& data, const HeadParams& params,
                            const RunConfig& config) {
  if (config.bench_repeats == 0) throw Error(ErrorCode::kConfig, "repeats must be >= 1");
  const std::vector<QuerySpec> queries =
      build_queries(data.triplets, config.eval_split, config.train.exclude_ref);
  if (queries.empty()) throw Error(ErrorCode::kEmptySplit, "bench split has no queries");
  const Gallery gallery = make_gallery(data.images, data.gallery_ids);

  LatencyReport report;
  report.queries = queries.size();
  report.candidates = gallery.size();
  report.dim = gallery.vectors.cols;
  for (Flavor flavor : {Flavor::kLateFusion, Flavor::kArtemis}) {
    report.entries.push_back({flavor, {}, {}, {}, 0.0, 0.0});
  }
  // Flavors alternate inside each repeat so drift hits both equally.
  for (std::size_t rep = 0; rep < config.bench_repeats; ++rep) {
    for (LatencyEntry& entry : report.entries) {
      PhaseTimes times;
      auto start = std::chrono::steady_clock::now();
      const EncodedQueries q =
          encode_queries(queries, data.images, data.modifiers, params, entry.flavor);
      times.query = seconds_since(start);
      start = std::chrono::steady_clock::now();
      const EncodedGallery g = encode_gallery(gallery);
      times.gallery = seconds_since(start);
      start = std::chrono::steady_clock::now();
      const ScoreMatrix scores = score_encoded(q, g, config.train.threads);
      times.scoring = seconds_since(start);
      entry.runs.push_back(times);
    }
  }
  auto median_of = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 == 1 ? v[mid] : (v[mid - 1] + v[mid]) / 2.0;
  };
  for (LatencyEntry& entry : report.entries) {
    std::vector<double> query, gallery_t, scoring, total;
    for (const PhaseTimes& t : entry.runs) {
      query.push_back(t.query);
      gallery_t.push_back(t.gallery);
      scoring.push_back(t.scoring);
      total.push_back(t.total());
    }
    entry.min = {*std::min_element(query.begin(), query.end()),
                 *std::min_element(gallery_t.begin(), gallery_t.end()),
                 *std::min_element(scoring.begin(), scoring.end())};
    entry.median = {median_of(query), median_of(gallery_t), median_of(scoring)};
    entry.min_total = *std::min_element(total.begin(), total.end());
    entry.median_total = median_of(total);
  }
  report.ratio = report.entries[1].min_total / report.entries[0].min_total;
  return report;
}

std::string latency_json(const LatencyReport& report) {
  auto phases = [](const PhaseTimes& t) {
    return json{{"query", t.query}, {"gallery", t.gallery}, {"scoring", t.scoring},
                {"total", t.total()}};
  };
  json entries = json::array();
  for (const LatencyEntry& e : report.entries) {
    json runs = json::array();
    for (const PhaseTimes& t : e.runs) runs.push_back(phases(t));
    entries.push_back({{"flavor", std::string(flavor_name(e.flavor))},
                       {"min", phases(e.min)},
                       {"median", phases(e.median)},
                       {"min_total", e.min_total},
                       {"median_total", e.median_total},
                       {"runs", runs}});
  }
  json j;
  j["queries"] = report.queries;
  j["candidates"] = report.candidates;
  j["dim"] = report.dim;
  j["entries"] = entries;
  j["ratio"] = report.ratio;
  return j.dump(2);
}

std::string latency_table(const LatencyReport& report) {
  std::string out;
  char buf[200];
  std::snprintf(buf, sizeof(buf), "%zu queries x %zu candidates, dim %zu\n", report.queries,
                report.candidates, report.dim);
  out += buf;
  std::snprintf(buf, sizeof(buf), "%-12s  %10s  %10s  %10s  %10s  %10s\n", "flavor", "query",
                "gallery", "scoring", "min_total", "med_total");
  out += buf;
  for (const LatencyEntry& e : report.entries) {
    std::snprintf(buf, sizeof(buf), "%-12s  %10.4f  %10.4f  %10.4f  %10.4f  %10.4f\n",
                  std::string(flavor_name(e.flavor)).c_str(), e.min.query, e.min.gallery,
                  e.min.scoring, e.min_total, e.median_total);
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "ratio artemis/late_fusion: %.4f\n", report.ratio);
  out += buf;
  return out;
}

namespace {

Vec64 random_unit(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec64 v(n);
  for (double& x : v) x = normal(rng);
  return l2_normalize(v);
}

// A head away from the symmetric init: random biases and gamma.
HeadParams random_head(const HeadDims& dims, std::mt19937_64& rng) {
  HeadParams p = init_params(dims, rng());
  std::normal_distribution<double> bias(0.0, 0.1);
  for (Vec64* b : {&p.attn_is.b1, &p.attn_is.b2, &p.attn_em.b1, &p.attn_em.b2, &p.proj.b}) {
    for (double& x : *b) x = bias(rng);
  }
  p.gamma = std::uniform_real_distribution<double>(1.0, 10.0)(rng);
  return p;
}

std::size_t flat_block_begin(const HeadDims& d, std::size_t block) {
  const HeadParams shape = zero_params(d);
  std::size_t offset = 0, index = 0, found = 0;
  for_each_block(shape, [&](const Vec64& v) {
    if (index == block) found = offset;
    offset += v.size();
    ++index;
  });
  if (block >= index) return offset;  // gamma
  return found;
}

// Probed coordinates: every reachable one, or `count` sampled from them.
std::vector<std::size_t> probe_coordinates(const HeadDims& dims, const BlockMask& mask,
                                           std::size_t count, std::mt19937_64& rng) {
  const std::size_t is_begin = flat_block_begin(dims, 0);
  const std::size_t em_begin = flat_block_begin(dims, 4);
  const std::size_t proj_begin = flat_block_begin(dims, 8);
  const std::size_t gamma_at = flat_block_begin(dims, 10);
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  if (mask.attn_is) ranges.emplace_back(is_begin, em_begin);
  if (mask.attn_em) ranges.emplace_back(em_begin, proj_begin);
  if (mask.proj) ranges.emplace_back(proj_begin, gamma_at);
  std::vector<std::size_t> out;
  std::size_t total = 0;
  for (const auto& [b, e] : ranges) total += e - b;
  if (count == 0 || count >= total) {
    for (const auto& [b, e] : ranges) {
      for (std::size_t i = b; i < e; ++i) out.push_back(i);
    }
  } else {
    std::uniform_int_distribution<std::size_t> pick(0, total - 1);
    for (std::size_t k = 0; k < count; ++k) {
      std::size_t at = pick(rng);
      for (const auto& [b, e] : ranges) {
        if (at < e - b) {
          out.push_back(b + at);
          break;
        }
        at -= e - b;
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
  if (mask.gamma) out.push_back(gamma_at);
  return out;
}

// Scalar forward loss for finite differences; shares no tape code.
double scalar_loss(std::span<const BatchItem> batch, const HeadParams& p, Flavor flavor) {
  Mat64 s(batch.size(), batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    for (std::size_t j = 0; j < batch.size(); ++j) {
      s(i, j) = score(batch[i].r, batch[i].m, batch[j].t, p, flavor);
    }
  }
  return bbc_loss_from_scores(s, p.gamma);
}

HeadParams score_gradient(const BatchItem& item, const HeadParams& params, Flavor flavor) {
  Tape tape;
  const HeadVars vars = bind_params(tape, params);
  const Tape::Var r = tape.constant(item.r);
  const Tape::Var m = tape.constant(item.m);
  const Tape::Var t = tape.constant(item.t);
  const TapeQuery q = tape_query(tape, vars, r, m, flavor);
  const Tape::Var s = tape_score(tape, q, t, flavor);
  tape.backward(s);
  return collect_grads(tape, vars, params.dims);
}

}  // namespace

GradcheckSummary run_gradcheck(const RunConfig& config) {
  if (config.gradcheck_dim == 0 || config.gradcheck_batch < 2) {
    throw Error(ErrorCode::kConfig, "gradcheck needs dim >= 1 and batch >= 2");
  }
  const std::size_t n = config.gradcheck_dim;
  const HeadDims dims{n, n, n};
  GradcheckSummary summary;
  for (std::size_t inst = 0; inst < config.gradcheck_instances; ++inst) {
    std::mt19937_64 rng(config.train.seed * 1000003ULL + inst);
    std::vector<BatchItem> batch;
    for (std::size_t b = 0; b < config.gradcheck_batch; ++b) {
      BatchItem item;
      item.r = random_unit(n, rng);
      item.m = random_unit(n, rng);
      item.t = random_unit(n, rng);
      batch.push_back(std::move(item));
    }
    const HeadParams params = random_head(dims, rng);
    const Vec64 x = flatten(params);

    auto record = [&](Flavor flavor, std::string target, const ScalarFunction& f,
                      const HeadParams& grads, const BlockMask& mask) {
      GradCheckOptions options = config.gradcheck;
      options.coordinates = probe_coordinates(dims, mask, config.gradcheck_coordinates, rng);
      const Vec64 analytic = flatten(grads);
      GradcheckRun run{flavor, std::move(target), inst, finite_diff_check(f, x, analytic, options)};
      summary.passed = summary.passed && run.report.passed;
      summary.max_error = std::max(summary.max_error, run.report.max_error);
      summary.runs.push_back(std::move(run));
    };

    for (Flavor flavor : kAllFlavors) {
      const LossResult loss = bbc_loss(batch, params, flavor);
      record(flavor, "loss",
             [&](std::span<const double> v) { return scalar_loss(batch, unflatten(v, dims), flavor); },
             loss.grads, reachable_blocks(flavor));
    }
    for (Flavor flavor : {Flavor::kIsOnly, Flavor::kEmOnly}) {
      BlockMask mask = reachable_blocks(flavor);
      mask.gamma = false;
      record(flavor, flavor == Flavor::kIsOnly ? "s_is" : "s_em",
             [&](std::span<const double> v) {
               return score(batch[0].r, batch[0].m, batch[0].t, unflatten(v, dims), flavor);
             },
             score_gradient(batch[0], params, flavor), mask);
    }
  }
  return summary;
}

std::string gradcheck_json(const GradcheckSummary& summary) {
  json runs = json::array();
  std::size_t failed = 0;
  for (const GradcheckRun& run : summary.runs) {
    std::size_t bad = 0;
    for (const GradCheckEntry& e : run.report.entries) bad += e.passed ? 0 : 1;
    failed += run.report.passed ? 0 : 1;
    if (run.report.passed) continue;  // only failures are listed in detail
    runs.push_back({{"flavor", std::string(flavor_name(run.flavor))},
                    {"target", run.target},
                    {"instance", run.instance},
                    {"max_error", run.report.max_error},
                    {"failed_coordinates", bad}});
  }
  json j;
  j["passed"] = summary.passed;
  j["checks"] = summary.runs.size();
  j["failed_checks"] = failed;
  j["max_error"] = summary.max_error;
  j["failures"] = runs;
  return j.dump(2);
}

std::string bank_summary_json(const FeatureBank& bank) {
  double min_norm = 0.0, max_norm = 0.0;
  for (std::size_t i = 0; i < bank.rows(); ++i) {
    double sq = 0.0;
    for (float v : bank.row(i)) sq += static_cast<double>(v) * static_cast<double>(v);
    const double nrm = std::sqrt(sq);
    if (i == 0 || nrm < min_norm) min_norm = nrm;
    if (i == 0 || nrm > max_norm) max_norm = nrm;
  }
  json j;
  j["rows"] = bank.rows();
  j["dim"] = bank.dim();
  j["min_norm"] = min_norm;
  j["max_norm"] = max_norm;
  json head = json::array();
  for (std::size_t i = 0; i < std::min<std::size_t>(5, bank.rows()); ++i) head.push_back(bank.ids()[i]);
  j["first_ids"] = head;
  return j.dump(2);
}

}  // namespace artemis
