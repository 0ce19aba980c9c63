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

#include "artemis/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <thread>

#include "artemis/error.hpp"
#include "json.hpp"

namespace artemis {

using nlohmann::json;

namespace {

struct CandidateOrder {
  std::span<const double> row;
  const std::vector<std::size_t>& id_rank;

  // True when candidate a ranks ahead of candidate b.
  bool operator()(std::size_t a, std::size_t b) const {
    if (row[a] != row[b]) return row[a] > row[b];
    return id_rank[a] < id_rank[b];
  }
};

std::optional<std::size_t> excluded_candidate(const Gallery& gallery, const QuerySpec& query) {
  if (!query.exclude_ref) return std::nullopt;
  auto it = gallery.index.find(query.ref_id);
  if (it == gallery.index.end()) return std::nullopt;
  // A reference that is itself a correct answer stays in play.
  if (std::find(query.ground_truth.begin(), query.ground_truth.end(), query.ref_id) !=
      query.ground_truth.end()) {
    return std::nullopt;
  }
  return it->second;
}

std::vector<std::size_t> ground_truth_indices(const Gallery& gallery, const QuerySpec& query) {
  if (query.ground_truth.empty()) {
    throw Error(ErrorCode::kEmptyInput, "query " + query.ref_id + "/" + query.mod_id +
                                            " has no ground truth");
  }
  std::vector<std::size_t> out;
  for (const std::string& id : query.ground_truth) out.push_back(gallery.index_of(id));
  return out;
}

void check_row(std::span<const double> row, const Gallery& gallery) {
  if (row.size() != gallery.size()) {
    throw Error(ErrorCode::kLengthMismatch, "score row has " + std::to_string(row.size()) +
                                                " entries for " +
                                                std::to_string(gallery.size()) + " candidates");
  }
}

void for_each_chunk(std::size_t count, std::size_t threads,
                    const std::function<void(std::size_t, std::size_t)>& work) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    work(0, count);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  const std::size_t chunk = (count + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    pool.emplace_back([&, t, begin, end] {
      try {
        if (begin < end) work(begin, end);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

double get_cell(const MetricRow& row, const std::string& key, const std::string& where) {
  auto it = row.find(key);
  if (it == row.end()) throw Error(ErrorCode::kMissingCell, where + " lacks " + key);
  return it->second;
}

std::string format_fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", round_half_up(v, 2));
  return buf;
}

}  // namespace

std::vector<QuerySpec> build_queries(const TripletSet& set, Split split, bool exclude_ref) {
  std::vector<QuerySpec> queries;
  std::map<std::pair<std::string, std::string>, std::size_t> slot;
  for (std::size_t i : set.indices(split)) {
    const Triplet& t = set.records[i];
    auto [it, inserted] = slot.try_emplace({t.ref_id, t.mod_id}, queries.size());
    if (inserted) {
      QuerySpec q;
      q.ref_id = t.ref_id;
      q.mod_id = t.mod_id;
      q.exclude_ref = exclude_ref;
      if (auto s = set.subsets.find(i); s != set.subsets.end()) q.subset_members = s->second;
      queries.push_back(std::move(q));
    }
    auto& gt = queries[it->second].ground_truth;
    if (std::find(gt.begin(), gt.end(), t.tgt_id) == gt.end()) gt.push_back(t.tgt_id);
  }
  return queries;
}

std::size_t Gallery::index_of(std::string_view id) const {
  auto it = index.find(std::string(id));
  if (it == index.end()) {
    throw Error(ErrorCode::kUnknownId, "id '" + std::string(id) + "' is not in the gallery");
  }
  return it->second;
}

Gallery make_gallery(const FeatureBank& images, std::span<const std::string> ids) {
  Gallery g;
  g.ids.assign(ids.begin(), ids.end());
  g.vectors = Mat64(ids.size(), images.dim());
  for (std::size_t c = 0; c < ids.size(); ++c) {
    if (!g.index.emplace(ids[c], c).second) {
      throw Error(ErrorCode::kDuplicateId, "gallery lists '" + ids[c] + "' twice");
    }
    const Vec64 v = images.vector(images.index_of(ids[c]));
    std::copy(v.begin(), v.end(), g.vectors.values.begin() + c * images.dim());
  }
  std::vector<std::size_t> by_id(ids.size());
  std::iota(by_id.begin(), by_id.end(), 0);
  std::sort(by_id.begin(), by_id.end(),
            [&](std::size_t a, std::size_t b) { return g.ids[a] < g.ids[b]; });
  g.id_rank.resize(ids.size());
  for (std::size_t pos = 0; pos < by_id.size(); ++pos) g.id_rank[by_id[pos]] = pos;
  return g;
}

Gallery make_gallery(const FeatureBank& images) { return make_gallery(images, images.ids()); }

EncodedQueries encode_queries(std::span<const QuerySpec> queries, const FeatureBank& images,
                              const FeatureBank& modifiers, const HeadParams& params,
                              Flavor flavor) {
  EncodedQueries enc;
  enc.flavor = flavor;
  enc.dim = params.dims.image;
  enc.count = queries.size();
  const std::size_t n = enc.dim;
  const bool uses_is = flavor == Flavor::kIsOnly || flavor == Flavor::kArtemis;
  const bool uses_em = flavor == Flavor::kEmOnly || flavor == Flavor::kArtemis;
  if (images.dim() != params.dims.image || modifiers.dim() != params.dims.text) {
    throw Error(ErrorCode::kShapeMismatch, "bank dims do not match the head dims");
  }
  if (!uses_is && !uses_em) {
    if (flavor != Flavor::kImageOnly && params.dims.text != params.dims.image) {
      throw Error(ErrorCode::kShapeMismatch,
                  std::string(flavor_name(flavor)) + " needs H_T == H_I");
    }
    enc.unit.resize(queries.size() * n);
  }
  if (uses_is) {
    enc.is_weighted.resize(queries.size() * n);
    enc.is_sq.resize(queries.size() * n);
    enc.is_ref_norm.resize(queries.size());
  }
  if (uses_em) {
    enc.em_weighted.resize(queries.size() * n);
    enc.em_sq.resize(queries.size() * n);
  }
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const Vec64 r = images.vector(images.index_of(queries[q].ref_id));
    const Vec64 m = modifiers.vector(modifiers.index_of(queries[q].mod_id));
    const std::size_t at = q * n;
    switch (flavor) {
      case Flavor::kImageOnly: {
        const Vec64 u = l2_normalize(r);
        std::copy(u.begin(), u.end(), enc.unit.begin() + at);
        continue;
      }
      case Flavor::kTextOnly: {
        const Vec64 u = l2_normalize(m);
        std::copy(u.begin(), u.end(), enc.unit.begin() + at);
        continue;
      }
      case Flavor::kLateFusion: {
        Vec64 fused = r;
        for (std::size_t i = 0; i < n; ++i) fused[i] += m[i];
        const Vec64 u = l2_normalize(fused);
        std::copy(u.begin(), u.end(), enc.unit.begin() + at);
        continue;
      }
      default: break;
    }
    if (uses_is) {
      const Vec64 a = attention(m, AttentionKind::kImplicitSimilarity, params);
      double ref_sq = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double a2 = a[i] * a[i];
        enc.is_sq[at + i] = a2;
        enc.is_weighted[at + i] = a2 * r[i];
        const double ar = a[i] * r[i];
        ref_sq += ar * ar;
      }
      const double ref_norm = std::sqrt(ref_sq);
      if (!(ref_norm > kNormEpsilon)) {
        throw Error(ErrorCode::kNearZeroNorm, "reweighted reference has zero norm");
      }
      enc.is_ref_norm[q] = ref_norm;
    }
    if (uses_em) {
      const Vec64 a = attention(m, AttentionKind::kExplicitMatching, params);
      const Vec64 projected = project_text(m, params);
      const double pn = norm(projected);
      if (!(pn > kNormEpsilon)) {
        throw Error(ErrorCode::kNearZeroNorm, "projected modifier has zero norm");
      }
      for (std::size_t i = 0; i < n; ++i) {
        enc.em_sq[at + i] = a[i] * a[i];
        enc.em_weighted[at + i] = a[i] * projected[i] / pn;
      }
    }
  }
  return enc;
}

EncodedGallery encode_gallery(const Gallery& gallery) {
  EncodedGallery enc;
  enc.dim = gallery.vectors.cols;
  enc.count = gallery.size();
  enc.unit.resize(enc.count * enc.dim);
  for (std::size_t c = 0; c < enc.count; ++c) {
    const Vec64 u = l2_normalize(gallery.vectors.row(c));
    std::copy(u.begin(), u.end(), enc.unit.begin() + c * enc.dim);
  }
  return enc;
}

ScoreMatrix score_encoded(const EncodedQueries& queries, const EncodedGallery& gallery,
                          std::size_t threads) {
  if (queries.dim != gallery.dim) {
    throw Error(ErrorCode::kShapeMismatch, "query and gallery dims differ");
  }
  ScoreMatrix out;
  out.queries = queries.count;
  out.candidates = gallery.count;
  out.values.resize(out.queries * out.candidates);
  const std::size_t n = queries.dim;
  const Flavor flavor = queries.flavor;
  const double eps2 = kNormEpsilon * kNormEpsilon;

  for_each_chunk(queries.count, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t q = begin; q < end; ++q) {
      double* out_row = out.values.data() + q * out.candidates;
      const std::size_t qa = q * n;
      for (std::size_t c = 0; c < gallery.count; ++c) {
        const double* t = gallery.unit.data() + c * n;
        switch (flavor) {
          case Flavor::kImageOnly:
          case Flavor::kTextOnly:
          case Flavor::kLateFusion: {
            const double* u = queries.unit.data() + qa;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc += u[i] * t[i];
            out_row[c] = std::clamp(acc, -1.0, 1.0);
            break;
          }
          case Flavor::kIsOnly: {
            const double* w = queries.is_weighted.data() + qa;
            const double* a2 = queries.is_sq.data() + qa;
            double num = 0.0, den = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
              num += w[i] * t[i];
              den += a2[i] * (t[i] * t[i]);
            }
            if (!(den > eps2)) throw Error(ErrorCode::kNearZeroNorm, "reweighted target");
            out_row[c] = std::clamp(num / (queries.is_ref_norm[q] * std::sqrt(den)), -1.0, 1.0);
            break;
          }
          case Flavor::kEmOnly: {
            const double* w = queries.em_weighted.data() + qa;
            const double* a2 = queries.em_sq.data() + qa;
            double num = 0.0, den = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
              num += w[i] * t[i];
              den += a2[i] * (t[i] * t[i]);
            }
            if (!(den > eps2)) throw Error(ErrorCode::kNearZeroNorm, "reweighted target");
            out_row[c] = std::clamp(num / std::sqrt(den), -1.0, 1.0);
            break;
          }
          case Flavor::kArtemis: {
            const double* wi = queries.is_weighted.data() + qa;
            const double* ai = queries.is_sq.data() + qa;
            const double* we = queries.em_weighted.data() + qa;
            const double* ae = queries.em_sq.data() + qa;
            double num_is = 0.0, den_is = 0.0, num_em = 0.0, den_em = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
              const double ti = t[i];
              const double t2 = ti * ti;
              num_is += wi[i] * ti;
              den_is += ai[i] * t2;
              num_em += we[i] * ti;
              den_em += ae[i] * t2;
            }
            if (!(den_is > eps2) || !(den_em > eps2)) {
              throw Error(ErrorCode::kNearZeroNorm, "reweighted target");
            }
            const double is = std::clamp(
                num_is / (queries.is_ref_norm[q] * std::sqrt(den_is)), -1.0, 1.0);
            const double em = std::clamp(num_em / std::sqrt(den_em), -1.0, 1.0);
            out_row[c] = em + is;
            break;
          }
        }
      }
    }
  });
  return out;
}

ScoreMatrix score_matrix(std::span<const QuerySpec> queries, const FeatureBank& images,
                         const FeatureBank& modifiers, const Gallery& gallery,
                         const HeadParams& params, Flavor flavor, std::size_t threads) {
  const EncodedQueries q = encode_queries(queries, images, modifiers, params, flavor);
  const EncodedGallery g = encode_gallery(gallery);
  return score_encoded(q, g, threads);
}

RankResult rank_targets(std::span<const double> row, const Gallery& gallery,
                        const QuerySpec& query) {
  check_row(row, gallery);
  const auto excluded = excluded_candidate(gallery, query);
  RankResult result;
  result.order.reserve(row.size());
  for (std::size_t c = 0; c < row.size(); ++c) {
    if (excluded && *excluded == c) continue;
    result.order.push_back(c);
  }
  std::stable_sort(result.order.begin(), result.order.end(),
                   CandidateOrder{row, gallery.id_rank});
  const std::vector<std::size_t> gt = ground_truth_indices(gallery, query);
  for (std::size_t pos = 0; pos < result.order.size(); ++pos) {
    if (std::find(gt.begin(), gt.end(), result.order[pos]) != gt.end()) {
      result.rank = pos + 1;
      break;
    }
  }
  return result;
}

std::size_t best_rank(std::span<const double> row, const Gallery& gallery,
                      const QuerySpec& query) {
  check_row(row, gallery);
  const auto excluded = excluded_candidate(gallery, query);
  const CandidateOrder ahead{row, gallery.id_rank};
  std::size_t best = row.size() + 1;
  for (std::size_t g : ground_truth_indices(gallery, query)) {
    std::size_t better = 0;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c == g || (excluded && *excluded == c)) continue;
      if (ahead(c, g)) ++better;
    }
    best = std::min(best, better + 1);
  }
  return best;
}

std::size_t subset_rank(std::span<const double> row, const Gallery& gallery,
                        const QuerySpec& query) {
  check_row(row, gallery);
  if (!query.subset_members) {
    throw Error(ErrorCode::kMissingSubset,
                "query " + query.ref_id + "/" + query.mod_id + " has no candidate subset");
  }
  const auto excluded = excluded_candidate(gallery, query);
  std::vector<std::size_t> members;
  for (const std::string& id : *query.subset_members) {
    const std::size_t c = gallery.index_of(id);
    if (excluded && *excluded == c) continue;
    members.push_back(c);
  }
  const CandidateOrder ahead{row, gallery.id_rank};
  const std::vector<std::size_t> gt = ground_truth_indices(gallery, query);
  std::optional<std::size_t> best;
  for (std::size_t g : gt) {
    if (std::find(members.begin(), members.end(), g) == members.end()) continue;
    std::size_t better = 0;
    for (std::size_t c : members) {
      if (c != g && ahead(c, g)) ++better;
    }
    best = std::min(best.value_or(better + 1), better + 1);
  }
  if (!best) {
    throw Error(ErrorCode::kMissingSubset,
                "subset of query " + query.ref_id + "/" + query.mod_id +
                    " contains no ground-truth item");
  }
  return *best;
}

double recall_at_k(std::span<const std::size_t> ranks, std::size_t k) {
  if (ranks.empty()) throw Error(ErrorCode::kEmptyInput, "recall_at_k: no ranks");
  if (k == 0) throw Error(ErrorCode::kConfig, "recall_at_k: K must be >= 1");
  std::size_t hits = 0;
  for (std::size_t r : ranks) {
    if (r == 0) throw Error(ErrorCode::kSpecInvalid, "ranks are 1-based");
    if (r <= k) ++hits;
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(ranks.size());
}

double recall_subset_at_k(std::span<const QuerySpec> queries, const ScoreMatrix& matrix,
                          const Gallery& gallery, std::size_t k) {
  if (queries.size() != matrix.queries) {
    throw Error(ErrorCode::kLengthMismatch, "query count differs from score matrix rows");
  }
  std::vector<std::size_t> ranks;
  ranks.reserve(queries.size());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    ranks.push_back(subset_rank(matrix.row(q), gallery, queries[q]));
  }
  return recall_at_k(ranks, k);
}

double median_rank(std::span<const std::size_t> ranks) {
  if (ranks.empty()) throw Error(ErrorCode::kEmptyInput, "median_rank: no ranks");
  std::vector<std::size_t> sorted(ranks.begin(), ranks.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  if (sorted.size() % 2 == 1) return static_cast<double>(sorted[mid]);
  return (static_cast<double>(sorted[mid - 1]) + static_cast<double>(sorted[mid])) / 2.0;
}

std::string_view convention_name(Convention convention) {
  switch (convention) {
    case Convention::kFashionIq: return "fashioniq";
    case Convention::kShoes: return "shoes";
    case Convention::kCirr: return "cirr";
  }
  return "unknown";
}

Convention parse_convention(std::string_view name) {
  for (Convention c : {Convention::kFashionIq, Convention::kShoes, Convention::kCirr}) {
    if (convention_name(c) == name) return c;
  }
  throw Error(ErrorCode::kConfig, "unknown convention '" + std::string(name) + "'");
}

MetricReport aggregate_suite(const MetricTable& table, Convention convention) {
  MetricReport report;
  report.convention = convention;
  report.cells = table;
  switch (convention) {
    case Convention::kFashionIq: {
      double r10 = 0.0, r50 = 0.0;
      for (const char* category : {"dress", "shirt", "toptee"}) {
        auto it = table.find(category);
        if (it == table.end()) {
          throw Error(ErrorCode::kMissingCell, std::string("fashioniq table lacks ") + category);
        }
        const double c10 = get_cell(it->second, "R@10", category);
        const double c50 = get_cell(it->second, "R@50", category);
        report.aggregates[std::string(category) + " avg"] = (c10 + c50) / 2.0;
        r10 += c10;
        r50 += c50;
      }
      report.aggregates["R@10"] = r10 / 3.0;
      report.aggregates["R@50"] = r50 / 3.0;
      report.aggregates["CM"] = (r10 + r50) / 6.0;
      report.headline = "CM";
      break;
    }
    case Convention::kShoes: {
      if (table.size() != 1) {
        throw Error(ErrorCode::kMissingCell, "shoes convention expects exactly one category");
      }
      const auto& [name, row] = *table.begin();
      report.aggregates["average"] = (get_cell(row, "R@1", name) + get_cell(row, "R@10", name) +
                                      get_cell(row, "R@50", name)) /
                                     3.0;
      report.headline = "average";
      break;
    }
    case Convention::kCirr: {
      if (table.size() != 1) {
        throw Error(ErrorCode::kMissingCell, "cirr convention expects exactly one category");
      }
      const auto& [name, row] = *table.begin();
      report.aggregates["combined"] =
          (get_cell(row, "R@5", name) + get_cell(row, "R_subset@1", name)) / 2.0;
      report.headline = "combined";
      break;
    }
  }
  return report;
}

double round_half_up(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  const double scaled = value * scale;
  double whole = std::floor(scaled);
  // Decimal inputs such as 43.045 land a hair below the midpoint in binary.
  if (scaled - whole >= 0.5 - 1e-9) whole += 1.0;
  return whole / scale;
}

std::string report_json(const MetricReport& report) {
  json j;
  j["convention"] = std::string(convention_name(report.convention));
  j["headline"] = report.headline;
  json cells = json::object();
  for (const auto& [category, row] : report.cells) {
    json r = json::object();
    for (const auto& [metric, value] : row) r[metric] = round_half_up(value);
    cells[category] = r;
  }
  j["cells"] = cells;
  json agg = json::object();
  for (const auto& [name, value] : report.aggregates) agg[name] = round_half_up(value);
  j["aggregates"] = agg;
  return j.dump(2);
}

std::string report_table(const MetricReport& report) {
  std::vector<std::string> metrics;
  for (const auto& [category, row] : report.cells) {
    for (const auto& [metric, value] : row) {
      if (std::find(metrics.begin(), metrics.end(), metric) == metrics.end()) {
        metrics.push_back(metric);
      }
    }
  }
  // "R@5" before "R@10": compare the text prefix, then the trailing number.
  auto split_key = [](const std::string& m) {
    std::size_t cut = m.size();
    while (cut > 0 && std::isdigit(static_cast<unsigned char>(m[cut - 1]))) --cut;
    const long number = cut < m.size() ? std::stol(m.substr(cut)) : -1;
    return std::make_pair(m.substr(0, cut), number);
  };
  std::sort(metrics.begin(), metrics.end(),
            [&](const std::string& a, const std::string& b) { return split_key(a) < split_key(b); });
  std::size_t first = 8;
  for (const auto& [category, row] : report.cells) first = std::max(first, category.size());
  std::string out;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%-*s", static_cast<int>(first), "category");
  out += buf;
  for (const auto& m : metrics) {
    std::snprintf(buf, sizeof(buf), "  %12s", m.c_str());
    out += buf;
  }
  out += '\n';
  for (const auto& [category, row] : report.cells) {
    std::snprintf(buf, sizeof(buf), "%-*s", static_cast<int>(first), category.c_str());
    out += buf;
    for (const auto& m : metrics) {
      auto it = row.find(m);
      std::snprintf(buf, sizeof(buf), "  %12s", it == row.end() ? "-" : format_fixed(it->second).c_str());
      out += buf;
    }
    out += '\n';
  }
  for (const auto& [name, value] : report.aggregates) {
    std::snprintf(buf, sizeof(buf), "%-*s  %12s%s\n", static_cast<int>(first), name.c_str(),
                  format_fixed(value).c_str(), name == report.headline ? "  *" : "");
    out += buf;
  }
  return out;
}

MetricRow evaluate_ranks(std::span<const QuerySpec> queries, const ScoreMatrix& matrix,
                         const Gallery& gallery) {
  if (queries.empty()) throw Error(ErrorCode::kEmptySplit, "no queries to evaluate");
  std::vector<std::size_t> ranks;
  ranks.reserve(queries.size());
  bool all_subsets = true;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    ranks.push_back(best_rank(matrix.row(q), gallery, queries[q]));
    all_subsets = all_subsets && queries[q].subset_members.has_value();
  }
  MetricRow row;
  for (std::size_t k : {1, 5, 10, 50}) row["R@" + std::to_string(k)] = recall_at_k(ranks, k);
  row["median_rank"] = median_rank(ranks);
  if (all_subsets) {
    std::vector<std::size_t> sub;
    sub.reserve(queries.size());
    for (std::size_t q = 0; q < queries.size(); ++q) {
      sub.push_back(subset_rank(matrix.row(q), gallery, queries[q]));
    }
    for (std::size_t k : {1, 2, 3}) row["R_subset@" + std::to_string(k)] = recall_at_k(sub, k);
  }
  return row;
}

double selection_metric(const MetricRow& m, Convention convention) {
  switch (convention) {
    case Convention::kFashionIq:
      return (get_cell(m, "R@10", "split") + get_cell(m, "R@50", "split")) / 2.0;
    case Convention::kShoes:
      return (get_cell(m, "R@1", "split") + get_cell(m, "R@10", "split") +
              get_cell(m, "R@50", "split")) /
             3.0;
    case Convention::kCirr:
      return (get_cell(m, "R@5", "split") + get_cell(m, "R_subset@1", "split")) / 2.0;
  }
  return 0.0;
}

std::string ranking_dump(std::span<const QuerySpec> queries, const ScoreMatrix& matrix,
                         const Gallery& gallery, std::size_t top_k) {
  std::string out;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const RankResult r = rank_targets(matrix.row(q), gallery, queries[q]);
    json top = json::array();
    for (std::size_t i = 0; i < std::min(top_k, r.order.size()); ++i) {
      top.push_back({{"id", gallery.ids[r.order[i]]}, {"score", matrix.row(q)[r.order[i]]}});
    }
    json line;
    line["query"] = q;
    line["ref"] = queries[q].ref_id;
    line["mod"] = queries[q].mod_id;
    line["ground_truth"] = queries[q].ground_truth;
    line["rank"] = r.rank;
    line["top"] = top;
    out += line.dump();
    out += '\n';
  }
  return out;
}

}  // namespace artemis
