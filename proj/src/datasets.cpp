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

#include "artemis/datasets.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>
#include <unordered_set>

#include "artemis/error.hpp"
#include "binary_io.hpp"
#include "json.hpp"

namespace artemis {

using nlohmann::json;

namespace {

std::string padded_id(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s_%06zu", prefix, i);
  return buf;
}

// Non-empty lines with their 1-based line numbers.
std::vector<std::pair<std::size_t, std::string>> jsonl_lines(std::string_view text) {
  std::vector<std::pair<std::size_t, std::string>> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    std::string line(text.substr(start, end - start));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") != std::string::npos) out.emplace_back(line_no, line);
    start = end + 1;
  }
  return out;
}

json parse_line(const std::string& line, std::size_t line_no, const std::string& source) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse,
                source + ":" + std::to_string(line_no) + ": malformed JSON (" + e.what() + ")");
  }
}

std::string string_field(const json& obj, const char* key, std::size_t line_no,
                         const std::string& source) {
  if (!obj.is_object() || !obj.contains(key) || !obj[key].is_string()) {
    throw Error(ErrorCode::kParse, source + ":" + std::to_string(line_no) +
                                       ": missing string field '" + key + "'");
  }
  return obj[key].get<std::string>();
}

int hamming(std::uint64_t a, std::uint64_t b) { return std::popcount(a ^ b); }

}  // namespace

FeatureBank::FeatureBank(std::size_t dim, std::vector<std::string> ids, std::vector<float> data)
    : dim_(dim), ids_(std::move(ids)), data_(std::move(data)) {
  if (dim_ == 0) throw Error(ErrorCode::kShapeMismatch, "feature bank dim must be positive");
  if (data_.size() != ids_.size() * dim_) {
    throw Error(ErrorCode::kShapeMismatch,
                "feature bank: " + std::to_string(data_.size()) + " values for " +
                    std::to_string(ids_.size()) + " rows of dim " + std::to_string(dim_));
  }
  index_.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!index_.emplace(ids_[i], i).second) {
      throw Error(ErrorCode::kDuplicateId, "feature bank: id '" + ids_[i] + "' appears twice");
    }
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw Error(ErrorCode::kSpecInvalid,
                  "feature bank: non-finite value in row " + std::to_string(i / dim_));
    }
  }
}

std::optional<std::size_t> FeatureBank::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t FeatureBank::index_of(std::string_view id) const {
  if (auto i = find(id)) return *i;
  throw Error(ErrorCode::kUnknownId, "unknown id '" + std::string(id) + "'");
}

Vec64 FeatureBank::vector(std::size_t i, bool normalize) const {
  const auto r = row(i);
  Vec64 v(r.begin(), r.end());
  if (normalize && norm(v) > kNormEpsilon) v = l2_normalize(v);
  return v;
}

std::string encode_bank(const FeatureBank& bank) {
  detail::ByteWriter w;
  w.bytes(kBankMagic);
  w.u32(kBankVersion);
  w.u32(static_cast<std::uint32_t>(bank.rows()));
  w.u32(static_cast<std::uint32_t>(bank.dim()));
  for (float v : bank.data()) w.f32(v);
  return w.data();
}

FeatureBank decode_bank(std::string_view bytes, std::vector<std::string> ids,
                        const std::string& source) {
  detail::ByteReader r(bytes, source);
  if (r.remaining() < kBankMagic.size() || r.bytes(kBankMagic.size()) != kBankMagic) {
    throw Error(ErrorCode::kBadMagic, source + ": not an AFB1 feature bank");
  }
  const std::uint32_t version = r.u32();
  if (version != kBankVersion) {
    throw Error(ErrorCode::kBadMagic, source + ": unsupported version " + std::to_string(version));
  }
  const std::uint32_t rows = r.u32();
  const std::uint32_t dim = r.u32();
  const std::uint64_t expected = static_cast<std::uint64_t>(rows) * dim * 4;
  if (r.remaining() < expected) {
    throw Error(ErrorCode::kTruncatedFile, source + ": payload holds " +
                                               std::to_string(r.remaining()) + " bytes, header " +
                                               "promises " + std::to_string(expected));
  }
  if (ids.size() != rows) {
    throw Error(ErrorCode::kTruncatedFile, source + ": " + std::to_string(ids.size()) +
                                               " ids for " + std::to_string(rows) + " rows");
  }
  std::vector<float> data(static_cast<std::size_t>(rows) * dim);
  for (float& v : data) v = r.f32();
  return FeatureBank(dim, std::move(ids), std::move(data));
}

std::string encode_bank_ids(const FeatureBank& bank) {
  std::string out;
  for (std::size_t i = 0; i < bank.rows(); ++i) {
    out += json{{"row", i}, {"id", bank.ids()[i]}}.dump();
    out += '\n';
  }
  return out;
}

std::vector<std::string> decode_bank_ids(std::string_view text, const std::string& source) {
  std::vector<std::string> ids;
  for (const auto& [line_no, line] : jsonl_lines(text)) {
    const json obj = parse_line(line, line_no, source);
    if (!obj.contains("row") || !obj["row"].is_number_unsigned() ||
        obj["row"].get<std::size_t>() != ids.size()) {
      throw Error(ErrorCode::kParse, source + ":" + std::to_string(line_no) +
                                         ": rows must be listed in order starting at 0");
    }
    ids.push_back(string_field(obj, "id", line_no, source));
  }
  return ids;
}

std::string bank_ids_path(const std::string& path) { return path + ".ids.jsonl"; }

void write_feature_bank(const FeatureBank& bank, const std::string& path) {
  detail::write_file(path, encode_bank(bank));
  detail::write_file(bank_ids_path(path), encode_bank_ids(bank));
}

FeatureBank read_feature_bank(const std::string& path) {
  const std::string bytes = detail::read_file(path);
  const std::string sidecar = bank_ids_path(path);
  return decode_bank(bytes, decode_bank_ids(detail::read_file(sidecar), sidecar), path);
}

std::string_view split_name(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "unknown";
}

Split parse_split(std::string_view name) {
  for (Split s : {Split::kTrain, Split::kVal, Split::kTest}) {
    if (split_name(s) == name) return s;
  }
  throw Error(ErrorCode::kBadSplit, "unknown split '" + std::string(name) + "'");
}

std::vector<std::size_t> TripletSet::indices(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].split == split) out.push_back(i);
  }
  return out;
}

TripletSet parse_triplets(std::string_view text, const FeatureBank& images,
                          const FeatureBank& modifiers, const std::string& source) {
  TripletSet set;
  for (const auto& [line_no, line] : jsonl_lines(text)) {
    const json obj = parse_line(line, line_no, source);
    const std::string where = source + ":" + std::to_string(line_no);
    Triplet t;
    t.ref_id = string_field(obj, "ref", line_no, source);
    t.mod_id = string_field(obj, "mod", line_no, source);
    t.tgt_id = string_field(obj, "tgt", line_no, source);
    const std::string split = string_field(obj, "split", line_no, source);
    try {
      t.split = parse_split(split);
    } catch (const Error&) {
      throw Error(ErrorCode::kBadSplit, where + ": unknown split '" + split + "'");
    }
    if (!images.find(t.ref_id)) {
      throw Error(ErrorCode::kUnknownId, where + ": unknown ref id '" + t.ref_id + "'");
    }
    if (!modifiers.find(t.mod_id)) {
      throw Error(ErrorCode::kUnknownId, where + ": unknown mod id '" + t.mod_id + "'");
    }
    if (!images.find(t.tgt_id)) {
      throw Error(ErrorCode::kUnknownId, where + ": unknown tgt id '" + t.tgt_id + "'");
    }
    set.records.push_back(std::move(t));
  }
  return set;
}

void parse_subsets(std::string_view text, TripletSet& set, const FeatureBank& images,
                   const std::string& source) {
  for (const auto& [line_no, line] : jsonl_lines(text)) {
    const json obj = parse_line(line, line_no, source);
    const std::string where = source + ":" + std::to_string(line_no);
    if (!obj.contains("query") || !obj["query"].is_number_unsigned() ||
        !obj.contains("members") || !obj["members"].is_array()) {
      throw Error(ErrorCode::kParse, where + ": expected {\"query\": n, \"members\": [...]}");
    }
    const auto query = obj["query"].get<std::size_t>();
    if (query >= set.records.size()) {
      throw Error(ErrorCode::kUnknownId, where + ": query index " + std::to_string(query) +
                                             " out of range");
    }
    std::vector<std::string> members;
    for (const json& m : obj["members"]) {
      if (!m.is_string()) throw Error(ErrorCode::kParse, where + ": member ids must be strings");
      std::string id = m.get<std::string>();
      if (!images.find(id)) {
        throw Error(ErrorCode::kUnknownId, where + ": unknown member id '" + id + "'");
      }
      members.push_back(std::move(id));
    }
    if (members.empty()) throw Error(ErrorCode::kMissingSubset, where + ": empty subset");
    set.subsets[query] = std::move(members);
  }
}

TripletSet load_triplets(const std::string& path, const FeatureBank& images,
                         const FeatureBank& modifiers,
                         const std::optional<std::string>& subsets_path) {
  TripletSet set = parse_triplets(detail::read_file(path), images, modifiers, path);
  if (subsets_path) parse_subsets(detail::read_file(*subsets_path), set, images, *subsets_path);
  return set;
}

std::string encode_triplets(const TripletSet& set) {
  std::string out;
  for (const Triplet& t : set.records) {
    json obj;
    obj["ref"] = t.ref_id;
    obj["mod"] = t.mod_id;
    obj["tgt"] = t.tgt_id;
    obj["split"] = std::string(split_name(t.split));
    out += obj.dump();
    out += '\n';
  }
  return out;
}

std::string encode_subsets(const TripletSet& set) {
  std::string out;
  for (const auto& [query, members] : set.subsets) {
    out += json{{"query", query}, {"members", members}}.dump();
    out += '\n';
  }
  return out;
}

void validate_synth_spec(const SynthSpec& spec) {
  auto fail = [](const std::string& why) { throw Error(ErrorCode::kSpecInvalid, why); };
  if (spec.n_attributes == 0 || spec.n_attributes > 62) fail("n_attributes must be in [1, 62]");
  if (spec.flip_count >= spec.n_attributes) fail("flip_count must be < n_attributes");
  if (!(spec.noise_sigma >= 0.0)) fail("noise_sigma must be >= 0");
  if (spec.dim_image == 0 || spec.dim_text == 0) fail("embedding dims must be positive");
  if (spec.gallery_size < 2) fail("gallery_size must be >= 2");
  if (spec.gallery_size > (std::uint64_t{1} << spec.n_attributes)) {
    fail("gallery_size exceeds the number of distinct latents 2^n_attributes");
  }
  if (spec.n_train == 0) fail("n_train must be positive");
  if (!(spec.near_miss_fraction >= 0.0 && spec.near_miss_fraction < 1.0)) {
    fail("near_miss_fraction must be in [0, 1)");
  }
  if (!(spec.text_alignment >= 0.0 && spec.text_alignment <= 1.0)) {
    fail("text_alignment must be in [0, 1]");
  }
  if (spec.text_alignment > 0.0 && spec.dim_text != spec.dim_image) {
    fail("text_alignment needs dim_text == dim_image");
  }
  if (spec.subset_size == 1 || spec.subset_size > spec.gallery_size) {
    fail("subset_size must be 0 or in [2, gallery_size]");
  }
}

SyntheticData generate_synthetic(const SynthSpec& spec) {
  validate_synth_spec(spec);
  std::mt19937_64 rng(spec.seed);
  const std::size_t n_attr = spec.n_attributes;
  const std::uint64_t full = (std::uint64_t{1} << n_attr) - 1;
  std::uniform_int_distribution<std::uint64_t> any_latent(0, full);
  std::uniform_int_distribution<std::size_t> any_attr(0, n_attr - 1);

  // Gallery latents: uniform random, then one-attribute variations.
  std::vector<std::uint64_t> latents;
  std::unordered_set<std::uint64_t> seen;
  const auto n_near = static_cast<std::size_t>(
      std::floor(spec.near_miss_fraction * static_cast<double>(spec.gallery_size)));
  const std::size_t n_random = std::max<std::size_t>(1, spec.gallery_size - n_near);
  while (latents.size() < n_random) {
    const std::uint64_t z = any_latent(rng);
    if (seen.insert(z).second) latents.push_back(z);
  }
  std::size_t misses = 0;
  while (latents.size() < spec.gallery_size) {
    std::uniform_int_distribution<std::size_t> pick(0, latents.size() - 1);
    std::uint64_t z = latents[pick(rng)] ^ (std::uint64_t{1} << any_attr(rng));
    if (++misses > 64 * spec.gallery_size) z = any_latent(rng);
    if (seen.insert(z).second) latents.push_back(z);
  }

  std::normal_distribution<double> gauss(0.0, 1.0);
  auto random_map = [&](std::size_t dim) {
    Mat64 map(dim, n_attr);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
    for (double& v : map.values) v = gauss(rng) * scale;
    return map;
  };
  const Mat64 image_map = random_map(spec.dim_image);
  Mat64 text_map = random_map(spec.dim_text);
  if (spec.text_alignment > 0.0) {
    const double keep = std::sqrt(1.0 - spec.text_alignment * spec.text_alignment);
    for (std::size_t i = 0; i < text_map.values.size(); ++i) {
      text_map.values[i] = spec.text_alignment * image_map.values[i] + keep * text_map.values[i];
    }
  }

  auto embed = [&](const Mat64& map, std::span<const double> code) {
    Vec64 x(map.rows, 0.0);
    for (std::size_t d = 0; d < map.rows; ++d) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n_attr; ++k) acc += map(d, k) * code[k];
      x[d] = acc + spec.noise_sigma * gauss(rng);
    }
    const double n = norm(x);
    std::vector<float> out(x.size());
    for (std::size_t d = 0; d < x.size(); ++d) {
      out[d] = static_cast<float>(n > kNormEpsilon ? x[d] / n : x[d]);
    }
    return out;
  };
  auto signs = [&](std::uint64_t z) {
    Vec64 s(n_attr);
    for (std::size_t k = 0; k < n_attr; ++k) s[k] = (z >> k) & 1u ? 1.0 : -1.0;
    return s;
  };

  SyntheticData out;
  std::vector<std::string> image_ids;
  std::vector<float> image_data;
  for (std::size_t i = 0; i < latents.size(); ++i) {
    image_ids.push_back(padded_id("img", i));
    const std::vector<float> e = embed(image_map, signs(latents[i]));
    image_data.insert(image_data.end(), e.begin(), e.end());
    const Vec64 s = signs(latents[i]);
    out.latents.emplace_back(s.begin(), s.end());
  }
  out.images = FeatureBank(spec.dim_image, std::move(image_ids), std::move(image_data));

  const std::size_t n_queries = spec.n_train + 2 * spec.n_eval;
  std::uniform_int_distribution<std::size_t> any_item(0, latents.size() - 1);
  std::vector<std::string> mod_ids;
  std::vector<float> mod_data;
  std::vector<std::size_t> candidates;
  for (std::size_t q = 0; q < n_queries; ++q) {
    std::size_t ref = 0, tgt = 0;
    bool found = false;
    for (int attempt = 0; attempt < 1000 && !found; ++attempt) {
      ref = any_item(rng);
      candidates.clear();
      for (std::size_t j = 0; j < latents.size(); ++j) {
        if (hamming(latents[ref], latents[j]) == static_cast<int>(spec.flip_count)) {
          candidates.push_back(j);
        }
      }
      if (!candidates.empty()) {
        std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
        tgt = candidates[pick(rng)];
        found = true;
      }
    }
    if (!found) {
      throw Error(ErrorCode::kSpecInvalid, "gallery too sparse to form queries with flip_count " +
                                               std::to_string(spec.flip_count));
    }
    const Vec64 zr = signs(latents[ref]);
    const Vec64 zt = signs(latents[tgt]);
    Vec64 delta(n_attr);
    for (std::size_t k = 0; k < n_attr; ++k) delta[k] = zt[k] - zr[k];
    const std::vector<float> m = embed(text_map, delta);
    mod_ids.push_back(padded_id("mod", q));
    mod_data.insert(mod_data.end(), m.begin(), m.end());

    Triplet t;
    t.ref_id = out.images.ids()[ref];
    t.mod_id = mod_ids.back();
    t.tgt_id = out.images.ids()[tgt];
    t.split = q < spec.n_train                 ? Split::kTrain
              : q < spec.n_train + spec.n_eval ? Split::kVal
                                               : Split::kTest;
    if (spec.subset_size > 0 && t.split != Split::kTrain) {
      // The target plus the gallery items closest to the reference in
      // latent space, i.e. visually similar candidates.
      std::vector<std::size_t> order(latents.size());
      for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return hamming(latents[ref], latents[a]) < hamming(latents[ref], latents[b]);
      });
      std::vector<std::string> members{t.tgt_id};
      for (std::size_t j : order) {
        if (members.size() == spec.subset_size) break;
        if (j != tgt) members.push_back(out.images.ids()[j]);
      }
      out.triplets.subsets[q] = std::move(members);
    }
    out.triplets.records.push_back(std::move(t));
  }
  out.modifiers = FeatureBank(spec.dim_text, std::move(mod_ids), std::move(mod_data));
  return out;
}

void write_synthetic(const SyntheticData& data, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  write_feature_bank(data.images, (base / "images.afb").string());
  write_feature_bank(data.modifiers, (base / "modifiers.afb").string());
  detail::write_file((base / "triplets.jsonl").string(), encode_triplets(data.triplets));
  if (!data.triplets.subsets.empty()) {
    detail::write_file((base / "subsets.jsonl").string(), encode_subsets(data.triplets));
  }
}

}  // namespace artemis
