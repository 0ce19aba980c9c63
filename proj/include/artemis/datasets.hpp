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
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "artemis/numerics.hpp"

namespace artemis {

inline constexpr std::string_view kBankMagic = "AFB1";
inline constexpr std::uint32_t kBankVersion = 1;

// Dense float32 embedding rows addressed by unique string ids.
class FeatureBank {
 public:
  FeatureBank() = default;
  FeatureBank(std::size_t dim, std::vector<std::string> ids, std::vector<float> data);

  std::size_t dim() const { return dim_; }
  std::size_t rows() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<float>& data() const { return data_; }

  std::span<const float> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
  std::optional<std::size_t> find(std::string_view id) const;
  std::size_t index_of(std::string_view id) const;  // throws UnknownId

  // Row widened to 64-bit; L2-normalized when `normalize` and the norm
  // exceeds the guard, otherwise returned as stored.
  Vec64 vector(std::size_t i, bool normalize = true) const;

  friend bool operator==(const FeatureBank& a, const FeatureBank& b) {
    return a.dim_ == b.dim_ && a.ids_ == b.ids_ && a.data_ == b.data_;
  }

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<float> data_;
  std::unordered_map<std::string, std::size_t> index_;
};

// AFB1: "AFB1" | u32 version | u32 rows | u32 dim | rows*dim f32, all
// little-endian; ids live in "<path>.ids.jsonl" as {"row": i, "id": "..."}.
std::string encode_bank(const FeatureBank& bank);
FeatureBank decode_bank(std::string_view bytes, std::vector<std::string> ids,
                        const std::string& source = "bank");
std::string encode_bank_ids(const FeatureBank& bank);
std::vector<std::string> decode_bank_ids(std::string_view text, const std::string& source);

void write_feature_bank(const FeatureBank& bank, const std::string& path);
FeatureBank read_feature_bank(const std::string& path);
std::string bank_ids_path(const std::string& path);

enum class Split { kTrain, kVal, kTest };
std::string_view split_name(Split split);
Split parse_split(std::string_view name);

struct Triplet {
  std::string ref_id;
  std::string mod_id;
  std::string tgt_id;
  Split split = Split::kTrain;

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

struct TripletSet {
  std::vector<Triplet> records;
  // Record index -> candidate ids used for subset recall.
  std::map<std::size_t, std::vector<std::string>> subsets;

  std::vector<std::size_t> indices(Split split) const;
  bool has_split(Split split) const { return !indices(split).empty(); }
};

// JSONL, one {"ref","mod","tgt","split"} object per line. Reference and
// target ids must resolve in `images`, modifier ids in `modifiers`.
TripletSet load_triplets(const std::string& path, const FeatureBank& images,
                         const FeatureBank& modifiers,
                         const std::optional<std::string>& subsets_path = std::nullopt);
TripletSet parse_triplets(std::string_view text, const FeatureBank& images,
                          const FeatureBank& modifiers, const std::string& source = "triplets");
// {"query": record index, "members": [...ids]} per line.
void parse_subsets(std::string_view text, TripletSet& set, const FeatureBank& images,
                   const std::string& source = "subsets");

std::string encode_triplets(const TripletSet& set);
std::string encode_subsets(const TripletSet& set);

struct SynthSpec {
  std::size_t n_attributes = 12;
  std::size_t dim_image = 64;
  std::size_t dim_text = 64;
  std::size_t n_train = 2000;
  std::size_t n_eval = 500;  // per evaluation split (val and test)
  std::size_t gallery_size = 1000;
  double noise_sigma = 0.05;
  std::size_t flip_count = 3;
  // Fraction of the gallery built as one-attribute variations of items
  // already present; the remainder are uniform random latents.
  double near_miss_fraction = 0.5;
  // Correlation between the modifier map and the image map (requires equal
  // dims when > 0); 0 makes the two spaces unrelated.
  double text_alignment = 0.3;
  std::size_t subset_size = 0;  // > 0 attaches per-query candidate subsets
  std::uint64_t seed = 0;
};

void validate_synth_spec(const SynthSpec& spec);

struct SyntheticData {
  FeatureBank images;     // the gallery; references and targets are members
  FeatureBank modifiers;  // one row per triplet
  TripletSet triplets;
  std::vector<std::vector<std::int8_t>> latents;  // per image row, entries +-1
};

SyntheticData generate_synthetic(const SynthSpec& spec);

// Writes images.afb, modifiers.afb (+ sidecars), triplets.jsonl and, when
// subsets exist, subsets.jsonl into `dir`.
void write_synthetic(const SyntheticData& data, const std::string& dir);

}  // namespace artemis
