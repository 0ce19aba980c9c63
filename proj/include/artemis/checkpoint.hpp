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

#include <string>
#include <string_view>

#include "artemis/head.hpp"

namespace artemis {

inline constexpr std::string_view kCheckpointMagic = "AHP1";
inline constexpr std::uint32_t kCheckpointVersion = 1;

// Layout (all integers and floats little-endian):
//   "AHP1" | u32 version | u32 H_T | u32 H_I | u32 H_hidden |
//   11 blocks of { u64 count | count x f64 } in the order
//   attn_is.w1 b1 w2 b2, attn_em.w1 b1 w2 b2, proj.w b, gamma.
// Weight matrices are row-major with rows = fan-in.
std::string encode_checkpoint(const HeadParams& params);
HeadParams decode_checkpoint(std::string_view bytes, const std::string& source = "checkpoint");

void save_checkpoint(const HeadParams& params, const std::string& path);
HeadParams load_checkpoint(const std::string& path);

}  // namespace artemis
