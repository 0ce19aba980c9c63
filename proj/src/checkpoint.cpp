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

#include "artemis/checkpoint.hpp"

#include "artemis/error.hpp"
#include "binary_io.hpp"

namespace artemis {

std::string encode_checkpoint(const HeadParams& params) {
  validate_params(params);
  detail::ByteWriter w;
  w.bytes(kCheckpointMagic);
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(params.dims.text));
  w.u32(static_cast<std::uint32_t>(params.dims.image));
  w.u32(static_cast<std::uint32_t>(params.dims.hidden));
  auto block = [&](const Vec64& v) {
    w.u64(v.size());
    for (double x : v) w.f64(x);
  };
  for_each_block(params, block);
  block(Vec64{params.gamma});
  return w.data();
}

HeadParams decode_checkpoint(std::string_view bytes, const std::string& source) {
  detail::ByteReader r(bytes, source);
  if (r.remaining() < kCheckpointMagic.size() || r.bytes(4) != kCheckpointMagic) {
    throw Error(ErrorCode::kBadMagic, source + ": not an AHP1 checkpoint");
  }
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::kBadMagic, source + ": unsupported version " + std::to_string(version));
  }
  HeadDims dims;
  dims.text = r.u32();
  dims.image = r.u32();
  dims.hidden = r.u32();
  HeadParams p = zero_params(dims);
  auto block = [&](Vec64& v) {
    const std::uint64_t n = r.u64();
    if (n != v.size()) {
      throw Error(ErrorCode::kShapeMismatch, source + ": block holds " + std::to_string(n) +
                                                 " values, dims require " +
                                                 std::to_string(v.size()));
    }
    for (double& x : v) x = r.f64();
  };
  for_each_block(p, block);
  Vec64 gamma(1);
  block(gamma);
  p.gamma = gamma[0];
  if (r.remaining() != 0) {
    throw Error(ErrorCode::kBadMagic, source + ": trailing bytes after gamma");
  }
  validate_params(p);
  return p;
}

void save_checkpoint(const HeadParams& params, const std::string& path) {
  detail::write_file(path, encode_checkpoint(params));
}

HeadParams load_checkpoint(const std::string& path) {
  return decode_checkpoint(detail::read_file(path), path);
}

}  // namespace artemis
