/*
 * Copyright 2026 The pcnfish Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <bit>
#include <cstdint>
#include <fstream>
#include <iterator>

#include "pcnfish/error.hpp"
#include "pcnfish/pcn/trainer.hpp"

namespace pcnfish::pcn {
namespace {

constexpr std::uint32_t kCheckpointVersion = 1;

void put_le(std::vector<unsigned char>& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

std::uint64_t get_le(const unsigned char* p, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

}  // namespace

std::vector<unsigned char> encode_checkpoint(const Network& net) {
  const auto params = net.flat_parameters();
  std::vector<unsigned char> out{'P', 'C', 'N', 'W'};
  put_le(out, kCheckpointVersion, 4);
  put_le(out, params.size(), 4);
  for (double v : params) put_le(out, std::bit_cast<std::uint64_t>(v), 8);
  const std::string trailer = net.config().to_json();
  out.insert(out.end(), trailer.begin(), trailer.end());
  return out;
}

Network decode_checkpoint(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 12 || bytes[0] != 'P' || bytes[1] != 'C' || bytes[2] != 'N' ||
      bytes[3] != 'W')
    fail(ErrorCode::kFormat, "checkpoint: bad magic");
  const auto version = get_le(&bytes[4], 4);
  if (version != kCheckpointVersion)
    fail(ErrorCode::kFormat, "checkpoint: unsupported version " + std::to_string(version));
  const auto count = get_le(&bytes[8], 4);
  if (bytes.size() < 12 + 8 * count) fail(ErrorCode::kFormat, "checkpoint: truncated");
  const std::string trailer(bytes.begin() + 12 + 8 * count, bytes.end());
  Network net(NetConfig::from_json(trailer));
  if (net.parameter_count() != count)
    fail(ErrorCode::kFormat, "checkpoint: parameter count does not match its config");
  std::vector<double> params(count);
  for (std::size_t i = 0; i < count; ++i)
    params[i] = std::bit_cast<double>(get_le(&bytes[12 + 8 * i], 8));
  net.set_flat_parameters(params);
  return net;
}

void save_checkpoint(const Network& net, const std::string& path) {
  const auto bytes = encode_checkpoint(net);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::kIo, "write failed for '" + path + "'");
}

Network load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open '" + path + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace pcnfish::pcn
