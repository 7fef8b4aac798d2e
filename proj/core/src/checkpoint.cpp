// grc/checkpoint.cpp

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "grc/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <fstream>

#include "json.hpp"

#include "grc/error.hpp"

namespace grc {

namespace {

constexpr char kMagic[8] = {'G', 'R', 'C', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint32_t kVersion = 1;

void PutU32(std::string* out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i)
    out->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void PutU64(std::string* out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i)
    out->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t TakeU32(std::istream& in) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    int c = in.get();
    if (c == std::istream::traits_type::eof())
      throw ConfigError("checkpoint truncated");
    v |= static_cast<std::uint32_t>(c & 0xff) << (8 * i);
  }
  return v;
}

std::uint64_t TakeU64(std::istream& in) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    int c = in.get();
    if (c == std::istream::traits_type::eof())
      throw ConfigError("checkpoint truncated");
    v |= static_cast<std::uint64_t>(c & 0xff) << (8 * i);
  }
  return v;
}

}  // namespace

void SaveCheckpoint(const std::string& path, const ModelParams& params,
                    const AttentionSpec& spec, const RunConfig& config) {
  nlohmann::json header;
  header["version"] = kVersion;
  header["dims"] = {{"d_x", params.dims.d_x},     {"d_h", params.dims.d_h},
                    {"d_s", params.dims.d_s},     {"d_e", params.dims.d_e},
                    {"d_k", params.dims.d_k},     {"vocab", params.dims.vocab},
                    {"lookahead", params.dims.lookahead},
                    {"stride", params.dims.stride}};
  header["kind"] = AttentionKindName(spec.kind);
  header["w"] = spec.w;
  header["config"] = nlohmann::json::parse(SerializeRunConfig(config));
  std::string header_text = header.dump();

  Vec64 flat = params.Flatten();
  std::string blob;
  blob.reserve(8 + 4 + header_text.size() + 8 + flat.size() * 8);
  blob.append(kMagic, sizeof(kMagic));
  PutU32(&blob, static_cast<std::uint32_t>(header_text.size()));
  blob.append(header_text);
  PutU64(&blob, static_cast<std::uint64_t>(flat.size()));
  for (std::size_t i = 0; i < flat.size(); ++i)
    PutU64(&blob, std::bit_cast<std::uint64_t>(flat[i]));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open checkpoint for writing: " + path);
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw ConfigError("checkpoint write failed: " + path);
}

Checkpoint LoadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || !std::equal(magic, magic + 8, kMagic))
    throw ConfigError("not a checkpoint file: " + path);

  std::uint32_t header_len = TakeU32(in);
  std::string header_text(header_len, '\0');
  in.read(header_text.data(), header_len);
  if (!in) throw ConfigError("checkpoint truncated");
  nlohmann::json header = nlohmann::json::parse(header_text, nullptr, false);
  if (header.is_discarded() || !header.is_object())
    throw ConfigError("checkpoint header is not valid JSON");
  if (!header.contains("version") ||
      header.at("version").get<std::uint32_t>() != kVersion)
    throw ConfigError("unsupported checkpoint version");

  Checkpoint ck;
  ck.config = ParseRunConfig(header.at("config").dump());
  const nlohmann::json& jd = header.at("dims");
  ModelDims dims;
  dims.d_x = jd.at("d_x").get<std::size_t>();
  dims.d_h = jd.at("d_h").get<std::size_t>();
  dims.d_s = jd.at("d_s").get<std::size_t>();
  dims.d_e = jd.at("d_e").get<std::size_t>();
  dims.d_k = jd.at("d_k").get<std::size_t>();
  dims.vocab = jd.at("vocab").get<std::size_t>();
  dims.lookahead = jd.at("lookahead").get<std::size_t>();
  dims.stride = jd.at("stride").get<std::size_t>();
  dims.Validate();
  ck.spec.kind = AttentionKindFromName(header.at("kind").get<std::string>());
  ck.spec.w = header.at("w").get<std::size_t>();

  std::uint64_t count = TakeU64(in);
  ParamLayout layout = ParamLayout::For(dims);
  if (count != layout.total)
    throw ConfigError("checkpoint parameter count mismatch");
  Vec64 flat(layout.total);
  for (std::size_t i = 0; i < flat.size(); ++i)
    flat[i] = std::bit_cast<double>(TakeU64(in));
  ck.params = ModelParams::FromFlat(dims, flat);
  return ck;
}

}  // namespace grc
