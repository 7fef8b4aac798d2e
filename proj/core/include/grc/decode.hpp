// grc/decode.hpp

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

#ifndef GRC_DECODE_HPP_
#define GRC_DECODE_HPP_

#include <utility>

#include "grc/model.hpp"
#include "grc/streaming.hpp"

namespace grc {

// Highest-scoring token over ids >= 1, as (token, log probability). Ties
// resolve to the smallest id. The start id is never hypothesized.
std::pair<int, double> GreedyPick(const Vec64& probs);

struct DecodeOptions {
  std::size_t beam = 1;
  std::size_t max_len = 64;
};

struct DecodeResult {
  TokenSequence tokens;  // content tokens; the end id is consumed, not kept
  std::vector<EndpointRecord> endpoints;  // one per decoder step
  double logp = 0.0;
  bool truncated = false;
};

// Offline decoding over fully encoded input. beam == 1 is a plain greedy
// loop; larger beams keep the `beam` best prefixes, breaking score ties
// toward the lexicographically smaller token sequence.
DecodeResult Decode(const ModelParams& params, const AttentionSpec& spec,
                    const Mat64& h, const DecodeOptions& opts);

}  // namespace grc

#endif  // GRC_DECODE_HPP_
