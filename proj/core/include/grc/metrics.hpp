// grc/metrics.hpp

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

#ifndef GRC_METRICS_HPP_
#define GRC_METRICS_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "grc/model.hpp"
#include "grc/rng.hpp"
#include "grc/streaming.hpp"
#include "grc/train.hpp"

namespace grc {

// Standard normal via Box-Muller on the hand-rolled uniform, so streams
// are identical across standard library builds.
double NextGaussian(Rng* rng);

// Utterances are random content-token sequences; each token contributes
// `repeat` one-hot input frames (dimension = vocab) with additive Gaussian
// noise, and the target is the token sequence plus the end id.
struct SyntheticTask {
  std::size_t vocab = 16;
  std::size_t min_len = 2;
  std::size_t max_len = 12;
  std::size_t repeat = 4;
  double noise = 0.1;
};

Example GenExample(const SyntheticTask& task, std::uint64_t id, Rng* rng);

// Examples 0..n-1 with per-example generators mixed from (seed, id), so a
// dataset is reproducible regardless of generation order.
std::vector<Example> MakeDataset(const SyntheticTask& task, std::size_t n,
                                 std::uint64_t seed);

std::size_t EditDistance(const TokenSequence& ref, const TokenSequence& hyp);

// sum(edit distance) / sum(reference length) over aligned pairs.
double TokenErrorRate(std::span<const TokenSequence> refs,
                      std::span<const TokenSequence> hyps);

// Input frames consumed when each token was emitted, derived from per-step
// endpoints: raw consumption is stride * t_end + lookahead capped at the
// input length, then made non-decreasing with a running maximum.
std::vector<std::size_t> ConsumedFrames(
    std::span<const EndpointRecord> endpoints, const ModelDims& dims,
    std::size_t input_frames);

// Average lagging in input frames. g[u] is the non-decreasing consumed
// count when token u+1 was emitted; the average runs up to the first token
// that saw the whole input (or all tokens when none did) and subtracts the
// ideal uniform schedule (u - 1) * |x| / |y|.
double AverageLaggingFrames(std::span<const std::size_t> g,
                            std::size_t input_frames);

}  // namespace grc

#endif  // GRC_METRICS_HPP_
