// grc/metrics.cpp

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

#include "grc/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "grc/error.hpp"

namespace grc {

double NextGaussian(Rng* rng) {
  constexpr double kPi = 3.14159265358979323846;
  double u1 = 1.0 - rng->Uniform();  // (0, 1], keeps the log finite
  double u2 = rng->Uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

Example GenExample(const SyntheticTask& task, std::uint64_t id, Rng* rng) {
  Require(rng != nullptr, "GenExample: null generator");
  Require(task.vocab >= 3, "GenExample: vocabulary has no content ids");
  Require(task.min_len >= 1 && task.min_len <= task.max_len,
          "GenExample: bad length range");
  Require(task.repeat >= 1, "GenExample: repeat must be positive");
  Require(task.noise >= 0.0, "GenExample: negative noise");

  std::size_t len = static_cast<std::size_t>(rng->UniformInt(
      static_cast<int>(task.min_len), static_cast<int>(task.max_len)));
  Example ex;
  ex.id = id;
  ex.y.reserve(len + 1);
  for (std::size_t u = 0; u < len; ++u)
    ex.y.push_back(rng->UniformInt(2, static_cast<int>(task.vocab) - 1));
  ex.x = Mat64(len * task.repeat, task.vocab);
  for (std::size_t u = 0; u < len; ++u) {
    for (std::size_t r = 0; r < task.repeat; ++r) {
      std::span<double> row = ex.x.MutableRow(u * task.repeat + r);
      for (std::size_t c = 0; c < task.vocab; ++c) {
        double hot = (static_cast<int>(c) == ex.y[u]) ? 1.0 : 0.0;
        row[c] = hot + task.noise * NextGaussian(rng);
      }
    }
  }
  ex.y.push_back(kEosId);
  return ex;
}

std::vector<Example> MakeDataset(const SyntheticTask& task, std::size_t n,
                                 std::uint64_t seed) {
  std::vector<Example> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(MixSeed(seed, i));
    out.push_back(GenExample(task, i, &rng));
  }
  return out;
}

std::size_t EditDistance(const TokenSequence& ref, const TokenSequence& hyp) {
  std::vector<std::size_t> prev(hyp.size() + 1);
  std::vector<std::size_t> cur(hyp.size() + 1);
  for (std::size_t j = 0; j <= hyp.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= ref.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= hyp.size(); ++j) {
      std::size_t sub = prev[j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[hyp.size()];
}

double TokenErrorRate(std::span<const TokenSequence> refs,
                      std::span<const TokenSequence> hyps) {
  Require(refs.size() == hyps.size(), "TokenErrorRate: pair count mismatch");
  Require(!refs.empty(), "TokenErrorRate: no pairs");
  std::size_t errors = 0;
  std::size_t total = 0;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    errors += EditDistance(refs[i], hyps[i]);
    total += refs[i].size();
  }
  Require(total >= 1, "TokenErrorRate: empty references");
  return static_cast<double>(errors) / static_cast<double>(total);
}

std::vector<std::size_t> ConsumedFrames(
    std::span<const EndpointRecord> endpoints, const ModelDims& dims,
    std::size_t input_frames) {
  std::vector<std::size_t> g;
  g.reserve(endpoints.size());
  std::size_t high = 0;
  for (const EndpointRecord& r : endpoints) {
    std::size_t raw = r.t_end * dims.stride + dims.lookahead;
    high = std::max(high, std::min(raw, input_frames));
    g.push_back(high);
  }
  return g;
}

double AverageLaggingFrames(std::span<const std::size_t> g,
                            std::size_t input_frames) {
  Require(!g.empty(), "AverageLaggingFrames: no emissions");
  Require(input_frames >= 1, "AverageLaggingFrames: no input frames");
  for (std::size_t u = 0; u < g.size(); ++u) {
    Require(g[u] <= input_frames,
            "AverageLaggingFrames: consumption exceeds the input");
    Require(u == 0 || g[u - 1] <= g[u],
            "AverageLaggingFrames: consumption must be non-decreasing");
  }
  std::size_t tau = g.size();
  for (std::size_t u = 0; u < g.size(); ++u) {
    if (g[u] == input_frames) {
      tau = u + 1;
      break;
    }
  }
  double ideal = static_cast<double>(input_frames) /
                 static_cast<double>(g.size());
  double sum = 0.0;
  for (std::size_t u = 1; u <= tau; ++u)
    sum += static_cast<double>(g[u - 1]) -
           static_cast<double>(u - 1) * ideal;
  return sum / static_cast<double>(tau);
}

}  // namespace grc
