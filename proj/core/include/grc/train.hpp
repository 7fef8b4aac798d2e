// grc/train.hpp

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
//
// Minibatch training of the encoder-decoder with per-example reverse-mode
// gradients. Worker threads only parallelize independent per-example
// passes; gradients are reduced in example order afterwards, so the update
// is bitwise independent of the thread count.

#ifndef GRC_TRAIN_HPP_
#define GRC_TRAIN_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "grc/model.hpp"
#include "grc/rng.hpp"

namespace grc {

struct Example {
  std::uint64_t id = 0;
  Mat64 x;
  TokenSequence y;  // ends with the end-of-sequence id
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class AdamOptimizer {
 public:
  AdamOptimizer(std::size_t n, const AdamConfig& cfg);
  void Step(std::span<const double> grad, std::span<double> params);

 private:
  AdamConfig cfg_;
  Vec64 m_;
  Vec64 v_;
  std::size_t t_ = 0;
};

struct BatchResult {
  double nll = 0.0;          // summed over all tokens in the batch
  std::size_t tokens = 0;
  Vec64 grad;                // d(nll / tokens) / d(flat params)
};

// Loss and gradient of the token-mean cross entropy over a batch. Throws
// DivergenceError when the loss or a gradient stops being finite.
BatchResult BatchGradient(const ModelParams& params, const AttentionSpec& spec,
                          std::span<const Example> batch, std::size_t threads);

struct TrainConfig {
  std::size_t batch = 8;
  std::size_t threads = 1;
  AdamConfig adam;
};

// One pass over `data` in a freshly shuffled order, updating `params` and
// `opt` per batch. Returns the mean per-token cross entropy measured at the
// pre-update parameters of each batch.
double TrainEpoch(ModelParams* params, AdamOptimizer* opt,
                  const AttentionSpec& spec, std::span<const Example> data,
                  const TrainConfig& cfg, Rng* shuffle_rng);

}  // namespace grc

#endif  // GRC_TRAIN_HPP_
