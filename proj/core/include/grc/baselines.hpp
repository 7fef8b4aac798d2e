// grc/baselines.hpp

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
// Online attention baselines: fixed-window attention around the previous
// step's peak, monotonic chunkwise attention (hard scan at inference,
// expected weights for training), and the stable product-form variant used
// as a cross-check oracle.

#ifndef GRC_BASELINES_HPP_
#define GRC_BASELINES_HPP_

#include <cstddef>

#include "grc/attention.hpp"
#include "grc/numerics.hpp"

namespace grc {

// Argmax of the previous step's attention weights, smallest index on ties.
// The first decoder step has no previous weights; callers start at frame 0.
std::size_t WindowStart(const Vec64& alpha_prev);

struct WindowedResult {
  Vec64 context;
  Vec64 weights;  // padded to the full frame count
  std::size_t start = 0;  // inclusive, 0-based
  std::size_t end = 0;    // inclusive, 0-based
};

// Softmax attention restricted to the w frames starting at p (clamped to
// the sequence). `row` holds scores for exactly that clamped window.
WindowedResult WindowedAttend(const ScoreRow& row, const Mat64& h,
                              std::size_t p, std::size_t w);

// Monotonic-attention scan state carried across decoder steps.
struct MonotonicState {
  std::size_t tau_prev = 0;  // 0-based; scan for the next step starts here
  Vec64 p;                   // stopping probabilities, as far as computed
  Vec64 alpha_sel;           // selection weights (hard or expected)
};

struct MochaInferResult {
  Vec64 context;
  Vec64 weights;  // chunk softmax weights padded to the frame count
  bool selected = false;
  std::size_t tau = 0;  // 0-based endpoint
};

// Hard inference scan: from state.tau_prev, the first frame whose stopping
// probability logistic(e_mono[t] + bias) reaches 0.5 becomes the endpoint;
// the context is a softmax over the w-frame chunk ending there. If no frame
// qualifies the context is zero and the endpoint pins to the last frame.
// Updates state in place (tau_prev, p, alpha_sel).
MochaInferResult MochaInfer(const ScoreRow& e_mono, const ScoreRow& e_chunk,
                            const Mat64& h, MonotonicState* state,
                            std::size_t w);

// Expected selection weights for training:
// alpha_t = p_t ((1 - p_{t-1}) alpha_{t-1} / p_{t-1} + alpha_prev_t),
// with the stopping probabilities clamped to [1e-6, 1 - 1e-6] before the
// division. alpha_prev is the previous decoder step's row; the first step
// uses the one-hot prior at frame 0.
Vec64 MochaTrainAlpha(const Vec64& p, const Vec64& alpha_prev);

// Expected chunk weights: beta_t = sum_{k=t}^{t+w-1} alpha_k *
// exp(e_t) / sum_{l=k-w+1}^{k} exp(e_l), with every window clipped to the
// sequence so the total mass of alpha is conserved exactly.
Vec64 MochaTrainBeta(const Vec64& alpha, const ScoreRow& e_chunk,
                     std::size_t w);

// Product-form selection weights: alpha_t = p_t prod_{j<t} (1 - p_j).
// Mass may escape past the last frame; the remainder is the survivor
// probability.
Vec64 SmochaAlpha(const Vec64& p);

}  // namespace grc

#endif  // GRC_BASELINES_HPP_
