// grc/baselines.cpp

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

#include "grc/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace grc {

std::size_t WindowStart(const Vec64& alpha_prev) {
  Require(!alpha_prev.empty(), "WindowStart: empty weight row");
  std::size_t best = 0;
  for (std::size_t t = 1; t < alpha_prev.size(); ++t) {
    if (alpha_prev[t] > alpha_prev[best]) best = t;
  }
  return best;
}

WindowedResult WindowedAttend(const ScoreRow& row, const Mat64& h,
                              std::size_t p, std::size_t w) {
  std::size_t frames = h.rows();
  Require(frames > 0, "WindowedAttend: empty encoded sequence");
  Require(w >= 1, "WindowedAttend: window must hold at least one frame");
  Require(p < frames, "WindowedAttend: window start out of range");
  std::size_t end = std::min(p + w - 1, frames - 1);
  std::size_t len = end - p + 1;
  Require(row.e.size() == len,
          "WindowedAttend: score row must cover the clamped window");

  Vec64 eff = row.Effective();
  Vec64 local = StableSoftmax(eff.View());
  WindowedResult out;
  out.start = p;
  out.end = end;
  out.weights = Vec64(frames);
  out.context = Vec64(h.cols());
  for (std::size_t k = 0; k < len; ++k) {
    out.weights[p + k] = local[k];
    std::span<const double> ht = h.Row(p + k);
    for (std::size_t i = 0; i < h.cols(); ++i)
      out.context[i] += local[k] * ht[i];
  }
  return out;
}

MochaInferResult MochaInfer(const ScoreRow& e_mono, const ScoreRow& e_chunk,
                            const Mat64& h, MonotonicState* state,
                            std::size_t w) {
  Require(state != nullptr, "MochaInfer: null state");
  std::size_t frames = h.rows();
  Require(frames > 0, "MochaInfer: empty encoded sequence");
  Require(w >= 1, "MochaInfer: chunk must hold at least one frame");
  Require(e_mono.e.size() == frames && e_chunk.e.size() == frames,
          "MochaInfer: score rows must cover all frames");
  Require(state->tau_prev < frames, "MochaInfer: scan start out of range");

  MochaInferResult out;
  out.weights = Vec64(frames);
  out.context = Vec64(h.cols());
  state->p = Vec64(frames);
  state->alpha_sel = Vec64(frames);

  std::size_t tau = frames - 1;
  bool selected = false;
  for (std::size_t t = state->tau_prev; t < frames; ++t) {
    double pt = Logistic(e_mono.e[t] + e_mono.bias);
    state->p[t] = pt;
    if (pt >= 0.5) {
      tau = t;
      selected = true;
      break;
    }
  }

  out.selected = selected;
  out.tau = tau;
  if (selected) {
    std::size_t start = (tau + 1 >= w) ? tau + 1 - w : 0;
    std::size_t len = tau - start + 1;
    Vec64 scores(len);
    for (std::size_t k = 0; k < len; ++k)
      scores[k] = e_chunk.e[start + k] + e_chunk.bias;
    Vec64 local = StableSoftmax(scores.View());
    for (std::size_t k = 0; k < len; ++k) {
      out.weights[start + k] = local[k];
      std::span<const double> ht = h.Row(start + k);
      for (std::size_t i = 0; i < h.cols(); ++i)
        out.context[i] += local[k] * ht[i];
    }
    state->alpha_sel[tau] = 1.0;
  }
  state->tau_prev = tau;
  return out;
}

Vec64 MochaTrainAlpha(const Vec64& p, const Vec64& alpha_prev) {
  Require(!p.empty(), "MochaTrainAlpha: empty probability row");
  Require(p.size() == alpha_prev.size(),
          "MochaTrainAlpha: row length mismatch");
  const double kLo = 1e-6;
  const double kHi = 1.0 - 1e-6;
  Vec64 pc(p.size());
  for (std::size_t t = 0; t < p.size(); ++t)
    pc[t] = std::min(kHi, std::max(kLo, p[t]));
  Vec64 alpha(p.size());
  double carry = 0.0;  // (1 - p_{t-1}) alpha_{t-1} / p_{t-1}
  for (std::size_t t = 0; t < p.size(); ++t) {
    alpha[t] = pc[t] * (carry + alpha_prev[t]);
    carry = (1.0 - pc[t]) * alpha[t] / pc[t];
  }
  return alpha;
}

Vec64 MochaTrainBeta(const Vec64& alpha, const ScoreRow& e_chunk,
                     std::size_t w) {
  std::size_t frames = alpha.size();
  Require(frames > 0, "MochaTrainBeta: empty weight row");
  Require(e_chunk.e.size() == frames,
          "MochaTrainBeta: score row length mismatch");
  Require(w >= 1, "MochaTrainBeta: chunk must hold at least one frame");
  Vec64 beta(frames);
  Vec64 scores(frames);
  for (std::size_t t = 0; t < frames; ++t)
    scores[t] = e_chunk.e[t] + e_chunk.bias;
  for (std::size_t k = 0; k < frames; ++k) {
    if (alpha[k] == 0.0) continue;
    std::size_t start = (k + 1 >= w) ? k + 1 - w : 0;
    std::size_t len = k - start + 1;
    Vec64 local = StableSoftmax(scores.View().subspan(start, len));
    for (std::size_t t = 0; t < len; ++t)
      beta[start + t] += alpha[k] * local[t];
  }
  return beta;
}

Vec64 SmochaAlpha(const Vec64& p) {
  Require(!p.empty(), "SmochaAlpha: empty probability row");
  Vec64 alpha(p.size());
  double survive = 1.0;  // prod_{j<t} (1 - p_j)
  for (std::size_t t = 0; t < p.size(); ++t) {
    alpha[t] = p[t] * survive;
    survive *= (1.0 - p[t]);
  }
  return alpha;
}

}  // namespace grc
