// grc/attention.hpp

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
// Softmax-free attention primitives. Time indices are 1-based in the math
// and 0-based in code; a "gate sequence" z always has z[0] == 1 so the
// recursion seeds on the first frame.

#ifndef GRC_ATTENTION_HPP_
#define GRC_ATTENTION_HPP_

#include <cstddef>

#include "grc/numerics.hpp"

namespace grc {

// One decoder step's raw attention scores plus the shared trainable bias.
// Effective scores are e[t] + bias.
struct ScoreRow {
  Vec64 e;
  double bias = 0.0;

  Vec64 Effective() const {
    Vec64 out(e.size());
    for (std::size_t t = 0; t < e.size(); ++t) out[t] = e[t] + bias;
    return out;
  }
};

// Additive score function parameters: e = v' tanh(W [s; h; beta] + eta).
// v_beta scales the accumulated-weight feedback; bias is added by the
// gate-producing attention kinds.
struct ScoreParams {
  Vec64 v;       // d_k
  Mat64 w;       // d_k x (d_s + d_h + 1)
  Vec64 eta;     // d_k
  Vec64 v_beta;  // d_h
  double bias = 0.0;
};

double AdditiveScore(const ScoreParams& p, std::span<const double> s,
                     std::span<const double> h_t, double beta);

// logistic(v_beta . h_t); multiplies the accumulated weight column.
double FeedbackScale(const ScoreParams& p, std::span<const double> h_t);

// Accumulated attention weights of completed decoder steps, one entry per
// frame. Entries are non-negative and grow by at most one simplex per step.
struct FeedbackState {
  Vec64 cum;

  explicit FeedbackState(std::size_t frames) : cum(frames) {}
  void Accumulate(const Vec64& alpha);
  double Beta(const ScoreParams& p, std::span<const double> h_t,
              std::size_t t) const;
};

// Softmax attention weights over the effective scores.
Vec64 SoftmaxWeights(const ScoreRow& row);

// c = sum_t alpha[t] h_t.
Vec64 GsaContext(const Vec64& alpha, const Mat64& h);

// Update gate z = 1 / (1 + exp(e)): the sign-flipped logistic, kept exactly
// as the recurrence defines it. Large positive scores close the gate.
double GrcGate(double e);

// Gate row for one decoder step: z[0] = 1, z[t] = GrcGate(e[t] + bias).
Vec64 GrcGates(const ScoreRow& row);

// Gate row with the cumulative-score law: z[t] = 1 / (1 + sum_{j<=t}
// exp(e[j] + bias)) for t >= 1, z[0] = 1. The first score participates in
// the cumulative sum even though z[0] is pinned. Evaluated through a
// running log-sum-exp as exp(-softplus(L_t)), so scores up to +-700 are
// safe, and the row is monotonically non-increasing from t = 1 on.
Vec64 DecGrcGates(const ScoreRow& row);

// Full recurrent-context trace: d_1 = h_1, d_t = (1 - z_t) d_{t-1} +
// z_t h_t. Row t of `d` is d_{t+1}; the last row is the context.
struct ContextTrace {
  Mat64 d;

  Vec64 Final() const { return d.RowVec(d.rows() - 1); }
};

ContextTrace GrcRecurse(const Mat64& h, const Vec64& z);

// Final context only, without storing the trace.
Vec64 GrcContext(const Mat64& h, const Vec64& z);

// Induced attention weights of a gate row: alpha[t] = z_t prod_{j>t}
// (1 - z_j), computed with a backward suffix-product scan. Sums to 1.
Vec64 DualWeights(const Vec64& z);

// Inverse map from simplex weights to gates: z_t = alpha_t / (1 -
// sum_{j>t} alpha_j), with z_t = 0 when the denominator falls below 1e-12
// and z[0] forced to 1.
Vec64 InverseDual(const Vec64& alpha);

// d_{tau} for 1 <= tau <= T via the truncated recursion. Equals the
// weighted average of h_1..h_tau under PaddedPrefixDual(z[0..tau), T).
Vec64 IntermediateContext(const Mat64& h, const Vec64& z, std::size_t tau);

// Dual weights of a gate prefix, zero-padded to `frames` entries. This is
// what a finished streaming step contributes to the weight feedback.
Vec64 PaddedPrefixDual(const Vec64& z_prefix, std::size_t frames);

}  // namespace grc

#endif  // GRC_ATTENTION_HPP_
