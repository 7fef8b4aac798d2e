// grc/attention.cpp

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

#include "grc/attention.hpp"

#include <algorithm>
#include <cmath>

namespace grc {

double AdditiveScore(const ScoreParams& p, std::span<const double> s,
                     std::span<const double> h_t, double beta) {
  std::size_t d_in = s.size() + h_t.size() + 1;
  Require(p.w.cols() == d_in, "AdditiveScore: W columns mismatch");
  Require(p.w.rows() == p.v.size() && p.w.rows() == p.eta.size(),
          "AdditiveScore: key dimension mismatch");
  Vec64 cat(d_in);
  std::size_t k = 0;
  for (double x : s) cat[k++] = x;
  for (double x : h_t) cat[k++] = x;
  cat[k] = beta;
  Vec64 act(p.w.rows());
  MatVecInto(p.w, cat.View(), act.MutableView());
  for (std::size_t i = 0; i < act.size(); ++i)
    act[i] = std::tanh(act[i] + p.eta[i]);
  return Dot(p.v.View(), act.View());
}

double FeedbackScale(const ScoreParams& p, std::span<const double> h_t) {
  Require(p.v_beta.size() == h_t.size(),
          "FeedbackScale: feedback vector dimension mismatch");
  return Logistic(Dot(p.v_beta.View(), h_t));
}

void FeedbackState::Accumulate(const Vec64& alpha) {
  Require(alpha.size() == cum.size(),
          "FeedbackState::Accumulate: frame count mismatch");
  for (std::size_t t = 0; t < cum.size(); ++t) cum[t] += alpha[t];
}

double FeedbackState::Beta(const ScoreParams& p, std::span<const double> h_t,
                           std::size_t t) const {
  Require(t < cum.size(), "FeedbackState::Beta: frame index out of range");
  return FeedbackScale(p, h_t) * cum[t];
}

Vec64 SoftmaxWeights(const ScoreRow& row) {
  Require(!row.e.empty(), "SoftmaxWeights: empty score row");
  Vec64 eff = row.Effective();
  return StableSoftmax(eff.View());
}

Vec64 GsaContext(const Vec64& alpha, const Mat64& h) {
  Require(alpha.size() == h.rows(), "GsaContext: weight count mismatch");
  Require(!alpha.empty(), "GsaContext: empty input");
  Vec64 c(h.cols());
  for (std::size_t t = 0; t < h.rows(); ++t) {
    double w = alpha[t];
    std::span<const double> row = h.Row(t);
    for (std::size_t i = 0; i < h.cols(); ++i) c[i] += w * row[i];
  }
  return c;
}

double GrcGate(double e) { return Logistic(-e); }

Vec64 GrcGates(const ScoreRow& row) {
  Require(!row.e.empty(), "GrcGates: empty score row");
  Vec64 z(row.e.size());
  z[0] = 1.0;
  for (std::size_t t = 1; t < z.size(); ++t) z[t] = GrcGate(row.e[t] + row.bias);
  return z;
}

Vec64 DecGrcGates(const ScoreRow& row) {
  Require(!row.e.empty(), "DecGrcGates: empty score row");
  Vec64 z(row.e.size());
  z[0] = 1.0;
  RunningLogSumExp lse;
  lse.Insert(row.e[0] + row.bias);
  for (std::size_t t = 1; t < z.size(); ++t) {
    lse.Insert(row.e[t] + row.bias);
    z[t] = std::exp(-Softplus(lse.Value()));
  }
  return z;
}

namespace {
void RequireGateRow(const Mat64& h, const Vec64& z, const char* what) {
  Require(!z.empty(), std::string(what) + ": empty gate row");
  Require(z.size() == h.rows(), std::string(what) + ": frame count mismatch");
  Require(z[0] == 1.0, std::string(what) + ": first gate must be 1");
}
}  // namespace

ContextTrace GrcRecurse(const Mat64& h, const Vec64& z) {
  RequireGateRow(h, z, "GrcRecurse");
  ContextTrace out;
  out.d = Mat64(h.rows(), h.cols());
  std::span<const double> h0 = h.Row(0);
  std::span<double> d0 = out.d.MutableRow(0);
  for (std::size_t i = 0; i < h.cols(); ++i) d0[i] = h0[i];
  for (std::size_t t = 1; t < h.rows(); ++t) {
    double zt = z[t];
    std::span<const double> prev = out.d.Row(t - 1);
    std::span<const double> ht = h.Row(t);
    std::span<double> dt = out.d.MutableRow(t);
    for (std::size_t i = 0; i < h.cols(); ++i)
      dt[i] = (1.0 - zt) * prev[i] + zt * ht[i];
  }
  return out;
}

Vec64 GrcContext(const Mat64& h, const Vec64& z) {
  RequireGateRow(h, z, "GrcContext");
  Vec64 d = h.RowVec(0);
  for (std::size_t t = 1; t < h.rows(); ++t) {
    double zt = z[t];
    std::span<const double> ht = h.Row(t);
    for (std::size_t i = 0; i < d.size(); ++i)
      d[i] = (1.0 - zt) * d[i] + zt * ht[i];
  }
  return d;
}

Vec64 DualWeights(const Vec64& z) {
  Require(!z.empty(), "DualWeights: empty gate row");
  Require(z[0] == 1.0, "DualWeights: first gate must be 1");
  Vec64 alpha(z.size());
  double suffix = 1.0;  // prod_{j>t} (1 - z_j)
  for (std::size_t t = z.size(); t-- > 0;) {
    alpha[t] = z[t] * suffix;
    suffix *= (1.0 - z[t]);
  }
  return alpha;
}

Vec64 InverseDual(const Vec64& alpha) {
  Require(!alpha.empty(), "InverseDual: empty weight row");
  Vec64 z(alpha.size());
  double suffix_sum = 0.0;  // sum_{j>t} alpha_j
  for (std::size_t t = alpha.size(); t-- > 0;) {
    double denom = 1.0 - suffix_sum;
    if (denom < 1e-12) {
      z[t] = 0.0;
    } else {
      z[t] = std::min(1.0, std::max(0.0, alpha[t] / denom));
    }
    suffix_sum += alpha[t];
  }
  z[0] = 1.0;
  return z;
}

Vec64 IntermediateContext(const Mat64& h, const Vec64& z, std::size_t tau) {
  RequireGateRow(h, z, "IntermediateContext");
  Require(tau >= 1 && tau <= h.rows(),
          "IntermediateContext: tau out of range");
  Vec64 d = h.RowVec(0);
  for (std::size_t t = 1; t < tau; ++t) {
    double zt = z[t];
    std::span<const double> ht = h.Row(t);
    for (std::size_t i = 0; i < d.size(); ++i)
      d[i] = (1.0 - zt) * d[i] + zt * ht[i];
  }
  return d;
}

Vec64 PaddedPrefixDual(const Vec64& z_prefix, std::size_t frames) {
  Require(!z_prefix.empty(), "PaddedPrefixDual: empty gate prefix");
  Require(z_prefix.size() <= frames,
          "PaddedPrefixDual: prefix longer than frame count");
  Vec64 alpha = DualWeights(z_prefix);
  Vec64 out(frames);
  for (std::size_t t = 0; t < alpha.size(); ++t) out[t] = alpha[t];
  return out;
}

}  // namespace grc
