// grc/model_diff.cpp

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

#include "grc/model_diff.hpp"

#include <algorithm>

namespace grc {

namespace {

Value SliceBlock(Tape& tape, Value flat, const ParamLayout& layout,
                 const std::string& name) {
  const ParamLayout::Block& b = layout.Find(name);
  return tape.Slice(flat, b.off, b.rows, b.cols);
}

TapeScoreParams BindScore(Tape& tape, Value flat, const ParamLayout& layout,
                          const std::string& prefix) {
  TapeScoreParams sp;
  sp.v = SliceBlock(tape, flat, layout, prefix + "_v");
  sp.w = SliceBlock(tape, flat, layout, prefix + "_w");
  sp.eta = SliceBlock(tape, flat, layout, prefix + "_eta");
  sp.v_beta = SliceBlock(tape, flat, layout, prefix + "_vb");
  sp.bias = SliceBlock(tape, flat, layout, prefix + "_b");
  return sp;
}

}  // namespace

TapeModel BindModel(Tape& tape, Value flat, const ModelDims& dims) {
  ParamLayout layout = ParamLayout::For(dims);
  Require(tape.DimsOf(flat).first * tape.DimsOf(flat).second == layout.total,
          "BindModel: flat leaf size mismatch");
  TapeModel m;
  m.dims = dims;
  m.flat = flat;
  m.enc_w_in = SliceBlock(tape, flat, layout, "enc_w_in");
  m.enc_w_rec = SliceBlock(tape, flat, layout, "enc_w_rec");
  m.enc_b = SliceBlock(tape, flat, layout, "enc_b");
  m.dec_w_in = SliceBlock(tape, flat, layout, "dec_w_in");
  m.dec_w_rec = SliceBlock(tape, flat, layout, "dec_w_rec");
  m.dec_b = SliceBlock(tape, flat, layout, "dec_b");
  m.embed = SliceBlock(tape, flat, layout, "embed");
  m.score = BindScore(tape, flat, layout, "score");
  m.mono_score = BindScore(tape, flat, layout, "mono");
  m.out_w = SliceBlock(tape, flat, layout, "out_w");
  m.out_b = SliceBlock(tape, flat, layout, "out_b");
  return m;
}

std::vector<Value> EncodeOnTape(Tape& tape, const TapeModel& m,
                                const Mat64& x) {
  const ModelDims& d = m.dims;
  Require(x.cols() == d.d_x, "EncodeOnTape: frame dimension mismatch");
  Require(x.rows() >= 1, "EncodeOnTape: empty input");
  std::size_t t_in = x.rows();
  std::size_t t_out = (t_in + d.stride - 1) / d.stride;
  std::vector<Value> h;
  h.reserve(t_out);

  Value state = tape.Zeros(d.d_h);
  Vec64 cat(d.d_x * (d.lookahead + 1));
  for (std::size_t i = 0; i < t_in; ++i) {
    for (std::size_t k = 0; k <= d.lookahead; ++k) {
      std::size_t src = i + k;
      for (std::size_t c = 0; c < d.d_x; ++c)
        cat[k * d.d_x + c] = (src < t_in) ? x.At(src, c) : 0.0;
    }
    Value from_in = tape.MatVec(m.enc_w_in, tape.Input(cat));
    Value from_rec = tape.MatVec(m.enc_w_rec, state);
    state = tape.Tanh(tape.Add(tape.Add(from_in, from_rec), m.enc_b));
    bool last = (i + 1 == t_in);
    if ((i + 1) % d.stride == 0 || last) {
      if (h.size() < t_out) h.push_back(state);
    }
  }
  Require(h.size() == t_out, "EncodeOnTape: subsample bookkeeping failed");
  return h;
}

namespace {

// e = v' tanh(W [s; h; beta] + eta), same association order as the plain
// score.
Value ScoreOnTape(Tape& tape, const TapeScoreParams& sp, Value s_u, Value h_t,
                  Value beta) {
  Value parts[] = {s_u, h_t, beta};
  Value cat = tape.Concat(parts);
  Value act = tape.MatVec(sp.w, cat);
  Value th = tape.Tanh(tape.Add(act, sp.eta));
  return tape.Dot(sp.v, th);
}

// beta_t = logistic(v_beta . h_t) * cum[t].
Value BetaOnTape(Tape& tape, const TapeScoreParams& sp, Value h_t, Value fb,
                 std::size_t t) {
  Value fs = tape.Logistic(tape.Dot(sp.v_beta, h_t));
  return tape.Mul(fs, tape.Pick(fb, t));
}

// Scores over the full frame range, as a T x 1 value of raw (unbiased)
// energies.
Value FullScoresOnTape(Tape& tape, const TapeScoreParams& sp,
                       std::span<const Value> h, Value s_u, Value fb) {
  std::vector<Value> es;
  es.reserve(h.size());
  for (std::size_t t = 0; t < h.size(); ++t)
    es.push_back(
        ScoreOnTape(tape, sp, s_u, h[t], BetaOnTape(tape, sp, h[t], fb, t)));
  return tape.Concat(es);
}

// e[t] + bias with the 1x1 bias broadcast across all rows.
Value AddBias(Tape& tape, Value e, Value bias) {
  std::size_t n = tape.DimsOf(e).first;
  std::vector<Value> copies(n, bias);
  return tape.Add(e, tape.Concat(copies));
}

// Gate row [1, logistic(-(e[1] + bias)), ...].
Value GrcGatesOnTape(Tape& tape, Value e, Value bias) {
  std::size_t n = tape.DimsOf(e).first;
  Value eff = AddBias(tape, e, bias);
  std::vector<Value> parts;
  parts.push_back(tape.Scalar(1.0));
  if (n > 1) {
    Value rest = tape.Slice(eff, 1, n - 1, 1);
    parts.push_back(tape.Logistic(tape.ScaleShift(rest, -1.0, 0.0)));
  }
  return tape.Concat(parts);
}

// Gate row [1, exp(-softplus(L_1)), ...] with L_t the prefix log-sum-exp of
// the biased scores; the first score enters the sum although its gate is
// pinned to 1.
Value DecGrcGatesOnTape(Tape& tape, Value e, Value bias) {
  std::size_t n = tape.DimsOf(e).first;
  Value eff = AddBias(tape, e, bias);
  Value lse = tape.CumLogSumExp(eff);
  std::vector<Value> parts;
  parts.push_back(tape.Scalar(1.0));
  if (n > 1)
    parts.push_back(tape.GateFromLogSum(tape.Slice(lse, 1, n - 1, 1)));
  return tape.Concat(parts);
}

// d_1 = h_1, d_t = (1 - z_t) d_{t-1} + z_t h_t; returns d_T.
Value GrcContextOnTape(Tape& tape, std::span<const Value> h, Value z) {
  Value one = tape.Scalar(1.0);
  Value d = h[0];
  for (std::size_t t = 1; t < h.size(); ++t) {
    Value zt = tape.Pick(z, t);
    d = tape.Add(tape.ScalarMul(tape.Sub(one, zt), d),
                 tape.ScalarMul(zt, h[t]));
  }
  return d;
}

// alpha[t] = z_t prod_{j>t} (1 - z_j), backward suffix-product scan.
Value DualWeightsOnTape(Tape& tape, Value z) {
  std::size_t n = tape.DimsOf(z).first;
  Value one = tape.Scalar(1.0);
  Value suffix = one;
  std::vector<Value> alpha(n);
  for (std::size_t t = n; t-- > 0;) {
    Value zt = tape.Pick(z, t);
    alpha[t] = tape.Mul(zt, suffix);
    suffix = tape.Mul(suffix, tape.Sub(one, zt));
  }
  return tape.Concat(alpha);
}

// Zero-padded scatter of `inner` (length `len`) into a vector of length
// `frames` starting at `start`.
Value PadScatter(Tape& tape, Value inner, std::size_t start, std::size_t len,
                 std::size_t frames) {
  std::vector<Value> parts;
  if (start > 0) parts.push_back(tape.Zeros(start));
  parts.push_back(inner);
  if (start + len < frames) parts.push_back(tape.Zeros(frames - start - len));
  return tape.Concat(parts);
}

// Expected selection probabilities p_t = clamp(logistic(e + bias)) pushed
// through alpha[t] = p_t (carry + alpha_prev[t]), carry = (1 - p_t)
// alpha[t] / p_t.
Value MochaTrainAlphaOnTape(Tape& tape, Value p_clamped, Value alpha_prev) {
  std::size_t n = tape.DimsOf(p_clamped).first;
  Value one = tape.Scalar(1.0);
  Value carry = tape.Scalar(0.0);
  std::vector<Value> alpha(n);
  for (std::size_t t = 0; t < n; ++t) {
    Value pt = tape.Pick(p_clamped, t);
    alpha[t] = tape.Mul(pt, tape.Add(carry, tape.Pick(alpha_prev, t)));
    carry = tape.Div(tape.Mul(tape.Sub(one, pt), alpha[t]), pt);
  }
  return tape.Concat(alpha);
}

// beta[j] = sum_k alpha[k] softmax(scores over [k-w+1, k])[j], windows
// clipped to the frame range, accumulated in ascending k like the plain
// scan (which only skips terms that are exactly zero).
Value MochaTrainBetaOnTape(Tape& tape, Value alpha, Value chunk_eff,
                           std::size_t w) {
  std::size_t frames = tape.DimsOf(alpha).first;
  Value beta = tape.Zeros(frames);
  for (std::size_t k = 0; k < frames; ++k) {
    std::size_t start = (k + 1 >= w) ? k + 1 - w : 0;
    std::size_t len = k - start + 1;
    Value local = tape.Softmax(tape.Slice(chunk_eff, start, len, 1));
    Value contrib = tape.ScalarMul(tape.Pick(alpha, k), local);
    beta = tape.Add(beta, PadScatter(tape, contrib, start, len, frames));
  }
  return beta;
}

}  // namespace

TapeAttnOut AttendStepOnTape(Tape& tape, const TapeModel& m,
                             const AttentionSpec& spec,
                             std::span<const Value> h, Value s_u,
                             TapeAttnState* state) {
  Require(state != nullptr, "AttendStepOnTape: null state");
  Require(!h.empty(), "AttendStepOnTape: empty encoded sequence");
  std::size_t frames = h.size();
  TapeAttnOut out;
  switch (spec.kind) {
    case AttentionKind::kGsa: {
      Value e = FullScoresOnTape(tape, m.score, h, s_u, state->fb);
      Value eff = tape.ScaleShift(e, 1.0, 0.0);
      out.weights = tape.Softmax(eff);
      out.context = tape.Combine(out.weights, h);
      break;
    }
    case AttentionKind::kGrc: {
      Value e = FullScoresOnTape(tape, m.score, h, s_u, state->fb);
      Value z = GrcGatesOnTape(tape, e, m.score.bias);
      out.context = GrcContextOnTape(tape, h, z);
      out.weights = DualWeightsOnTape(tape, z);
      break;
    }
    case AttentionKind::kDecGrc: {
      Value e = FullScoresOnTape(tape, m.score, h, s_u, state->fb);
      Value z = DecGrcGatesOnTape(tape, e, m.score.bias);
      out.context = GrcContextOnTape(tape, h, z);
      out.weights = DualWeightsOnTape(tape, z);
      break;
    }
    case AttentionKind::kWindowed: {
      Require(spec.w >= 1, "AttendStepOnTape: window size required");
      std::size_t p = 0;
      if (!state->first) {
        std::span<const double> prev = tape.ValueOf(state->prev_weights);
        p = WindowStart(Vec64::FromSpan(prev));
      }
      std::size_t end = std::min(p + spec.w - 1, frames - 1);
      std::size_t len = end - p + 1;
      std::vector<Value> es;
      es.reserve(len);
      for (std::size_t k = 0; k < len; ++k) {
        std::size_t t = p + k;
        es.push_back(ScoreOnTape(tape, m.score, s_u, h[t],
                                 BetaOnTape(tape, m.score, h[t], state->fb, t)));
      }
      Value eff = tape.ScaleShift(tape.Concat(es), 1.0, 0.0);
      Value local = tape.Softmax(eff);
      out.context = tape.Combine(local, h.subspan(p, len));
      out.weights = PadScatter(tape, local, p, len, frames);
      state->prev_weights = out.weights;
      break;
    }
    case AttentionKind::kMocha: {
      Require(spec.w >= 1, "AttendStepOnTape: chunk size required");
      Value mono_e = FullScoresOnTape(tape, m.mono_score, h, s_u, state->fb);
      Value chunk_e = FullScoresOnTape(tape, m.score, h, s_u, state->fb);
      Value p = tape.Logistic(AddBias(tape, mono_e, m.mono_score.bias));
      Value pc = tape.Clamp(p, 1e-6, 1.0 - 1e-6);
      Value alpha = MochaTrainAlphaOnTape(tape, pc, state->alpha_expected);
      Value chunk_eff = tape.ScaleShift(chunk_e, 1.0, 0.0);
      out.weights = MochaTrainBetaOnTape(tape, alpha, chunk_eff, spec.w);
      out.context = tape.Combine(out.weights, h);
      state->alpha_expected = alpha;
      break;
    }
  }
  state->fb = tape.Add(state->fb, out.weights);
  state->first = false;
  return out;
}

Value BuildTeacherForcedNll(Tape& tape, Value flat, const ModelDims& dims,
                            const AttentionSpec& spec, const Mat64& x,
                            const TokenSequence& y) {
  Require(!y.empty(), "BuildTeacherForcedNll: empty target");
  Require(y.back() == kEosId,
          "BuildTeacherForcedNll: target must end with end-of-sequence");
  for (int id : y)
    Require(id >= 1 && static_cast<std::size_t>(id) < dims.vocab,
            "BuildTeacherForcedNll: token id out of range");

  TapeModel m = BindModel(tape, flat, dims);
  std::vector<Value> h = EncodeOnTape(tape, m, x);

  TapeAttnState state;
  state.fb = tape.Zeros(h.size());
  Vec64 prior(h.size());
  prior[0] = 1.0;
  state.alpha_expected = tape.Input(prior);

  Value s = tape.Zeros(dims.d_s);
  Value c = tape.Zeros(dims.d_h);
  Value nll = tape.Scalar(0.0);
  int y_prev = kSosId;
  for (std::size_t u = 0; u < y.size(); ++u) {
    // s_u = tanh(W_in [emb(y_prev); c_prev] + W_rec s_prev + b)
    Value emb = tape.RowOf(m.embed, static_cast<std::size_t>(y_prev));
    Value pair[] = {emb, c};
    Value dec_cat = tape.Concat(pair);
    Value from_in = tape.MatVec(m.dec_w_in, dec_cat);
    Value from_rec = tape.MatVec(m.dec_w_rec, s);
    s = tape.Tanh(tape.Add(tape.Add(from_in, from_rec), m.dec_b));

    TapeAttnOut att = AttendStepOnTape(tape, m, spec, h, s, &state);

    Value triple[] = {s, emb, att.context};
    Value out_cat = tape.Concat(triple);
    Value logits = tape.Add(tape.MatVec(m.out_w, out_cat), m.out_b);
    Value term = tape.Sub(tape.LogSumExp(logits),
                          tape.Pick(logits, static_cast<std::size_t>(y[u])));
    nll = tape.Add(nll, term);

    c = att.context;
    y_prev = y[u];
  }
  return nll;
}

}  // namespace grc
