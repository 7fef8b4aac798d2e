// grc/model.cpp

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

#include "grc/model.hpp"

#include <algorithm>
#include <cmath>

#include "grc/rng.hpp"

namespace grc {

std::string AttentionKindName(AttentionKind kind) {
  switch (kind) {
    case AttentionKind::kGsa:
      return "gsa";
    case AttentionKind::kGrc:
      return "grc";
    case AttentionKind::kDecGrc:
      return "decgrc";
    case AttentionKind::kWindowed:
      return "windowed";
    case AttentionKind::kMocha:
      return "mocha";
  }
  throw ContractViolation("AttentionKindName: unknown kind");
}

AttentionKind AttentionKindFromName(const std::string& name) {
  if (name == "gsa") return AttentionKind::kGsa;
  if (name == "grc") return AttentionKind::kGrc;
  if (name == "decgrc") return AttentionKind::kDecGrc;
  if (name == "windowed") return AttentionKind::kWindowed;
  if (name == "mocha") return AttentionKind::kMocha;
  throw ConfigError("unknown attention kind: " + name);
}

bool KindUsesWindow(AttentionKind kind) {
  return kind == AttentionKind::kWindowed || kind == AttentionKind::kMocha;
}

bool KindHasGates(AttentionKind kind) {
  return kind == AttentionKind::kGrc || kind == AttentionKind::kDecGrc;
}

void ModelDims::Validate() const {
  Require(d_x >= 1 && d_h >= 1 && d_s >= 1 && d_e >= 1 && d_k >= 1,
          "ModelDims: dimensions must be at least 1");
  Require(vocab >= 2, "ModelDims: vocabulary must hold the two reserved ids");
  Require(stride >= 1, "ModelDims: stride must be at least 1");
}

ParamLayout ParamLayout::For(const ModelDims& dims) {
  dims.Validate();
  ParamLayout layout;
  auto push = [&layout](const std::string& name, std::size_t rows,
                        std::size_t cols) {
    layout.blocks.push_back({name, layout.total, rows, cols});
    layout.total += rows * cols;
  };
  std::size_t enc_in = dims.d_x * (dims.lookahead + 1);
  push("enc_w_in", dims.d_h, enc_in);
  push("enc_w_rec", dims.d_h, dims.d_h);
  push("enc_b", dims.d_h, 1);
  push("dec_w_in", dims.d_s, dims.d_e + dims.d_h);
  push("dec_w_rec", dims.d_s, dims.d_s);
  push("dec_b", dims.d_s, 1);
  push("embed", dims.vocab, dims.d_e);
  std::size_t score_in = dims.d_s + dims.d_h + 1;
  for (const char* prefix : {"score", "mono"}) {
    std::string p(prefix);
    push(p + "_v", dims.d_k, 1);
    push(p + "_w", dims.d_k, score_in);
    push(p + "_eta", dims.d_k, 1);
    push(p + "_vb", dims.d_h, 1);
    push(p + "_b", 1, 1);
  }
  push("out_w", dims.vocab, dims.d_s + dims.d_e + dims.d_h);
  push("out_b", dims.vocab, 1);
  return layout;
}

const ParamLayout::Block& ParamLayout::Find(const std::string& name) const {
  for (const Block& b : blocks) {
    if (b.name == name) return b;
  }
  throw ContractViolation("ParamLayout: unknown block " + name);
}

namespace {

struct BlockRef {
  double* data;
  std::size_t size;
};

// Parameter blocks in the exact ParamLayout order.
std::vector<BlockRef> BlockRefs(ModelParams& p) {
  auto mat = [](Mat64& m) { return BlockRef{m.data(), m.flat_size()}; };
  auto vec = [](Vec64& v) { return BlockRef{v.data(), v.size()}; };
  auto sca = [](double& x) { return BlockRef{&x, 1}; };
  return {
      mat(p.enc_w_in),  mat(p.enc_w_rec), vec(p.enc_b),
      mat(p.dec_w_in),  mat(p.dec_w_rec), vec(p.dec_b),
      mat(p.embed),
      vec(p.score.v),   mat(p.score.w),   vec(p.score.eta),
      vec(p.score.v_beta), sca(p.score.bias),
      vec(p.mono_score.v), mat(p.mono_score.w), vec(p.mono_score.eta),
      vec(p.mono_score.v_beta), sca(p.mono_score.bias),
      mat(p.out_w),     vec(p.out_b),
  };
}

}  // namespace

ModelParams ModelParams::Zeros(const ModelDims& dims) {
  dims.Validate();
  ModelParams p;
  p.dims = dims;
  std::size_t enc_in = dims.d_x * (dims.lookahead + 1);
  std::size_t score_in = dims.d_s + dims.d_h + 1;
  p.enc_w_in = Mat64(dims.d_h, enc_in);
  p.enc_w_rec = Mat64(dims.d_h, dims.d_h);
  p.enc_b = Vec64(dims.d_h);
  p.dec_w_in = Mat64(dims.d_s, dims.d_e + dims.d_h);
  p.dec_w_rec = Mat64(dims.d_s, dims.d_s);
  p.dec_b = Vec64(dims.d_s);
  p.embed = Mat64(dims.vocab, dims.d_e);
  for (ScoreParams* sp : {&p.score, &p.mono_score}) {
    sp->v = Vec64(dims.d_k);
    sp->w = Mat64(dims.d_k, score_in);
    sp->eta = Vec64(dims.d_k);
    sp->v_beta = Vec64(dims.d_h);
    sp->bias = 0.0;
  }
  p.out_w = Mat64(dims.vocab, dims.d_s + dims.d_e + dims.d_h);
  p.out_b = Vec64(dims.vocab);
  return p;
}

ModelParams ModelParams::GlorotInit(const ModelDims& dims,
                                    std::uint64_t seed) {
  ModelParams p = Zeros(dims);
  Rng rng(seed);
  ParamLayout layout = ParamLayout::For(dims);
  std::vector<BlockRef> refs = BlockRefs(p);
  for (std::size_t b = 0; b < refs.size(); ++b) {
    const ParamLayout::Block& block = layout.blocks[b];
    bool is_bias = block.name.ends_with("_b") || block.name == "enc_b" ||
                   block.name == "dec_b" || block.name.ends_with("_eta");
    if (is_bias) continue;  // biases and score offsets start at zero
    double limit = std::sqrt(6.0 / static_cast<double>(block.rows + block.cols));
    for (std::size_t i = 0; i < refs[b].size; ++i)
      refs[b].data[i] = rng.Uniform(-limit, limit);
  }
  return p;
}

Vec64 ModelParams::Flatten() const {
  ModelParams& self = const_cast<ModelParams&>(*this);
  std::vector<BlockRef> refs = BlockRefs(self);
  ParamLayout layout = ParamLayout::For(dims);
  Vec64 flat(layout.total);
  std::size_t off = 0;
  for (const BlockRef& r : refs) {
    std::copy(r.data, r.data + r.size, flat.data() + off);
    off += r.size;
  }
  Require(off == layout.total, "ModelParams::Flatten: layout mismatch");
  return flat;
}

ModelParams ModelParams::FromFlat(const ModelDims& dims, const Vec64& flat) {
  ParamLayout layout = ParamLayout::For(dims);
  Require(flat.size() == layout.total,
          "ModelParams::FromFlat: flat size mismatch");
  ModelParams p = Zeros(dims);
  std::vector<BlockRef> refs = BlockRefs(p);
  std::size_t off = 0;
  for (BlockRef& r : refs) {
    std::copy(flat.data() + off, flat.data() + off + r.size, r.data);
    off += r.size;
  }
  return p;
}

Mat64 Encode(const ModelParams& params, const Mat64& x) {
  const ModelDims& d = params.dims;
  Require(x.cols() == d.d_x, "Encode: frame dimension mismatch");
  Require(x.rows() >= 1, "Encode: empty input");
  std::size_t t_out = (x.rows() + d.stride - 1) / d.stride;

  StreamingEncoder enc(params);
  for (std::size_t i = 0; i < x.rows(); ++i) enc.Push(x.Row(i));
  enc.Finish();
  Require(enc.Ready() == t_out, "Encode: subsample bookkeeping failed");
  Mat64 h(t_out, d.d_h);
  for (std::size_t t = 0; t < t_out; ++t) {
    const Vec64& row = enc.Row(t);
    std::span<double> dst = h.MutableRow(t);
    for (std::size_t j = 0; j < d.d_h; ++j) dst[j] = row[j];
  }
  return h;
}

StreamingEncoder::StreamingEncoder(const ModelParams& params)
    : params_(params),
      state_(params.dims.d_h),
      cat_(params.dims.d_x * (params.dims.lookahead + 1)),
      from_in_(params.dims.d_h),
      from_rec_(params.dims.d_h) {
  params.dims.Validate();
}

const Vec64& StreamingEncoder::Row(std::size_t t) const {
  Require(t < rows_.size(), "StreamingEncoder::Row: row not ready");
  return rows_[t];
}

void StreamingEncoder::Push(std::span<const double> frame) {
  Require(!finished_, "StreamingEncoder::Push: stream already finished");
  Require(frame.size() == params_.dims.d_x,
          "StreamingEncoder::Push: frame dimension mismatch");
  input_.push_back(Vec64::FromSpan(frame));
  Advance();
}

void StreamingEncoder::Finish() {
  Require(!finished_, "StreamingEncoder::Finish: stream already finished");
  finished_ = true;
  Advance();
}

void StreamingEncoder::Advance() {
  const ModelDims& d = params_.dims;
  while (next_step_ < input_.size()) {
    std::size_t i = next_step_;
    // Without end-of-stream, step i waits for its full lookahead window.
    if (!finished_ && i + d.lookahead >= input_.size()) break;
    for (std::size_t k = 0; k <= d.lookahead; ++k) {
      std::size_t src = i + k;
      for (std::size_t c = 0; c < d.d_x; ++c)
        cat_[k * d.d_x + c] = (src < input_.size()) ? input_[src][c] : 0.0;
    }
    MatVecInto(params_.enc_w_in, cat_.View(), from_in_.MutableView());
    MatVecInto(params_.enc_w_rec, state_.View(), from_rec_.MutableView());
    for (std::size_t j = 0; j < d.d_h; ++j)
      state_[j] = std::tanh(from_in_[j] + from_rec_[j] + params_.enc_b[j]);
    bool last = finished_ && (i + 1 == input_.size());
    if ((i + 1) % d.stride == 0 || last) rows_.push_back(state_);
    ++next_step_;
  }
}

Vec64 DecoderStep(const ModelParams& params, const Vec64& s_prev, int y_prev,
                  const Vec64& c_prev) {
  const ModelDims& d = params.dims;
  Require(s_prev.size() == d.d_s, "DecoderStep: state dimension mismatch");
  Require(c_prev.size() == d.d_h, "DecoderStep: context dimension mismatch");
  Require(y_prev >= 0 && static_cast<std::size_t>(y_prev) < d.vocab,
          "DecoderStep: token id out of range");
  Vec64 cat(d.d_e + d.d_h);
  std::span<const double> emb = params.embed.Row(y_prev);
  for (std::size_t i = 0; i < d.d_e; ++i) cat[i] = emb[i];
  for (std::size_t i = 0; i < d.d_h; ++i) cat[d.d_e + i] = c_prev[i];
  Vec64 from_in(d.d_s);
  Vec64 from_rec(d.d_s);
  MatVecInto(params.dec_w_in, cat.View(), from_in.MutableView());
  MatVecInto(params.dec_w_rec, s_prev.View(), from_rec.MutableView());
  Vec64 s(d.d_s);
  for (std::size_t j = 0; j < d.d_s; ++j)
    s[j] = std::tanh(from_in[j] + from_rec[j] + params.dec_b[j]);
  return s;
}

Vec64 ReadoutLogits(const ModelParams& params, const Vec64& s, int y_prev,
                    const Vec64& c) {
  const ModelDims& d = params.dims;
  Require(s.size() == d.d_s && c.size() == d.d_h,
          "ReadoutLogits: dimension mismatch");
  Require(y_prev >= 0 && static_cast<std::size_t>(y_prev) < d.vocab,
          "ReadoutLogits: token id out of range");
  Vec64 cat(d.d_s + d.d_e + d.d_h);
  std::size_t k = 0;
  for (std::size_t i = 0; i < d.d_s; ++i) cat[k++] = s[i];
  std::span<const double> emb = params.embed.Row(y_prev);
  for (std::size_t i = 0; i < d.d_e; ++i) cat[k++] = emb[i];
  for (std::size_t i = 0; i < d.d_h; ++i) cat[k++] = c[i];
  Vec64 logits(d.vocab);
  MatVecInto(params.out_w, cat.View(), logits.MutableView());
  for (std::size_t i = 0; i < d.vocab; ++i) logits[i] += params.out_b[i];
  return logits;
}

Vec64 Readout(const ModelParams& params, const Vec64& s, int y_prev,
              const Vec64& c) {
  Vec64 logits = ReadoutLogits(params, s, y_prev, c);
  return StableSoftmax(logits.View());
}

AttnState::AttnState(std::size_t frames)
    : fb(frames), alpha_expected(frames) {
  Require(frames >= 1, "AttnState: empty encoded sequence");
  alpha_expected[0] = 1.0;  // one-hot prior for the expected-selection scan
}

namespace {

// Score row over all frames for one decoder step.
ScoreRow FullScoreRow(const ScoreParams& sp, const Vec64& s_u, const Mat64& h,
                      const FeedbackState& fb, double bias) {
  ScoreRow row;
  row.bias = bias;
  row.e = Vec64(h.rows());
  for (std::size_t t = 0; t < h.rows(); ++t)
    row.e[t] = AdditiveScore(sp, s_u.View(), h.Row(t), fb.Beta(sp, h.Row(t), t));
  return row;
}

}  // namespace

AttnStepOut AttendStep(const ModelParams& params, const AttentionSpec& spec,
                       const Mat64& h, const Vec64& s_u, AttnState* state,
                       StepMode mode) {
  Require(state != nullptr, "AttendStep: null state");
  Require(h.rows() >= 1, "AttendStep: empty encoded sequence");
  Require(state->fb.cum.size() == h.rows(),
          "AttendStep: state frame count mismatch");
  if (KindUsesWindow(spec.kind))
    Require(spec.w >= 1, "AttendStep: window size required");

  AttnStepOut out;
  out.endpoint = h.rows();
  switch (spec.kind) {
    case AttentionKind::kGsa: {
      ScoreRow row = FullScoreRow(params.score, s_u, h, state->fb, 0.0);
      out.weights = SoftmaxWeights(row);
      out.context = GsaContext(out.weights, h);
      break;
    }
    case AttentionKind::kGrc: {
      ScoreRow row =
          FullScoreRow(params.score, s_u, h, state->fb, params.score.bias);
      out.gates = GrcGates(row);
      out.context = GrcContext(h, out.gates);
      out.weights = DualWeights(out.gates);
      break;
    }
    case AttentionKind::kDecGrc: {
      ScoreRow row =
          FullScoreRow(params.score, s_u, h, state->fb, params.score.bias);
      out.gates = DecGrcGates(row);
      out.context = GrcContext(h, out.gates);
      out.weights = DualWeights(out.gates);
      break;
    }
    case AttentionKind::kWindowed: {
      std::size_t p = state->first ? 0 : WindowStart(state->prev_weights);
      std::size_t end = std::min(p + spec.w - 1, h.rows() - 1);
      ScoreRow row;
      row.bias = 0.0;
      row.e = Vec64(end - p + 1);
      for (std::size_t k = 0; k <= end - p; ++k) {
        std::size_t t = p + k;
        row.e[k] = AdditiveScore(params.score, s_u.View(), h.Row(t),
                                 state->fb.Beta(params.score, h.Row(t), t));
      }
      WindowedResult wr = WindowedAttend(row, h, p, spec.w);
      out.weights = wr.weights;
      out.context = wr.context;
      state->prev_weights = wr.weights;
      break;
    }
    case AttentionKind::kMocha: {
      if (mode == StepMode::kTeacherForced) {
        ScoreRow mono = FullScoreRow(params.mono_score, s_u, h, state->fb,
                                     params.mono_score.bias);
        ScoreRow chunk = FullScoreRow(params.score, s_u, h, state->fb, 0.0);
        Vec64 p_row(h.rows());
        for (std::size_t t = 0; t < h.rows(); ++t)
          p_row[t] = Logistic(mono.e[t] + mono.bias);
        Vec64 alpha = MochaTrainAlpha(p_row, state->alpha_expected);
        out.weights = MochaTrainBeta(alpha, chunk, spec.w);
        out.context = GsaContext(out.weights, h);
        state->alpha_expected = alpha;
      } else {
        ScoreRow mono = FullScoreRow(params.mono_score, s_u, h, state->fb,
                                     params.mono_score.bias);
        ScoreRow chunk = FullScoreRow(params.score, s_u, h, state->fb, 0.0);
        MochaInferResult mr =
            MochaInfer(mono, chunk, h, &state->mono, spec.w);
        out.weights = mr.weights;
        out.context = mr.context;
        out.endpoint = mr.tau + 1;
      }
      break;
    }
  }
  state->fb.Accumulate(out.weights);
  state->first = false;
  return out;
}

TeacherForcedResult TeacherForcedEval(const ModelParams& params,
                                      const AttentionSpec& spec,
                                      const Mat64& h, const TokenSequence& y) {
  const ModelDims& d = params.dims;
  Require(!y.empty(), "TeacherForcedEval: empty target");
  Require(y.back() == kEosId,
          "TeacherForcedEval: target must end with end-of-sequence");
  for (int id : y)
    Require(id >= 1 && static_cast<std::size_t>(id) < d.vocab,
            "TeacherForcedEval: token id out of range");

  TeacherForcedResult res;
  res.tokens = y.size();
  res.weights = Mat64(y.size(), h.rows());
  res.has_gates = KindHasGates(spec.kind);
  if (res.has_gates) res.gates = Mat64(y.size(), h.rows());

  AttnState state(h.rows());
  Vec64 s(d.d_s);
  Vec64 c(d.d_h);
  int y_prev = kSosId;
  for (std::size_t u = 0; u < y.size(); ++u) {
    s = DecoderStep(params, s, y_prev, c);
    AttnStepOut att =
        AttendStep(params, spec, h, s, &state, StepMode::kTeacherForced);
    Vec64 logits = ReadoutLogits(params, s, y_prev, att.context);
    res.nll += LogSumExpOf(logits.View()) - logits[y[u]];
    for (std::size_t t = 0; t < h.rows(); ++t) {
      res.weights.At(u, t) = att.weights[t];
      if (res.has_gates) res.gates.At(u, t) = att.gates[t];
    }
    c = att.context;
    y_prev = y[u];
  }
  return res;
}

}  // namespace grc
