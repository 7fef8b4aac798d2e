// model_test.cpp

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

#include <cmath>
#include <vector>

#include "doctest.h"
#include "grc/error.hpp"
#include "grc/model.hpp"
#include "grc/rng.hpp"
#include "testutil.hpp"

using namespace grc;

namespace {

const std::vector<AttentionKind> kAllKinds = {
    AttentionKind::kGsa, AttentionKind::kGrc, AttentionKind::kDecGrc,
    AttentionKind::kWindowed, AttentionKind::kMocha};

AttentionSpec SpecFor(AttentionKind kind) {
  return AttentionSpec{kind, KindUsesWindow(kind) ? 2u : 0u};
}

Mat64 RandomInput(Rng* rng, std::size_t frames, std::size_t d_x) {
  return grc_test::RandomMat(rng, frames, d_x, 1.0);
}

}  // namespace

TEST_CASE("kind names round trip") {
  for (AttentionKind kind : kAllKinds) {
    CHECK(AttentionKindFromName(AttentionKindName(kind)) == kind);
  }
  CHECK_THROWS_AS(AttentionKindFromName("softmax"), ConfigError);
  CHECK(KindUsesWindow(AttentionKind::kWindowed));
  CHECK(KindUsesWindow(AttentionKind::kMocha));
  CHECK_FALSE(KindUsesWindow(AttentionKind::kDecGrc));
  CHECK(KindHasGates(AttentionKind::kGrc));
  CHECK(KindHasGates(AttentionKind::kDecGrc));
  CHECK_FALSE(KindHasGates(AttentionKind::kGsa));
}

TEST_CASE("parameter layout covers the parameter vector once") {
  ModelDims dims = grc_test::TinyDims();
  ParamLayout layout = ParamLayout::For(dims);
  CHECK(layout.blocks.size() == 19);
  CHECK(layout.blocks.front().name == "enc_w_in");
  CHECK(layout.blocks.back().name == "out_b");
  std::size_t off = 0;
  for (const ParamLayout::Block& b : layout.blocks) {
    CHECK(b.off == off);
    off += b.rows * b.cols;
  }
  CHECK(off == layout.total);
  CHECK(layout.Find("score_b").rows == 1);
  CHECK_THROWS_AS(layout.Find("missing"), ContractViolation);
}

TEST_CASE("flatten and restore are inverse") {
  ModelDims dims = grc_test::TinyDims();
  ModelParams p = ModelParams::GlorotInit(dims, 7);
  Vec64 flat = p.Flatten();
  CHECK(flat.size() == ParamLayout::For(dims).total);
  ModelParams q = ModelParams::FromFlat(dims, flat);
  Vec64 flat2 = q.Flatten();
  CHECK(grc_test::SameBits(flat.View(), flat2.View()));
}

TEST_CASE("initialization is seed-deterministic with zero biases") {
  ModelDims dims = grc_test::TinyDims();
  ModelParams a = ModelParams::GlorotInit(dims, 11);
  ModelParams b = ModelParams::GlorotInit(dims, 11);
  ModelParams c = ModelParams::GlorotInit(dims, 12);
  CHECK(grc_test::SameBits(a.Flatten().View(), b.Flatten().View()));
  CHECK_FALSE(grc_test::SameBits(a.Flatten().View(), c.Flatten().View()));
  for (std::size_t i = 0; i < dims.d_h; ++i) CHECK(a.enc_b[i] == 0.0);
  for (std::size_t i = 0; i < dims.d_s; ++i) CHECK(a.dec_b[i] == 0.0);
  for (std::size_t i = 0; i < dims.vocab; ++i) CHECK(a.out_b[i] == 0.0);
  for (std::size_t i = 0; i < dims.d_k; ++i) CHECK(a.score.eta[i] == 0.0);
  CHECK(a.score.bias == 0.0);
}

TEST_CASE("encoder output length is the stride-subsampled frame count") {
  ModelDims dims = grc_test::TinyDims();
  ModelParams p = ModelParams::GlorotInit(dims, 21);
  Rng rng(22);
  for (std::size_t frames : {1u, 2u, 3u, 4u, 5u, 8u, 9u}) {
    Mat64 x = RandomInput(&rng, frames, dims.d_x);
    Mat64 h = Encode(p, x);
    CHECK(h.rows() == (frames + dims.stride - 1) / dims.stride);
    CHECK(h.cols() == dims.d_h);
  }
}

TEST_CASE("encoded rows ignore frames beyond their lookahead window") {
  ModelDims dims = grc_test::TinyDims();
  ModelParams p = ModelParams::GlorotInit(dims, 23);
  Rng rng(24);
  const std::size_t frames = 9;
  Mat64 x = RandomInput(&rng, frames, dims.d_x);
  Mat64 h = Encode(p, x);
  for (std::size_t t = 0; t < h.rows(); ++t) {
    const std::size_t visible = (t + 1) * dims.stride - 1 + dims.lookahead;
    if (visible + 1 >= frames) continue;
    Mat64 x2 = x;
    for (std::size_t f = visible + 1; f < frames; ++f)
      for (std::size_t i = 0; i < dims.d_x; ++i) x2.At(f, i) += 100.0;
    Mat64 h2 = Encode(p, x2);
    CHECK(grc_test::SameBits(h.Row(t), h2.Row(t)));
  }
}

TEST_CASE("streaming encoder matches the batch encoder bitwise") {
  ModelDims dims = grc_test::TinyDims();
  ModelParams p = ModelParams::GlorotInit(dims, 25);
  Rng rng(26);
  for (std::size_t frames : {1u, 4u, 7u, 12u}) {
    Mat64 x = RandomInput(&rng, frames, dims.d_x);
    Mat64 h = Encode(p, x);
    StreamingEncoder enc(p);
    for (std::size_t f = 0; f < frames; ++f) enc.Push(x.Row(f));
    enc.Finish();
    CHECK(enc.Finished());
    REQUIRE(enc.Ready() == h.rows());
    for (std::size_t t = 0; t < h.rows(); ++t)
      CHECK(grc_test::SameBits(enc.Row(t).View(), h.Row(t)));
  }
}

TEST_CASE("decoder cell at zero parameters is tanh of the bias") {
  ModelDims dims = grc_test::TinyDims();
  ModelParams p = ModelParams::Zeros(dims);
  for (std::size_t i = 0; i < dims.d_s; ++i) p.dec_b[i] = 0.5 * (i + 1);
  Vec64 s_prev(dims.d_s);
  Vec64 c_prev(dims.d_h);
  Vec64 s = DecoderStep(p, s_prev, kSosId, c_prev);
  for (std::size_t i = 0; i < dims.d_s; ++i)
    CHECK(s[i] == doctest::Approx(std::tanh(0.5 * (i + 1))).epsilon(1e-15));
}

TEST_CASE("readout softmax from crafted logits") {
  ModelDims dims = grc_test::TinyDims();
  dims.vocab = 2;
  ModelParams p = ModelParams::Zeros(dims);
  p.out_b[0] = std::log(3.0);
  Vec64 s(dims.d_s);
  Vec64 c(dims.d_h);
  Vec64 probs = Readout(p, s, kSosId, c);
  CHECK(probs[0] == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(probs[1] == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("teacher forcing rejects malformed targets") {
  ModelDims dims = grc_test::TinyDims();
  ModelParams p = ModelParams::GlorotInit(dims, 31);
  Rng rng(32);
  Mat64 h = Encode(p, RandomInput(&rng, 6, dims.d_x));
  AttentionSpec spec = SpecFor(AttentionKind::kGsa);
  CHECK_THROWS_AS(TeacherForcedEval(p, spec, h, TokenSequence{2, 3}),
                  ContractViolation);
  CHECK_THROWS_AS(TeacherForcedEval(p, spec, h, TokenSequence{0, kEosId}),
                  ContractViolation);
  CHECK_THROWS_AS(TeacherForcedEval(p, spec, h, TokenSequence{}),
                  ContractViolation);
}

TEST_CASE("teacher forcing at zero parameters scores log vocab per token") {
  ModelDims dims = grc_test::TinyDims();
  ModelParams p = ModelParams::Zeros(dims);
  Rng rng(33);
  Mat64 h = Encode(p, RandomInput(&rng, 6, dims.d_x));
  TokenSequence y = {2, 3, kEosId};
  TeacherForcedResult r =
      TeacherForcedEval(p, SpecFor(AttentionKind::kGsa), h, y);
  CHECK(r.tokens == 3);
  CHECK(r.nll ==
        doctest::Approx(3.0 * std::log(double(dims.vocab))).epsilon(1e-13));
  for (std::size_t u = 0; u < y.size(); ++u)
    for (std::size_t t = 0; t < h.rows(); ++t)
      CHECK(r.weights.At(u, t) ==
            doctest::Approx(1.0 / double(h.rows())).epsilon(1e-14));
  CHECK_FALSE(r.has_gates);
}

TEST_CASE("attention step invariants per kind") {
  ModelDims dims = grc_test::TinyDims();
  ModelParams p = ModelParams::GlorotInit(dims, 41);
  Rng rng(42);
  Mat64 h = Encode(p, RandomInput(&rng, 8, dims.d_x));
  const std::size_t frames = h.rows();
  Vec64 s_u = grc_test::RandomVec(&rng, dims.d_s, 1.0);
  for (AttentionKind kind : kAllKinds) {
    CAPTURE(AttentionKindName(kind));
    AttentionSpec spec = SpecFor(kind);
    AttnState state(frames);
    AttnStepOut out =
        AttendStep(p, spec, h, s_u, &state, StepMode::kTeacherForced);
    REQUIRE(out.weights.size() == frames);
    REQUIRE(out.context.size() == dims.d_h);
    double mass = 0.0;
    for (std::size_t t = 0; t < frames; ++t) {
      CHECK(out.weights[t] >= 0.0);
      mass += out.weights[t];
    }
    if (kind != AttentionKind::kMocha)
      CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
    if (KindHasGates(kind)) {
      REQUIRE(out.gates.size() == frames);
      CHECK(out.gates[0] == 1.0);
    } else {
      CHECK(out.gates.size() == 0);
    }
    CHECK(out.endpoint == frames);
  }
}

TEST_CASE("windowed attention mass stays inside the window") {
  ModelDims dims = grc_test::TinyDims();
  ModelParams p = ModelParams::GlorotInit(dims, 43);
  Rng rng(44);
  Mat64 h = Encode(p, RandomInput(&rng, 10, dims.d_x));
  const std::size_t frames = h.rows();
  AttentionSpec spec = SpecFor(AttentionKind::kWindowed);
  AttnState state(frames);
  for (int u = 0; u < 3; ++u) {
    Vec64 s_u = grc_test::RandomVec(&rng, dims.d_s, 1.0);
    AttnStepOut out =
        AttendStep(p, spec, h, s_u, &state, StepMode::kTeacherForced);
    std::size_t support = 0;
    for (std::size_t t = 0; t < frames; ++t)
      if (out.weights[t] != 0.0) ++support;
    CHECK(support <= spec.w);
  }
}

TEST_CASE("hard monotonic decode reports the consumed prefix") {
  ModelDims dims = grc_test::TinyDims();
  ModelParams p = ModelParams::GlorotInit(dims, 45);
  Rng rng(46);
  Mat64 h = Encode(p, RandomInput(&rng, 10, dims.d_x));
  const std::size_t frames = h.rows();
  AttentionSpec spec = SpecFor(AttentionKind::kMocha);
  AttnState state(frames);
  std::size_t prev_end = 1;
  for (int u = 0; u < 4; ++u) {
    Vec64 s_u = grc_test::RandomVec(&rng, dims.d_s, 1.0);
    AttnStepOut out = AttendStep(p, spec, h, s_u, &state, StepMode::kDecode);
    CHECK(out.endpoint >= 1);
    CHECK(out.endpoint <= frames);
    CHECK(out.endpoint >= prev_end);
    CHECK(out.endpoint == state.mono.tau_prev + 1);
    prev_end = out.endpoint;
  }
}

TEST_CASE("soft monotonic training weights keep the selection mass") {
  ModelDims dims = grc_test::TinyDims();
  ModelParams p = ModelParams::GlorotInit(dims, 47);
  Rng rng(48);
  Mat64 h = Encode(p, RandomInput(&rng, 10, dims.d_x));
  AttnState state(h.rows());
  AttentionSpec spec = SpecFor(AttentionKind::kMocha);
  for (int u = 0; u < 3; ++u) {
    Vec64 s_u = grc_test::RandomVec(&rng, dims.d_s, 1.0);
    AttnStepOut out =
        AttendStep(p, spec, h, s_u, &state, StepMode::kTeacherForced);
    double beta_mass = 0.0;
    double alpha_mass = 0.0;
    for (std::size_t t = 0; t < h.rows(); ++t) {
      beta_mass += out.weights[t];
      alpha_mass += state.alpha_expected[t];
    }
    CHECK(beta_mass == doctest::Approx(alpha_mass).epsilon(1e-12));
  }
}
