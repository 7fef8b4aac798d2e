// baselines_test.cpp

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
#include <cstdlib>

#include "doctest.h"
#include "grc/attention.hpp"
#include "grc/baselines.hpp"
#include "grc/rng.hpp"
#include "testutil.hpp"

using namespace grc;

namespace {

Mat64 Frames124() {
  Mat64 h(3, 1);
  h.At(0, 0) = 1.0;
  h.At(1, 0) = 2.0;
  h.At(2, 0) = 4.0;
  return h;
}

}  // namespace

TEST_CASE("window start follows the previous attention peak") {
  Vec64 alpha(4);
  alpha[1] = 0.4;
  alpha[2] = 0.4;  // tie resolves to the earlier frame
  alpha[3] = 0.2;
  CHECK(WindowStart(alpha) == 1);
  Vec64 first(3);
  CHECK(WindowStart(first) == 0);
}

TEST_CASE("windowed attention spans w frames from the peak") {
  ScoreRow row;
  row.e = Vec64(2);
  row.bias = 0.0;
  WindowedResult r = WindowedAttend(row, Frames124(), 1, 2);
  CHECK(r.start == 1);
  CHECK(r.end == 2);
  CHECK(r.weights[0] == 0.0);
  CHECK(r.weights[1] == 0.5);
  CHECK(r.weights[2] == 0.5);
  CHECK(r.context[0] == 3.0);
}

TEST_CASE("windowed attention clips at the trailing edge") {
  ScoreRow row;
  row.e = Vec64(1);
  row.bias = 0.0;
  WindowedResult r = WindowedAttend(row, Frames124(), 2, 4);
  CHECK(r.start == 2);
  CHECK(r.end == 2);
  CHECK(r.weights[2] == 1.0);
  CHECK(r.context[0] == 4.0);
}

TEST_CASE("monotonic inference picks the first confident frame") {
  ScoreRow sel;
  sel.e = Vec64(3);
  sel.e[0] = -1.0;
  sel.e[1] = -1.0;
  sel.e[2] = 1.0;
  sel.bias = 0.0;
  ScoreRow chunk;
  chunk.e = Vec64(3);
  chunk.bias = 0.0;
  MonotonicState state;
  MochaInferResult r = MochaInfer(sel, chunk, Frames124(), &state, 2);
  CHECK(r.selected);
  CHECK(r.tau == 2);
  CHECK(state.tau_prev == 2);
  // chunk window is frames 1..2 with equal scores
  CHECK(r.weights[1] == 0.5);
  CHECK(r.weights[2] == 0.5);
  CHECK(r.context[0] == 3.0);
}

TEST_CASE("monotonic inference falls back to no selection") {
  ScoreRow sel;
  sel.e = Vec64(3);
  sel.e[0] = -50.0;
  sel.e[1] = -50.0;
  sel.e[2] = -50.0;
  sel.bias = 0.0;
  ScoreRow chunk;
  chunk.e = Vec64(3);
  chunk.bias = 0.0;
  MonotonicState state;
  MochaInferResult r = MochaInfer(sel, chunk, Frames124(), &state, 2);
  CHECK_FALSE(r.selected);
  CHECK(r.tau == 2);
  CHECK(r.context[0] == 0.0);
  double mass = 0.0;
  for (std::size_t t = 0; t < 3; ++t) mass += r.weights[t];
  CHECK(mass == 0.0);
}

TEST_CASE("monotonic scan resumes where it stopped") {
  ScoreRow sel;
  sel.e = Vec64(3);
  sel.e[0] = 10.0;  // would win if the scan restarted
  sel.e[1] = -10.0;
  sel.e[2] = 10.0;
  sel.bias = 0.0;
  ScoreRow chunk;
  chunk.e = Vec64(3);
  chunk.bias = 0.0;
  MonotonicState state;
  state.tau_prev = 1;
  MochaInferResult r = MochaInfer(sel, chunk, Frames124(), &state, 1);
  CHECK(r.tau == 2);
  CHECK(r.weights[2] == 1.0);
}

TEST_CASE("expected alignment recursion hand case") {
  Vec64 p(2);
  p[0] = 0.5;
  p[1] = 0.5;
  Vec64 prev(2);
  prev[0] = 1.0;
  Vec64 alpha = MochaTrainAlpha(p, prev);
  CHECK(alpha[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(alpha[1] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("strided product alignment hand case") {
  Vec64 p(2);
  p[0] = 0.5;
  p[1] = 0.5;
  Vec64 alpha = SmochaAlpha(p);
  CHECK(alpha[0] == 0.5);
  CHECK(alpha[1] == 0.25);
}

TEST_CASE("chunk weights preserve the alignment mass") {
  Rng rng(105);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t frames = 1 + rng.UniformInt(0, 31);
    const std::size_t w = 1 + rng.UniformInt(0, 3);
    Vec64 alpha = grc_test::RandomSimplex(&rng, frames);
    for (std::size_t t = 0; t < frames; ++t) alpha[t] *= rng.Uniform(0.0, 1.0);
    ScoreRow chunk;
    chunk.e = grc_test::RandomVec(&rng, frames, 3.0);
    chunk.bias = rng.Uniform(-1.0, 1.0);
    Vec64 beta = MochaTrainBeta(alpha, chunk, w);
    double sum_a = 0.0;
    double sum_b = 0.0;
    for (std::size_t t = 0; t < frames; ++t) {
      sum_a += alpha[t];
      sum_b += beta[t];
    }
    worst = std::max(worst, std::fabs(sum_a - sum_b));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("product alignment mirrors the gate duality") {
  Rng rng(107);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t frames = 1 + rng.UniformInt(0, 31);
    Vec64 z = grc_test::RandomGates(&rng, frames);
    Vec64 rev(frames);
    for (std::size_t t = 0; t < frames; ++t) rev[t] = z[frames - 1 - t];
    Vec64 alpha = SmochaAlpha(rev);
    Vec64 dual = DualWeights(z);
    for (std::size_t t = 0; t < frames; ++t)
      worst = std::max(worst, std::fabs(alpha[t] - dual[frames - 1 - t]));
  }
  CHECK(worst <= 1e-12);
}
