// attention_test.cpp

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

#include "doctest.h"
#include "grc/attention.hpp"
#include "grc/error.hpp"
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

TEST_CASE("weighted context of [1,2,4] under [1/4,1/4,1/2]") {
  Vec64 alpha(3);
  alpha[0] = 0.25;
  alpha[1] = 0.25;
  alpha[2] = 0.5;
  Vec64 c = GsaContext(alpha, Frames124());
  CHECK(c.size() == 1);
  CHECK(c[0] == 2.75);
}

TEST_CASE("gated recursion trace on [1,2,4] with gates [1,1/2,1/2]") {
  Vec64 z(3);
  z[0] = 1.0;
  z[1] = 0.5;
  z[2] = 0.5;
  ContextTrace trace = GrcRecurse(Frames124(), z);
  CHECK(trace.d.rows() == 3);
  CHECK(trace.d.At(0, 0) == 1.0);
  CHECK(trace.d.At(1, 0) == 1.5);
  CHECK(trace.d.At(2, 0) == 2.75);
  CHECK(trace.Final()[0] == 2.75);
  Vec64 c = GrcContext(Frames124(), z);
  CHECK(c[0] == 2.75);
}

TEST_CASE("gate row to simplex weights by suffix products") {
  Vec64 z(3);
  z[0] = 1.0;
  z[1] = 0.5;
  z[2] = 0.5;
  Vec64 alpha = DualWeights(z);
  CHECK(alpha[0] == 0.25);
  CHECK(alpha[1] == 0.25);
  CHECK(alpha[2] == 0.5);
}

TEST_CASE("dual weights require leading gate one") {
  Vec64 z(2);
  z[0] = 0.5;
  z[1] = 0.5;
  CHECK_THROWS_AS(DualWeights(z), ContractViolation);
}

TEST_CASE("recursion equals weighted average on random rows") {
  Rng rng(101);
  double worst = 0.0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t frames = 1 + rng.UniformInt(0, 63);
    const std::size_t dim = 1 + rng.UniformInt(0, 15);
    Vec64 z = grc_test::RandomGates(&rng, frames);
    Mat64 h = grc_test::RandomMat(&rng, frames, dim);
    Vec64 direct = GrcContext(h, z);
    Vec64 avg = GsaContext(DualWeights(z), h);
    for (std::size_t i = 0; i < dim; ++i)
      worst = std::max(worst, std::fabs(direct[i] - avg[i]));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("weights-to-gates inversion round trip") {
  Rng rng(102);
  double worst = 0.0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t frames = 1 + rng.UniformInt(0, 63);
    Vec64 alpha = grc_test::RandomSimplex(&rng, frames);
    Vec64 z = InverseDual(alpha);
    CHECK(z[0] == 1.0);
    for (std::size_t t = 0; t < frames; ++t) {
      CHECK(z[t] >= 0.0);
      CHECK(z[t] <= 1.0);
    }
    Vec64 back = DualWeights(z);
    for (std::size_t t = 0; t < frames; ++t)
      worst = std::max(worst, std::fabs(alpha[t] - back[t]));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("inversion saturated branch") {
  Vec64 alpha(2);
  alpha[0] = 0.0;
  alpha[1] = 1.0;
  Vec64 z = InverseDual(alpha);
  CHECK(z[0] == 1.0);
  CHECK(z[1] == 1.0);
  Vec64 back = DualWeights(z);
  CHECK(back[0] == 0.0);
  CHECK(back[1] == 1.0);
}

TEST_CASE("pointwise gate of a score") {
  CHECK(GrcGate(0.0) == 0.5);
  CHECK(GrcGate(-std::log(3.0)) == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("gate rows pin the first gate to one") {
  ScoreRow row;
  row.e = Vec64(3);
  row.bias = 0.0;
  Vec64 z = GrcGates(row);
  CHECK(z[0] == 1.0);
  CHECK(z[1] == 0.5);
  Vec64 zd = DecGrcGates(row);
  CHECK(zd[0] == 1.0);
  CHECK(zd[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(zd[2] == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("cumulative gates never increase past the first") {
  Rng rng(103);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t frames = 2 + rng.UniformInt(0, 62);
    ScoreRow row;
    row.bias = rng.Uniform(-1.0, 1.0);
    row.e = grc_test::RandomVec(&rng, frames, trial % 4 == 0 ? 700.0 : 30.0);
    Vec64 z = DecGrcGates(row);
    CHECK(z.AllFinite());
    for (std::size_t t = 2; t < frames; ++t) CHECK(z[t] <= z[t - 1]);
  }
}

TEST_CASE("intermediate context equals the padded prefix dual average") {
  Rng rng(104);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t frames = 2 + rng.UniformInt(0, 14);
    const std::size_t dim = 1 + rng.UniformInt(0, 7);
    Vec64 z = grc_test::RandomGates(&rng, frames);
    Mat64 h = grc_test::RandomMat(&rng, frames, dim);
    const std::size_t tau = 1 + rng.UniformInt(0, static_cast<int>(frames) - 1);
    Vec64 mid = IntermediateContext(h, z, tau);
    Vec64 prefix(tau);
    for (std::size_t t = 0; t < tau; ++t) prefix[t] = z[t];
    Vec64 padded = PaddedPrefixDual(prefix, frames);
    double mass = 0.0;
    for (std::size_t t = 0; t < frames; ++t) mass += padded[t];
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t t = tau; t < frames; ++t) CHECK(padded[t] == 0.0);
    Vec64 avg = GsaContext(padded, h);
    for (std::size_t i = 0; i < dim; ++i)
      worst = std::max(worst, std::fabs(mid[i] - avg[i]));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("additive score reduces to tanh of the pre-activation") {
  ScoreParams sp;
  sp.v = Vec64(1);
  sp.v[0] = 1.0;
  sp.w = Mat64(1, 3);  // d_s=1, d_h=1, plus the feedback slot
  sp.w.At(0, 1) = 1.0;
  sp.eta = Vec64(1);
  sp.v_beta = Vec64(1);
  const double s[1] = {0.0};
  const double h[1] = {1.0};
  const double e = AdditiveScore(sp, std::span<const double>(s, 1),
                                 std::span<const double>(h, 1), 0.0);
  CHECK(e == doctest::Approx(0.7615941559557649).epsilon(1e-15));
}

TEST_CASE("feedback scale and accumulation") {
  ScoreParams sp;
  sp.v = Vec64(1);
  sp.w = Mat64(1, 3);
  sp.eta = Vec64(1);
  sp.v_beta = Vec64(1);
  sp.v_beta[0] = std::log(3.0);
  const double h[1] = {1.0};
  CHECK(FeedbackScale(sp, std::span<const double>(h, 1)) ==
        doctest::Approx(0.75).epsilon(1e-15));
  FeedbackState fb(3);
  Vec64 alpha(3);
  alpha[1] = 0.5;
  fb.Accumulate(alpha);
  fb.Accumulate(alpha);
  CHECK(fb.cum[1] == 1.0);
  CHECK(fb.Beta(sp, std::span<const double>(h, 1), 1) ==
        doctest::Approx(0.75).epsilon(1e-15));
  CHECK(fb.Beta(sp, std::span<const double>(h, 1), 0) == 0.0);
}

TEST_CASE("softmax weights use the shared bias") {
  ScoreRow row;
  row.e = Vec64(2);
  row.e[0] = std::log(2.0);
  row.bias = 0.5;  // common shift cancels in the softmax
  Vec64 p = SoftmaxWeights(row);
  CHECK(p[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}
