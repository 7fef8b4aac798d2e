// numerics_test.cpp

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
#include <limits>

#include "doctest.h"
#include "grc/error.hpp"
#include "grc/numerics.hpp"
#include "grc/rng.hpp"
#include "testutil.hpp"

using namespace grc;

TEST_CASE("vector construction and views") {
  Vec64 v(3);
  CHECK(v.size() == 3);
  CHECK(v[0] == 0.0);
  v[1] = 2.5;
  const double raw[3] = {1.0, 2.0, 3.0};
  Vec64 w = Vec64::FromSpan(std::span<const double>(raw, 3));
  CHECK(w[2] == 3.0);
  CHECK(w.View().size() == 3);
  CHECK(w.MaxAbs() == 3.0);
  CHECK(w.AllFinite());
  w[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_FALSE(w.AllFinite());
}

TEST_CASE("matrix storage is row major") {
  Mat64 m(2, 3);
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  m.At(1, 2) = 7.0;
  CHECK(m.Row(1)[2] == 7.0);
  CHECK(m.RowVec(1)[2] == 7.0);
  CHECK(m.flat_size() == 6);
  CHECK(m.data()[5] == 7.0);
}

TEST_CASE("matvec against hand expansion") {
  Mat64 m(2, 2);
  m.At(0, 0) = 1.0;
  m.At(0, 1) = 2.0;
  m.At(1, 0) = 3.0;
  m.At(1, 1) = 4.0;
  Vec64 x(2);
  x[0] = 5.0;
  x[1] = 6.0;
  Vec64 y = MatVec(m, x);
  CHECK(y[0] == 17.0);
  CHECK(y[1] == 39.0);
  Vec64 y2(2);
  MatVecInto(m, x.View(), y2.MutableView());
  CHECK(y2[0] == 17.0);
  CHECK(y2[1] == 39.0);
}

TEST_CASE("dot product") {
  const double a[3] = {1.0, 2.0, 3.0};
  const double b[3] = {4.0, 5.0, 6.0};
  CHECK(Dot(std::span<const double>(a, 3), std::span<const double>(b, 3)) ==
        32.0);
}

TEST_CASE("logistic fixed points") {
  CHECK(Logistic(0.0) == 0.5);
  CHECK(Logistic(std::log(3.0)) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(Logistic(-std::log(3.0)) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(Logistic(800.0) == 1.0);
  CHECK(Logistic(-800.0) == 0.0);
  CHECK(Logistic(745.0) + Logistic(-745.0) ==
        doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("softplus extremes stay finite") {
  CHECK(Softplus(0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(Softplus(800.0) == 800.0);
  CHECK(Softplus(-800.0) == 0.0);
  CHECK(std::isfinite(Softplus(709.0)));
}

TEST_CASE("softmax of [ln 2, 0]") {
  const double e[2] = {std::log(2.0), 0.0};
  Vec64 p = StableSoftmax(std::span<const double>(e, 2));
  CHECK(p[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(p[0] + p[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("softmax survives huge scores") {
  const double e[3] = {1000.0, 999.0, -1000.0};
  Vec64 p = StableSoftmax(std::span<const double>(e, 3));
  CHECK(p.AllFinite());
  CHECK(p[0] + p[1] + p[2] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p[0] > p[1]);
  CHECK(p[2] == 0.0);
}

TEST_CASE("log-sum-exp identities") {
  const double e[2] = {0.0, 0.0};
  CHECK(LogSumExpOf(std::span<const double>(e, 2)) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-15));
  const double big[2] = {1000.0, 1000.0};
  CHECK(LogSumExpOf(std::span<const double>(big, 2)) ==
        doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("running log-sum-exp matches the batch form") {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.UniformInt(0, 15);
    Vec64 e = grc_test::RandomVec(&rng, n, trial % 3 == 0 ? 700.0 : 5.0);
    RunningLogSumExp run;
    for (std::size_t i = 0; i < n; ++i) run.Insert(e[i]);
    const double batch = LogSumExpOf(e.View());
    CHECK(run.Value() ==
          doctest::Approx(batch).epsilon(1e-12).scale(std::fabs(batch) + 1.0));
    CHECK(run.Count() == static_cast<int>(n));
  }
}

TEST_CASE("running log-sum-exp empty value") {
  RunningLogSumExp run;
  CHECK(run.Count() == 0);
  CHECK(run.Value() == -std::numeric_limits<double>::infinity());
}

TEST_CASE("generator determinism and ranges") {
  Rng a(42), b(42), c(43);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 64; ++i) {
    const std::uint64_t x = a.NextU64();
    if (x != b.NextU64()) all_equal = false;
    if (x != c.NextU64()) any_diff = true;
  }
  CHECK(all_equal);
  CHECK(any_diff);
  Rng r(5);
  bool lo_hit = false, hi_hit = false;
  for (int i = 0; i < 2000; ++i) {
    const double u = r.Uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const int k = r.UniformInt(2, 4);
    CHECK(k >= 2);
    CHECK(k <= 4);
    if (k == 2) lo_hit = true;
    if (k == 4) hi_hit = true;
  }
  CHECK(lo_hit);
  CHECK(hi_hit);
  CHECK(MixSeed(1, 2) != MixSeed(1, 3));
  CHECK(MixSeed(1, 2) != MixSeed(2, 2));
  CHECK(MixSeed(9, 9) == MixSeed(9, 9));
}

TEST_CASE("uniform range endpoints") {
  Rng r(11);
  for (int i = 0; i < 200; ++i) {
    const double u = r.Uniform(-2.0, 3.0);
    CHECK(u >= -2.0);
    CHECK(u < 3.0);
  }
}
