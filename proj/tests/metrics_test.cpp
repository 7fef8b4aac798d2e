// metrics_test.cpp

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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "grc/error.hpp"
#include "grc/metrics.hpp"
#include "grc/rng.hpp"
#include "testutil.hpp"

using namespace grc;

namespace {

// Full-table reference edit distance, kept independent of the library's
// rolling-row version.
std::size_t RefEdit(const TokenSequence& a, const TokenSequence& b) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  std::vector<std::vector<std::size_t>> d(n + 1,
                                          std::vector<std::size_t>(m + 1));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t sub = d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      d[i][j] = std::min({sub, d[i - 1][j] + 1, d[i][j - 1] + 1});
    }
  return d[n][m];
}

TokenSequence RandomTokens(Rng* rng, std::size_t max_len) {
  TokenSequence y(rng->UniformInt(0, static_cast<int>(max_len)));
  for (int& t : y) t = rng->UniformInt(2, 6);
  return y;
}

}  // namespace

TEST_CASE("gaussian stream is seed-deterministic and standard") {
  Rng a(201);
  Rng b(201);
  for (int i = 0; i < 100; ++i) CHECK(NextGaussian(&a) == NextGaussian(&b));
  Rng c(202);
  double sum = 0.0;
  double sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    double g = NextGaussian(&c);
    sum += g;
    sq += g * g;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::fabs(mean) < 0.05);
  CHECK(std::fabs(var - 1.0) < 0.1);
}

TEST_CASE("synthetic examples repeat one-hot frames per token") {
  SyntheticTask task;
  task.vocab = 8;
  task.min_len = 3;
  task.max_len = 3;
  task.repeat = 2;
  task.noise = 0.0;
  Rng rng(203);
  Example ex = GenExample(task, 7, &rng);
  CHECK(ex.id == 7);
  REQUIRE(ex.y.size() == 4);
  CHECK(ex.y.back() == kEosId);
  for (std::size_t u = 0; u + 1 < ex.y.size(); ++u) {
    CHECK(ex.y[u] >= 2);
    CHECK(ex.y[u] < static_cast<int>(task.vocab));
  }
  REQUIRE(ex.x.rows() == 6);
  REQUIRE(ex.x.cols() == task.vocab);
  for (std::size_t f = 0; f < ex.x.rows(); ++f) {
    const int tok = ex.y[f / task.repeat];
    for (std::size_t i = 0; i < task.vocab; ++i)
      CHECK(ex.x.At(f, i) == (static_cast<int>(i) == tok ? 1.0 : 0.0));
  }
}

TEST_CASE("datasets are reproducible and order-independent") {
  SyntheticTask task;
  std::vector<Example> a = MakeDataset(task, 8, 204);
  std::vector<Example> b = MakeDataset(task, 8, 204);
  std::vector<Example> c = MakeDataset(task, 3, 204);
  REQUIRE(a.size() == 8);
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(a[i].y == b[i].y);
    CHECK(grc_test::SameBits(
        std::span<const double>(a[i].x.data(), a[i].x.flat_size()),
        std::span<const double>(b[i].x.data(), b[i].x.flat_size())));
  }
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a[i].y == c[i].y);
    CHECK(grc_test::SameBits(
        std::span<const double>(a[i].x.data(), a[i].x.flat_size()),
        std::span<const double>(c[i].x.data(), c[i].x.flat_size())));
  }
}

TEST_CASE("edit distance hand cases") {
  CHECK(EditDistance({2, 3, 4}, {2, 3, 4}) == 0);
  CHECK(EditDistance({2, 3, 4}, {2, 5, 4}) == 1);
  CHECK(EditDistance({2}, {2, 3, 4}) == 2);
  CHECK(EditDistance({}, {2, 3}) == 2);
  CHECK(EditDistance({2, 3}, {}) == 2);
  CHECK(EditDistance({2, 3, 4, 5}, {3, 4, 5, 6}) == 2);
}

TEST_CASE("edit distance matches a full-table reference") {
  Rng rng(205);
  for (int trial = 0; trial < 200; ++trial) {
    TokenSequence a = RandomTokens(&rng, 12);
    TokenSequence b = RandomTokens(&rng, 12);
    CHECK(EditDistance(a, b) == RefEdit(a, b));
  }
}

TEST_CASE("edit distance is a metric") {
  Rng rng(206);
  for (int trial = 0; trial < 200; ++trial) {
    TokenSequence a = RandomTokens(&rng, 8);
    TokenSequence b = RandomTokens(&rng, 8);
    TokenSequence c = RandomTokens(&rng, 8);
    CHECK(EditDistance(a, b) == EditDistance(b, a));
    CHECK(EditDistance(a, c) <= EditDistance(a, b) + EditDistance(b, c));
    CHECK((EditDistance(a, b) == 0) == (a == b));
  }
}

TEST_CASE("token error rate pools errors over reference length") {
  std::vector<TokenSequence> refs = {{2, 3}, {4}};
  std::vector<TokenSequence> hyps = {{2, 4}, {4}};
  CHECK(TokenErrorRate(refs, hyps) == doctest::Approx(1.0 / 3.0));
  std::vector<TokenSequence> empty_hyp = {{2, 3}, {4}};
  std::vector<TokenSequence> none = {{}, {}};
  CHECK(TokenErrorRate(empty_hyp, none) == 1.0);
}

TEST_CASE("consumed frames apply stride, lookahead, cap, and running max") {
  ModelDims dims = grc_test::TinyDims();  // stride 2, lookahead 1
  std::vector<EndpointRecord> endpoints(3);
  endpoints[0] = {1, 2, 0.5};
  endpoints[1] = {2, 1, 0.5};
  endpoints[2] = {3, 3, 0.5};
  std::vector<std::size_t> g = ConsumedFrames(endpoints, dims, 20);
  REQUIRE(g.size() == 3);
  CHECK(g[0] == 5);
  CHECK(g[1] == 5);  // raw 3 lifted by the running maximum
  CHECK(g[2] == 7);
  std::vector<std::size_t> capped = ConsumedFrames(endpoints, dims, 5);
  CHECK(capped[0] == 5);
  CHECK(capped[1] == 5);
  CHECK(capped[2] == 5);
}

TEST_CASE("average lagging of the linear two-frame schedule is two") {
  std::vector<std::size_t> g = {2, 4, 6, 8, 10};
  CHECK(AverageLaggingFrames(g, 10) == 2.0);
}

TEST_CASE("average lagging of the fully-offline schedule is the input size") {
  std::vector<std::size_t> g = {10, 10, 10, 10, 10};
  CHECK(AverageLaggingFrames(g, 10) == 10.0);
  std::vector<std::size_t> one = {7};
  CHECK(AverageLaggingFrames(one, 7) == 7.0);
}

TEST_CASE("average lagging of ideal integer schedules stays above the bound") {
  // g(u) = max(1, ceil((u-1) |x| / |y|)) quantizes the zero-lag pipeline.
  auto ideal = [](std::size_t frames, std::size_t tokens) {
    std::vector<std::size_t> g(tokens);
    for (std::size_t u = 1; u <= tokens; ++u) {
      const double exact =
          static_cast<double>((u - 1) * frames) / static_cast<double>(tokens);
      g[u - 1] = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::ceil(exact)));
    }
    return g;
  };
  std::vector<std::size_t> g10 = ideal(10, 5);
  REQUIRE(g10 == std::vector<std::size_t>({1, 2, 4, 6, 8}));
  const double al10 = AverageLaggingFrames(g10, 10);
  CHECK(al10 == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(al10 >= 1.0 - 10.0 / 5.0);
  std::vector<std::size_t> g7 = ideal(7, 3);
  REQUIRE(g7 == std::vector<std::size_t>({1, 3, 5}));
  const double al7 = AverageLaggingFrames(g7, 7);
  CHECK(al7 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(al7 >= 1.0 - 7.0 / 3.0);
}

TEST_CASE("average lagging stops at the first full consumption") {
  // tau_g = 2: AL = (1/2) [(2 - 0) + (6 - 2)] = 3 with |x|=6, |y|=3.
  std::vector<std::size_t> g = {2, 6, 6};
  CHECK(AverageLaggingFrames(g, 6) == 3.0);
}

TEST_CASE("average lagging rejects malformed schedules") {
  std::vector<std::size_t> decreasing = {4, 3};
  CHECK_THROWS_AS(AverageLaggingFrames(decreasing, 5), ContractViolation);
  std::vector<std::size_t> beyond = {6};
  CHECK_THROWS_AS(AverageLaggingFrames(beyond, 5), ContractViolation);
  std::vector<std::size_t> empty;
  CHECK_THROWS_AS(AverageLaggingFrames(empty, 5), ContractViolation);
}
