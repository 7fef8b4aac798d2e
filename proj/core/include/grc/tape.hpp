// grc/tape.hpp

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

#ifndef GRC_TAPE_HPP_
#define GRC_TAPE_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "grc/numerics.hpp"

namespace grc {

// Handle into a Tape. Valid only for the tape that produced it.
struct Value {
  std::uint32_t id = 0;
};

// Reverse-mode differentiation over an ordered list of primitive operations.
// Forward values are computed eagerly as operations are recorded; Backward()
// replays the list in exact reverse order, accumulating adjoints additively,
// so shared subexpressions are handled as a DAG. Every node is a row-major
// (rows x cols) block of doubles; vectors have cols == 1 and scalars are
// 1 x 1.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Value Input(const Vec64& v);
  Value Input(const Mat64& m);
  Value Scalar(double x);
  Value Zeros(std::size_t n);

  Value Add(Value a, Value b);
  Value Sub(Value a, Value b);
  Value Mul(Value a, Value b);  // elementwise
  Value Div(Value a, Value b);  // elementwise
  Value ScaleShift(Value a, double scale, double shift);
  Value ScalarMul(Value s, Value v);  // s is 1x1, broadcast multiply
  Value MatVec(Value m, Value x);
  Value Dot(Value a, Value b);
  Value Sum(Value a);
  Value Tanh(Value a);
  Value Logistic(Value a);
  Value Softmax(Value a);
  Value LogSumExp(Value a);
  // Prefix log-sum-exp: out[t] = log sum_{j<=t} exp(a[j]), evaluated with
  // the same running rescaled accumulation as RunningLogSumExp.
  Value CumLogSumExp(Value a);
  // Elementwise z = exp(-softplus(a)), the gate value of a cumulative
  // score log-sum; dz/da = -logistic(a) * z.
  Value GateFromLogSum(Value a);
  Value Concat(std::span<const Value> parts);
  // Contiguous view of the flat storage of a, reshaped to rows x cols.
  Value Slice(Value a, std::size_t offset, std::size_t rows, std::size_t cols);
  Value RowOf(Value m, std::size_t r);
  Value Pick(Value a, std::size_t i);  // 1x1
  Value Clamp(Value a, double lo, double hi);
  // sum_t weights[t] * items[t]; items are equal-length vectors.
  Value Combine(Value weights, std::span<const Value> items);

  std::size_t size() const { return nodes_.size(); }
  std::span<const double> ValueOf(Value v) const;
  double ScalarValueOf(Value v) const;
  std::span<const double> GradOf(Value v) const;
  std::pair<std::size_t, std::size_t> DimsOf(Value v) const;

  // Seeds d(seed)/d(seed) = 1 (seed must be 1x1) and sweeps the list in
  // reverse. Grads from any earlier Backward call are cleared first.
  void Backward(Value seed);

  void Reset() { nodes_.clear(); }

 private:
  enum class Op : std::uint8_t {
    kLeaf,
    kAdd,
    kSub,
    kMul,
    kDiv,
    kScaleShift,
    kScalarMul,
    kMatVec,
    kDot,
    kSum,
    kTanh,
    kLogistic,
    kSoftmax,
    kLogSumExp,
    kCumLogSumExp,
    kGateFromLogSum,
    kConcat,
    kSlice,
    kRow,
    kPick,
    kClamp,
    kCombine,
  };

  struct Node {
    Op op = Op::kLeaf;
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    double p0 = 0.0;
    double p1 = 0.0;
    std::size_t off = 0;
    std::vector<std::uint32_t> extra;
    std::vector<double> val;
    std::vector<double> grad;
  };

  Value Push(Node&& n);
  const Node& At(Value v) const;
  void BackwardNode(std::size_t i);

  std::vector<Node> nodes_;
};

// Max over coordinates of |g_tape - g_fd| / max(1e-8, |g_tape| + |g_fd|),
// where g_fd is the central difference (f(p + eps e_i) - f(p - eps e_i))
// / (2 eps). `build` must record a scalar output on the given tape using the
// supplied parameter leaf. A non-finite evaluation reports +infinity.
double GradCheckMaxRelError(
    const std::function<Value(Tape&, Value)>& build, const Vec64& params,
    double eps);

}  // namespace grc

#endif  // GRC_TAPE_HPP_
