// grc/numerics.hpp

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

#ifndef GRC_NUMERICS_HPP_
#define GRC_NUMERICS_HPP_

#include <cstddef>
#include <initializer_list>
#include <limits>
#include <span>
#include <vector>

#include "grc/error.hpp"

namespace grc {

// Fixed-size 64-bit float vector. The size is set at construction and never
// changes through the public interface.
class Vec64 {
 public:
  Vec64() = default;
  explicit Vec64(std::size_t n, double fill = 0.0) : v_(n, fill) {}
  Vec64(std::initializer_list<double> xs) : v_(xs) {}
  static Vec64 FromSpan(std::span<const double> xs) {
    Vec64 out;
    out.v_.assign(xs.begin(), xs.end());
    return out;
  }

  std::size_t size() const { return v_.size(); }
  bool empty() const { return v_.empty(); }
  double operator[](std::size_t i) const { return v_[i]; }
  double& operator[](std::size_t i) { return v_[i]; }
  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  std::span<const double> View() const { return v_; }
  std::span<double> MutableView() { return v_; }
  auto begin() const { return v_.begin(); }
  auto end() const { return v_.end(); }

  bool AllFinite() const;
  double MaxAbs() const;

 private:
  std::vector<double> v_;
};

// Row-major matrix of 64-bit floats with immutable dimensions.
class Mat64 {
 public:
  Mat64() = default;
  Mat64(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), v_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double At(std::size_t r, std::size_t c) const { return v_[r * cols_ + c]; }
  double& At(std::size_t r, std::size_t c) { return v_[r * cols_ + c]; }
  std::span<const double> Row(std::size_t r) const {
    return std::span<const double>(v_).subspan(r * cols_, cols_);
  }
  std::span<double> MutableRow(std::size_t r) {
    return std::span<double>(v_).subspan(r * cols_, cols_);
  }
  Vec64 RowVec(std::size_t r) const { return Vec64::FromSpan(Row(r)); }
  const double* data() const { return v_.data(); }
  double* data() { return v_.data(); }
  std::size_t flat_size() const { return v_.size(); }
  bool AllFinite() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> v_;
};

// y = M x with a deterministic left-to-right accumulation per row.
Vec64 MatVec(const Mat64& m, const Vec64& x);
void MatVecInto(const Mat64& m, std::span<const double> x,
                std::span<double> out);

double Dot(std::span<const double> a, std::span<const double> b);

// 1 / (1 + exp(-x)), overflow-safe on the whole double range.
double Logistic(double x);

// log(1 + exp(x)), overflow-safe.
double Softplus(double x);

// Max-shifted softmax over arbitrary finite scores. Empty input is a
// contract violation.
Vec64 StableSoftmax(std::span<const double> e);

// Max-shifted log(sum(exp(e))) over a whole row.
double LogSumExpOf(std::span<const double> e);

// Streaming log-sum-exp accumulator: keeps the running maximum and the sum
// of exponentials scaled by it, so inserting scores up to +-700 never
// overflows. Value() of an empty accumulator is -infinity.
class RunningLogSumExp {
 public:
  void Insert(double e);
  double Value() const;
  int Count() const { return count_; }

 private:
  double max_ = -std::numeric_limits<double>::infinity();
  double scaled_sum_ = 0.0;
  int count_ = 0;
};

}  // namespace grc

#endif  // GRC_NUMERICS_HPP_
