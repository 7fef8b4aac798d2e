// grc/numerics.cpp

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

#include "grc/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace grc {

bool Vec64::AllFinite() const {
  for (double x : v_) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

double Vec64::MaxAbs() const {
  double m = 0.0;
  for (double x : v_) m = std::max(m, std::fabs(x));
  return m;
}

bool Mat64::AllFinite() const {
  for (double x : v_) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

Vec64 MatVec(const Mat64& m, const Vec64& x) {
  Require(m.cols() == x.size(), "MatVec: dimension mismatch");
  Vec64 out(m.rows());
  MatVecInto(m, x.View(), out.MutableView());
  return out;
}

void MatVecInto(const Mat64& m, std::span<const double> x,
                std::span<double> out) {
  Require(m.cols() == x.size() && m.rows() == out.size(),
          "MatVecInto: dimension mismatch");
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double* row = m.data() + r * m.cols();
    double acc = 0.0;
    for (std::size_t c = 0; c < m.cols(); ++c) acc += row[c] * x[c];
    out[r] = acc;
  }
}

double Dot(std::span<const double> a, std::span<const double> b) {
  Require(a.size() == b.size(), "Dot: dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double Logistic(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  double t = std::exp(x);
  return t / (1.0 + t);
}

double Softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

Vec64 StableSoftmax(std::span<const double> e) {
  Require(!e.empty(), "StableSoftmax: empty input");
  double m = e[0];
  for (double x : e) m = std::max(m, x);
  Vec64 out(e.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    out[i] = std::exp(e[i] - m);
    sum += out[i];
  }
  for (std::size_t i = 0; i < e.size(); ++i) out[i] /= sum;
  return out;
}

double LogSumExpOf(std::span<const double> e) {
  Require(!e.empty(), "LogSumExpOf: empty input");
  double m = e[0];
  for (double x : e) m = std::max(m, x);
  double s = 0.0;
  for (double x : e) s += std::exp(x - m);
  return m + std::log(s);
}

void RunningLogSumExp::Insert(double e) {
  if (count_ == 0 || e > max_) {
    // Rescale the accumulated sum to the new maximum.
    scaled_sum_ = (count_ == 0) ? 1.0 : scaled_sum_ * std::exp(max_ - e) + 1.0;
    max_ = e;
  } else {
    scaled_sum_ += std::exp(e - max_);
  }
  ++count_;
}

double RunningLogSumExp::Value() const {
  if (count_ == 0) return -std::numeric_limits<double>::infinity();
  return max_ + std::log(scaled_sum_);
}

}  // namespace grc
