// grc/tape.cpp

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

#include "grc/tape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace grc {

Value Tape::Push(Node&& n) {
  Require(nodes_.size() < std::numeric_limits<std::uint32_t>::max(),
          "Tape: node limit exceeded");
  nodes_.push_back(std::move(n));
  return Value{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

const Tape::Node& Tape::At(Value v) const {
  Require(v.id < nodes_.size(), "Tape: stale value handle");
  return nodes_[v.id];
}

Value Tape::Input(const Vec64& v) {
  Node n;
  n.op = Op::kLeaf;
  n.rows = static_cast<std::uint32_t>(v.size());
  n.cols = 1;
  n.val.assign(v.begin(), v.end());
  return Push(std::move(n));
}

Value Tape::Input(const Mat64& m) {
  Node n;
  n.op = Op::kLeaf;
  n.rows = static_cast<std::uint32_t>(m.rows());
  n.cols = static_cast<std::uint32_t>(m.cols());
  n.val.assign(m.data(), m.data() + m.flat_size());
  return Push(std::move(n));
}

Value Tape::Scalar(double x) {
  Node n;
  n.op = Op::kLeaf;
  n.rows = 1;
  n.cols = 1;
  n.val.assign(1, x);
  return Push(std::move(n));
}

Value Tape::Zeros(std::size_t n) { return Input(Vec64(n)); }

namespace {
void RequireSameSize(std::size_t a, std::size_t b, const char* what) {
  Require(a == b, std::string(what) + ": size mismatch");
}
}  // namespace

Value Tape::Add(Value a, Value b) {
  const Node& na = At(a);
  const Node& nb = At(b);
  RequireSameSize(na.val.size(), nb.val.size(), "Tape::Add");
  Node n;
  n.op = Op::kAdd;
  n.a = a.id;
  n.b = b.id;
  n.rows = na.rows;
  n.cols = na.cols;
  n.val.resize(na.val.size());
  for (std::size_t i = 0; i < n.val.size(); ++i)
    n.val[i] = na.val[i] + nb.val[i];
  return Push(std::move(n));
}

Value Tape::Sub(Value a, Value b) {
  const Node& na = At(a);
  const Node& nb = At(b);
  RequireSameSize(na.val.size(), nb.val.size(), "Tape::Sub");
  Node n;
  n.op = Op::kSub;
  n.a = a.id;
  n.b = b.id;
  n.rows = na.rows;
  n.cols = na.cols;
  n.val.resize(na.val.size());
  for (std::size_t i = 0; i < n.val.size(); ++i)
    n.val[i] = na.val[i] - nb.val[i];
  return Push(std::move(n));
}

Value Tape::Mul(Value a, Value b) {
  const Node& na = At(a);
  const Node& nb = At(b);
  RequireSameSize(na.val.size(), nb.val.size(), "Tape::Mul");
  Node n;
  n.op = Op::kMul;
  n.a = a.id;
  n.b = b.id;
  n.rows = na.rows;
  n.cols = na.cols;
  n.val.resize(na.val.size());
  for (std::size_t i = 0; i < n.val.size(); ++i)
    n.val[i] = na.val[i] * nb.val[i];
  return Push(std::move(n));
}

Value Tape::Div(Value a, Value b) {
  const Node& na = At(a);
  const Node& nb = At(b);
  RequireSameSize(na.val.size(), nb.val.size(), "Tape::Div");
  Node n;
  n.op = Op::kDiv;
  n.a = a.id;
  n.b = b.id;
  n.rows = na.rows;
  n.cols = na.cols;
  n.val.resize(na.val.size());
  for (std::size_t i = 0; i < n.val.size(); ++i)
    n.val[i] = na.val[i] / nb.val[i];
  return Push(std::move(n));
}

Value Tape::ScaleShift(Value a, double scale, double shift) {
  const Node& na = At(a);
  Node n;
  n.op = Op::kScaleShift;
  n.a = a.id;
  n.rows = na.rows;
  n.cols = na.cols;
  n.p0 = scale;
  n.p1 = shift;
  n.val.resize(na.val.size());
  for (std::size_t i = 0; i < n.val.size(); ++i)
    n.val[i] = scale * na.val[i] + shift;
  return Push(std::move(n));
}

Value Tape::ScalarMul(Value s, Value v) {
  const Node& ns = At(s);
  const Node& nv = At(v);
  Require(ns.val.size() == 1, "Tape::ScalarMul: scale must be 1x1");
  Node n;
  n.op = Op::kScalarMul;
  n.a = s.id;
  n.b = v.id;
  n.rows = nv.rows;
  n.cols = nv.cols;
  n.val.resize(nv.val.size());
  for (std::size_t i = 0; i < n.val.size(); ++i)
    n.val[i] = ns.val[0] * nv.val[i];
  return Push(std::move(n));
}

Value Tape::MatVec(Value m, Value x) {
  const Node& nm = At(m);
  const Node& nx = At(x);
  Require(nm.cols == nx.val.size(), "Tape::MatVec: dimension mismatch");
  Node n;
  n.op = Op::kMatVec;
  n.a = m.id;
  n.b = x.id;
  n.rows = nm.rows;
  n.cols = 1;
  n.val.resize(nm.rows);
  for (std::uint32_t r = 0; r < nm.rows; ++r) {
    const double* row = nm.val.data() + static_cast<std::size_t>(r) * nm.cols;
    double acc = 0.0;
    for (std::uint32_t c = 0; c < nm.cols; ++c) acc += row[c] * nx.val[c];
    n.val[r] = acc;
  }
  return Push(std::move(n));
}

Value Tape::Dot(Value a, Value b) {
  const Node& na = At(a);
  const Node& nb = At(b);
  RequireSameSize(na.val.size(), nb.val.size(), "Tape::Dot");
  Node n;
  n.op = Op::kDot;
  n.a = a.id;
  n.b = b.id;
  n.rows = 1;
  n.cols = 1;
  double acc = 0.0;
  for (std::size_t i = 0; i < na.val.size(); ++i) acc += na.val[i] * nb.val[i];
  n.val.assign(1, acc);
  return Push(std::move(n));
}

Value Tape::Sum(Value a) {
  const Node& na = At(a);
  Node n;
  n.op = Op::kSum;
  n.a = a.id;
  n.rows = 1;
  n.cols = 1;
  double acc = 0.0;
  for (double x : na.val) acc += x;
  n.val.assign(1, acc);
  return Push(std::move(n));
}

Value Tape::Tanh(Value a) {
  const Node& na = At(a);
  Node n;
  n.op = Op::kTanh;
  n.a = a.id;
  n.rows = na.rows;
  n.cols = na.cols;
  n.val.resize(na.val.size());
  for (std::size_t i = 0; i < n.val.size(); ++i) n.val[i] = std::tanh(na.val[i]);
  return Push(std::move(n));
}

Value Tape::Logistic(Value a) {
  const Node& na = At(a);
  Node n;
  n.op = Op::kLogistic;
  n.a = a.id;
  n.rows = na.rows;
  n.cols = na.cols;
  n.val.resize(na.val.size());
  for (std::size_t i = 0; i < n.val.size(); ++i)
    n.val[i] = grc::Logistic(na.val[i]);
  return Push(std::move(n));
}

Value Tape::Softmax(Value a) {
  const Node& na = At(a);
  Require(!na.val.empty(), "Tape::Softmax: empty input");
  Node n;
  n.op = Op::kSoftmax;
  n.a = a.id;
  n.rows = na.rows;
  n.cols = na.cols;
  Vec64 sm = StableSoftmax(na.val);
  n.val.assign(sm.begin(), sm.end());
  return Push(std::move(n));
}

Value Tape::LogSumExp(Value a) {
  const Node& na = At(a);
  Require(!na.val.empty(), "Tape::LogSumExp: empty input");
  Node n;
  n.op = Op::kLogSumExp;
  n.a = a.id;
  n.rows = 1;
  n.cols = 1;
  double m = na.val[0];
  for (double x : na.val) m = std::max(m, x);
  double s = 0.0;
  for (double x : na.val) s += std::exp(x - m);
  n.val.assign(1, m + std::log(s));
  return Push(std::move(n));
}

Value Tape::CumLogSumExp(Value a) {
  const Node& na = At(a);
  Require(!na.val.empty(), "Tape::CumLogSumExp: empty input");
  Node n;
  n.op = Op::kCumLogSumExp;
  n.a = a.id;
  n.rows = na.rows;
  n.cols = na.cols;
  n.val.resize(na.val.size());
  RunningLogSumExp lse;
  for (std::size_t t = 0; t < na.val.size(); ++t) {
    lse.Insert(na.val[t]);
    n.val[t] = lse.Value();
  }
  return Push(std::move(n));
}

Value Tape::GateFromLogSum(Value a) {
  const Node& na = At(a);
  Node n;
  n.op = Op::kGateFromLogSum;
  n.a = a.id;
  n.rows = na.rows;
  n.cols = na.cols;
  n.val.resize(na.val.size());
  for (std::size_t k = 0; k < na.val.size(); ++k)
    n.val[k] = std::exp(-Softplus(na.val[k]));
  return Push(std::move(n));
}

Value Tape::Concat(std::span<const Value> parts) {
  Require(!parts.empty(), "Tape::Concat: empty part list");
  Node n;
  n.op = Op::kConcat;
  std::size_t total = 0;
  for (Value p : parts) {
    n.extra.push_back(p.id);
    total += At(p).val.size();
  }
  n.rows = static_cast<std::uint32_t>(total);
  n.cols = 1;
  n.val.reserve(total);
  for (Value p : parts) {
    const Node& np = At(p);
    n.val.insert(n.val.end(), np.val.begin(), np.val.end());
  }
  return Push(std::move(n));
}

Value Tape::Slice(Value a, std::size_t offset, std::size_t rows,
                  std::size_t cols) {
  const Node& na = At(a);
  Require(offset + rows * cols <= na.val.size(),
          "Tape::Slice: out of range");
  Node n;
  n.op = Op::kSlice;
  n.a = a.id;
  n.rows = static_cast<std::uint32_t>(rows);
  n.cols = static_cast<std::uint32_t>(cols);
  n.off = offset;
  n.val.assign(na.val.begin() + offset, na.val.begin() + offset + rows * cols);
  return Push(std::move(n));
}

Value Tape::RowOf(Value m, std::size_t r) {
  const Node& nm = At(m);
  Require(r < nm.rows, "Tape::RowOf: row out of range");
  return Slice(m, r * nm.cols, nm.cols, 1);
}

Value Tape::Pick(Value a, std::size_t i) {
  const Node& na = At(a);
  Require(i < na.val.size(), "Tape::Pick: index out of range");
  Node n;
  n.op = Op::kPick;
  n.a = a.id;
  n.rows = 1;
  n.cols = 1;
  n.off = i;
  n.val.assign(1, na.val[i]);
  return Push(std::move(n));
}

Value Tape::Clamp(Value a, double lo, double hi) {
  const Node& na = At(a);
  Node n;
  n.op = Op::kClamp;
  n.a = a.id;
  n.rows = na.rows;
  n.cols = na.cols;
  n.p0 = lo;
  n.p1 = hi;
  n.val.resize(na.val.size());
  for (std::size_t i = 0; i < n.val.size(); ++i)
    n.val[i] = std::min(std::max(na.val[i], lo), hi);
  return Push(std::move(n));
}

Value Tape::Combine(Value weights, std::span<const Value> items) {
  const Node& nw = At(weights);
  Require(nw.val.size() == items.size(),
          "Tape::Combine: weight count must match item count");
  Require(!items.empty(), "Tape::Combine: empty item list");
  std::size_t d = At(items[0]).val.size();
  Node n;
  n.op = Op::kCombine;
  n.a = weights.id;
  n.rows = static_cast<std::uint32_t>(d);
  n.cols = 1;
  n.val.assign(d, 0.0);
  for (std::size_t t = 0; t < items.size(); ++t) {
    const Node& ni = At(items[t]);
    RequireSameSize(ni.val.size(), d, "Tape::Combine");
    n.extra.push_back(items[t].id);
    double w = nw.val[t];
    for (std::size_t i = 0; i < d; ++i) n.val[i] += w * ni.val[i];
  }
  return Push(std::move(n));
}

std::span<const double> Tape::ValueOf(Value v) const { return At(v).val; }

double Tape::ScalarValueOf(Value v) const {
  const Node& n = At(v);
  Require(n.val.size() == 1, "Tape::ScalarValueOf: node is not 1x1");
  return n.val[0];
}

std::span<const double> Tape::GradOf(Value v) const { return At(v).grad; }

std::pair<std::size_t, std::size_t> Tape::DimsOf(Value v) const {
  const Node& n = At(v);
  return {n.rows, n.cols};
}

void Tape::Backward(Value seed) {
  const Node& s = At(seed);
  Require(s.val.size() == 1, "Tape::Backward: seed must be 1x1");
  for (Node& n : nodes_) n.grad.assign(n.val.size(), 0.0);
  nodes_[seed.id].grad[0] = 1.0;
  for (std::size_t i = seed.id + 1; i-- > 0;) BackwardNode(i);
}

void Tape::BackwardNode(std::size_t i) {
  Node& n = nodes_[i];
  bool any = false;
  for (double g : n.grad) {
    if (g != 0.0) {
      any = true;
      break;
    }
  }
  if (!any) return;
  switch (n.op) {
    case Op::kLeaf:
      break;
    case Op::kAdd: {
      Node& a = nodes_[n.a];
      Node& b = nodes_[n.b];
      for (std::size_t k = 0; k < n.grad.size(); ++k) {
        a.grad[k] += n.grad[k];
        b.grad[k] += n.grad[k];
      }
      break;
    }
    case Op::kSub: {
      Node& a = nodes_[n.a];
      Node& b = nodes_[n.b];
      for (std::size_t k = 0; k < n.grad.size(); ++k) {
        a.grad[k] += n.grad[k];
        b.grad[k] -= n.grad[k];
      }
      break;
    }
    case Op::kMul: {
      Node& a = nodes_[n.a];
      Node& b = nodes_[n.b];
      for (std::size_t k = 0; k < n.grad.size(); ++k) {
        a.grad[k] += n.grad[k] * b.val[k];
        b.grad[k] += n.grad[k] * a.val[k];
      }
      break;
    }
    case Op::kDiv: {
      Node& a = nodes_[n.a];
      Node& b = nodes_[n.b];
      for (std::size_t k = 0; k < n.grad.size(); ++k) {
        a.grad[k] += n.grad[k] / b.val[k];
        b.grad[k] -= n.grad[k] * n.val[k] / b.val[k];
      }
      break;
    }
    case Op::kScaleShift: {
      Node& a = nodes_[n.a];
      for (std::size_t k = 0; k < n.grad.size(); ++k)
        a.grad[k] += n.grad[k] * n.p0;
      break;
    }
    case Op::kScalarMul: {
      Node& s = nodes_[n.a];
      Node& v = nodes_[n.b];
      double acc = 0.0;
      for (std::size_t k = 0; k < n.grad.size(); ++k) {
        acc += n.grad[k] * v.val[k];
        v.grad[k] += n.grad[k] * s.val[0];
      }
      s.grad[0] += acc;
      break;
    }
    case Op::kMatVec: {
      Node& m = nodes_[n.a];
      Node& x = nodes_[n.b];
      for (std::uint32_t r = 0; r < m.rows; ++r) {
        double g = n.grad[r];
        if (g == 0.0) continue;
        double* mrow_g = m.grad.data() + static_cast<std::size_t>(r) * m.cols;
        const double* mrow =
            m.val.data() + static_cast<std::size_t>(r) * m.cols;
        for (std::uint32_t c = 0; c < m.cols; ++c) {
          mrow_g[c] += g * x.val[c];
          x.grad[c] += g * mrow[c];
        }
      }
      break;
    }
    case Op::kDot: {
      Node& a = nodes_[n.a];
      Node& b = nodes_[n.b];
      double g = n.grad[0];
      for (std::size_t k = 0; k < a.val.size(); ++k) {
        a.grad[k] += g * b.val[k];
        b.grad[k] += g * a.val[k];
      }
      break;
    }
    case Op::kSum: {
      Node& a = nodes_[n.a];
      double g = n.grad[0];
      for (std::size_t k = 0; k < a.val.size(); ++k) a.grad[k] += g;
      break;
    }
    case Op::kTanh: {
      Node& a = nodes_[n.a];
      for (std::size_t k = 0; k < n.grad.size(); ++k)
        a.grad[k] += n.grad[k] * (1.0 - n.val[k] * n.val[k]);
      break;
    }
    case Op::kLogistic: {
      Node& a = nodes_[n.a];
      for (std::size_t k = 0; k < n.grad.size(); ++k)
        a.grad[k] += n.grad[k] * n.val[k] * (1.0 - n.val[k]);
      break;
    }
    case Op::kSoftmax: {
      Node& a = nodes_[n.a];
      double inner = 0.0;
      for (std::size_t k = 0; k < n.grad.size(); ++k)
        inner += n.grad[k] * n.val[k];
      for (std::size_t k = 0; k < n.grad.size(); ++k)
        a.grad[k] += n.val[k] * (n.grad[k] - inner);
      break;
    }
    case Op::kLogSumExp: {
      Node& a = nodes_[n.a];
      double g = n.grad[0];
      double lse = n.val[0];
      for (std::size_t k = 0; k < a.val.size(); ++k)
        a.grad[k] += g * std::exp(a.val[k] - lse);
      break;
    }
    case Op::kCumLogSumExp: {
      Node& a = nodes_[n.a];
      // dL_t/de_j = exp(e_j - L_t) for j <= t.
      for (std::size_t t = 0; t < n.val.size(); ++t) {
        double g = n.grad[t];
        if (g == 0.0) continue;
        for (std::size_t j = 0; j <= t; ++j)
          a.grad[j] += g * std::exp(a.val[j] - n.val[t]);
      }
      break;
    }
    case Op::kGateFromLogSum: {
      Node& a = nodes_[n.a];
      for (std::size_t k = 0; k < n.grad.size(); ++k)
        a.grad[k] += -n.grad[k] * grc::Logistic(a.val[k]) * n.val[k];
      break;
    }
    case Op::kConcat: {
      std::size_t off = 0;
      for (std::uint32_t id : n.extra) {
        Node& p = nodes_[id];
        for (std::size_t k = 0; k < p.val.size(); ++k)
          p.grad[k] += n.grad[off + k];
        off += p.val.size();
      }
      break;
    }
    case Op::kSlice: {
      Node& a = nodes_[n.a];
      for (std::size_t k = 0; k < n.grad.size(); ++k)
        a.grad[n.off + k] += n.grad[k];
      break;
    }
    case Op::kPick: {
      Node& a = nodes_[n.a];
      a.grad[n.off] += n.grad[0];
      break;
    }
    case Op::kClamp: {
      Node& a = nodes_[n.a];
      for (std::size_t k = 0; k < n.grad.size(); ++k) {
        if (a.val[k] > n.p0 && a.val[k] < n.p1) a.grad[k] += n.grad[k];
      }
      break;
    }
    case Op::kCombine: {
      Node& w = nodes_[n.a];
      for (std::size_t t = 0; t < n.extra.size(); ++t) {
        Node& item = nodes_[n.extra[t]];
        double acc = 0.0;
        for (std::size_t k = 0; k < n.grad.size(); ++k) {
          acc += n.grad[k] * item.val[k];
          item.grad[k] += n.grad[k] * w.val[t];
        }
        w.grad[t] += acc;
      }
      break;
    }
    case Op::kRow:
      break;  // expressed as kSlice
  }
}

double GradCheckMaxRelError(
    const std::function<Value(Tape&, Value)>& build, const Vec64& params,
    double eps) {
  Require(eps > 0.0, "GradCheckMaxRelError: eps must be positive");
  const double kInf = std::numeric_limits<double>::infinity();

  Tape tape;
  Value leaf = tape.Input(params);
  Value out = build(tape, leaf);
  double f0 = tape.ScalarValueOf(out);
  if (!std::isfinite(f0)) return kInf;
  tape.Backward(out);
  std::vector<double> g_tape(tape.GradOf(leaf).begin(),
                             tape.GradOf(leaf).end());

  auto eval = [&build](const Vec64& p) {
    Tape t;
    Value l = t.Input(p);
    Value o = build(t, l);
    return t.ScalarValueOf(o);
  };

  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Vec64 hi = params;
    Vec64 lo = params;
    hi[i] += eps;
    lo[i] -= eps;
    double f_hi = eval(hi);
    double f_lo = eval(lo);
    if (!std::isfinite(f_hi) || !std::isfinite(f_lo)) return kInf;
    double g_fd = (f_hi - f_lo) / (2.0 * eps);
    double num = std::fabs(g_tape[i] - g_fd);
    double den = std::max(1e-8, std::fabs(g_tape[i]) + std::fabs(g_fd));
    worst = std::max(worst, num / den);
  }
  return worst;
}

}  // namespace grc
