// grc/streaming.cpp

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

#include "grc/streaming.hpp"

#include <cmath>

#include "grc/decode.hpp"
#include "grc/error.hpp"

namespace grc {

VectorSource::VectorSource(const Mat64& h) {
  rows_.reserve(h.rows());
  for (std::size_t t = 0; t < h.rows(); ++t) rows_.push_back(h.RowVec(t));
}

const Vec64& VectorSource::Row(std::size_t t) {
  Require(t < rows_.size(), "VectorSource::Row: out of range");
  return rows_[t];
}

StreamFeed::StreamFeed(std::chrono::milliseconds patience)
    : patience_(patience) {}

void StreamFeed::Push(const Vec64& row) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    Require(!closed_, "StreamFeed::Push: feed already closed");
    rows_.push_back(row);
  }
  cv_.notify_all();
}

void StreamFeed::Close() {
  {
    std::lock_guard<std::mutex> lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

bool StreamFeed::Await(std::size_t t) {
  std::unique_lock<std::mutex> lock(mu_);
  while (t >= rows_.size() && !closed_) {
    if (cv_.wait_for(lock, patience_) == std::cv_status::timeout &&
        t >= rows_.size() && !closed_)
      throw TimeoutError("encoded stream stalled past the patience window");
  }
  return t < rows_.size();
}

const Vec64& StreamFeed::Row(std::size_t t) {
  std::unique_lock<std::mutex> lock(mu_);
  Require(t < rows_.size(), "StreamFeed::Row: row not ready");
  return rows_[t];
}

std::size_t StreamFeed::Count() {
  std::unique_lock<std::mutex> lock(mu_);
  Require(closed_, "StreamFeed::Count: stream still open");
  return rows_.size();
}

StreamResult StreamDecode(const ModelParams& params, const AttentionSpec& spec,
                          EncodedSource* src, const StreamOptions& opts) {
  Require(src != nullptr, "StreamDecode: null source");
  if (spec.kind != AttentionKind::kDecGrc)
    throw ConfigError(
        "StreamDecode: the early-stop scan needs non-increasing gates");
  Require(opts.nu >= 0.0 && opts.nu <= 1.0,
          "StreamDecode: nu must lie in [0, 1]");
  Require(opts.max_len >= 1, "StreamDecode: max_len must be positive");
  const ModelDims& d = params.dims;
  const ScoreParams& sp = params.score;
  Require(src->Await(0), "StreamDecode: empty encoded stream");

  std::vector<double> cum;  // weight feedback up to the high-water frame
  Vec64 s(d.d_s);
  Vec64 c(d.d_h);
  int y_prev = kSosId;
  StreamResult out;

  for (std::size_t u = 0; u < opts.max_len; ++u) {
    s = DecoderStep(params, s, y_prev, c);

    RunningLogSumExp lse;
    std::vector<double> z_prefix;
    Vec64 dctx(d.d_h);
    double gate = 1.0;
    std::size_t t_end = 0;
    for (std::size_t t = 0;; ++t) {
      if (!src->Await(t)) {
        t_end = src->Count();
        break;
      }
      const Vec64& ht = src->Row(t);
      if (cum.size() <= t) cum.resize(t + 1, 0.0);
      double beta = FeedbackScale(sp, ht.View()) * cum[t];
      double e = AdditiveScore(sp, s.View(), ht.View(), beta);
      lse.Insert(e + sp.bias);
      double z;
      if (t == 0) {
        z = 1.0;
        for (std::size_t i = 0; i < d.d_h; ++i) dctx[i] = ht[i];
      } else {
        z = std::exp(-Softplus(lse.Value()));
        for (std::size_t i = 0; i < d.d_h; ++i)
          dctx[i] = (1.0 - z) * dctx[i] + z * ht[i];
      }
      z_prefix.push_back(z);
      gate = z;
      if (z < opts.nu) {
        t_end = t + 1;
        break;
      }
    }
    Require(t_end >= 1, "StreamDecode: scan consumed no frames");

    Vec64 alpha = DualWeights(Vec64::FromSpan(z_prefix));
    for (std::size_t t = 0; t < alpha.size(); ++t) cum[t] += alpha[t];
    out.endpoints.push_back({u + 1, t_end, gate});

    c = dctx;
    Vec64 probs = Readout(params, s, y_prev, c);
    auto [tok, lp] = GreedyPick(probs);
    out.logp += lp;
    if (tok == kEosId) return out;
    out.tokens.push_back(tok);
    y_prev = tok;
  }
  out.truncated = true;
  return out;
}

double EndpointFraction(std::span<const EndpointRecord> endpoints,
                        std::size_t frames) {
  Require(!endpoints.empty(), "EndpointFraction: no decoder steps");
  Require(frames >= 1, "EndpointFraction: no frames");
  std::size_t total = 0;
  for (const EndpointRecord& r : endpoints) {
    Require(r.t_end >= 1 && r.t_end <= frames,
            "EndpointFraction: endpoint out of range");
    total += r.t_end;
  }
  return static_cast<double>(total) /
         static_cast<double>(frames * endpoints.size());
}

}  // namespace grc
