// grc/streaming.hpp

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
//
// Online decoding over encoded rows that arrive one at a time. Each
// decoder step updates its recurrent state, then scans frames left to
// right, folding each into the running context; with the cumulative-gate
// attention the gates never increase past the first frame, so the scan can
// stop as soon as a gate falls below the threshold nu. At nu == 0 the scan
// always reaches the end of the stream and the decode is bit-identical to
// offline greedy decoding.

#ifndef GRC_STREAMING_HPP_
#define GRC_STREAMING_HPP_

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <mutex>
#include <span>
#include <vector>

#include "grc/model.hpp"

namespace grc {

// Where one decoder step stopped reading: step index u and frame count
// t_end are 1-based; gate is the update gate at the stop frame (the last
// gate of the stream when the scan ran to the end).
struct EndpointRecord {
  std::size_t u = 0;
  std::size_t t_end = 0;
  double gate = 1.0;
};

// Blocking supplier of encoded rows.
class EncodedSource {
 public:
  virtual ~EncodedSource() = default;
  // True once row t exists; false when the stream ended with at most t
  // rows.
  virtual bool Await(std::size_t t) = 0;
  // Valid after Await(t) returned true; the reference stays valid for the
  // life of the source.
  virtual const Vec64& Row(std::size_t t) = 0;
  // Total row count; callable once Await has returned false.
  virtual std::size_t Count() = 0;
};

// Source over rows that are all present up front.
class VectorSource final : public EncodedSource {
 public:
  explicit VectorSource(const Mat64& h);
  bool Await(std::size_t t) override { return t < rows_.size(); }
  const Vec64& Row(std::size_t t) override;
  std::size_t Count() override { return rows_.size(); }

 private:
  std::vector<Vec64> rows_;
};

// Source fed by a producer thread. Await blocks until the row arrives or
// the feed closes, and throws TimeoutError when the producer stalls for
// longer than the patience window.
class StreamFeed final : public EncodedSource {
 public:
  explicit StreamFeed(
      std::chrono::milliseconds patience = std::chrono::milliseconds(5000));

  void Push(const Vec64& row);
  void Close();

  bool Await(std::size_t t) override;
  const Vec64& Row(std::size_t t) override;
  std::size_t Count() override;

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::vector<Vec64> rows_;
  bool closed_ = false;
  std::chrono::milliseconds patience_;
};

struct StreamOptions {
  double nu = 0.0;
  std::size_t max_len = 64;
};

struct StreamResult {
  TokenSequence tokens;  // content tokens; the end id is consumed, not kept
  std::vector<EndpointRecord> endpoints;  // one per decoder step
  double logp = 0.0;
  bool truncated = false;  // hit max_len without emitting the end id
};

// Greedy decode over the source with the early-stop scan. Requires the
// cumulative-gate attention kind, whose gate row is non-increasing past
// the first frame.
StreamResult StreamDecode(const ModelParams& params, const AttentionSpec& spec,
                          EncodedSource* src, const StreamOptions& opts);

// sum(t_end) / (frames * steps).
double EndpointFraction(std::span<const EndpointRecord> endpoints,
                        std::size_t frames);

}  // namespace grc

#endif  // GRC_STREAMING_HPP_
