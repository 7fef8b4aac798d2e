// grc/pipeline.hpp

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
// End-to-end runs on the synthetic copy task: training, offline
// evaluation, and the latency/accuracy sweep over stopping thresholds.

#ifndef GRC_PIPELINE_HPP_
#define GRC_PIPELINE_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "grc/config.hpp"
#include "grc/io.hpp"
#include "grc/model.hpp"
#include "grc/streaming.hpp"
#include "grc/train.hpp"

namespace grc {

struct TrainOutcome {
  ModelParams params;
  AttentionSpec spec;
  RunConfig config;
  std::vector<double> epoch_ce;      // mean per-token training cross entropy
  std::vector<double> epoch_dev_ce;  // teacher-forced held-out cross entropy
};

TrainOutcome RunTrain(const RunConfig& cfg, std::size_t threads);

std::vector<LossRow> LossCurve(const TrainOutcome& model);

// Held-out task: same distribution but only the upper half of the length
// range, so evaluation skews toward the longer utterances.
SyntheticTask EvalTask(const RunConfig& cfg);
std::vector<Example> EvalDataset(const RunConfig& cfg);

// Reference content tokens: the target without its trailing end id.
TokenSequence StripEnd(const TokenSequence& y);

struct EvalOutcome {
  double token_error = 0.0;
  std::size_t examples = 0;
};

// Offline decode of the held-out set against the references.
EvalOutcome RunEval(const TrainOutcome& model);

struct SweepOutcome {
  std::vector<SweepRow> rows;  // one per threshold, sorted by threshold
  // Per-threshold, per-utterance diagnostics aligned with the held-out set.
  std::vector<std::vector<double>> utt_al_frames;
  std::vector<std::vector<double>> utt_endpoint_fraction;
  std::vector<std::vector<std::size_t>> utt_token_errors;
  std::vector<std::size_t> utt_ref_len;

  std::vector<SweepDetailRow> Details() const;
};

// Streaming decode of the held-out set at each stopping threshold.
// Requires the cumulative-gate attention kind.
SweepOutcome RunSweep(const TrainOutcome& model, std::span<const double> nus);

// Streaming decode of one utterance.
StreamResult DecodeUtterance(const TrainOutcome& model, const Example& ex,
                             double nu, std::size_t max_len);

// Teacher-forced attention weights and gates for one utterance, one row
// per output token, for rendering.
TeacherForcedResult AttentionDiagnostics(const TrainOutcome& model,
                                         const Example& ex);

}  // namespace grc

#endif  // GRC_PIPELINE_HPP_
