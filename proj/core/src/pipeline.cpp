// pipeline.cpp

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

#include "grc/pipeline.hpp"

#include <algorithm>

#include "grc/decode.hpp"
#include "grc/error.hpp"
#include "grc/metrics.hpp"
#include "grc/rng.hpp"

namespace grc {
namespace {

// Independent random streams hanging off the one user-facing seed.
constexpr std::uint64_t kInitStream = 0x11;
constexpr std::uint64_t kDataStream = 0xD5;
constexpr std::uint64_t kShuffleStream = 0x5F;
constexpr std::uint64_t kEvalStream = 0xE7;

}  // namespace

namespace {

// Teacher-forced mean per-token cross entropy over a dataset.
double DevCrossEntropy(const ModelParams& params, const AttentionSpec& spec,
                       std::span<const Example> data) {
  double nll = 0.0;
  std::size_t tokens = 0;
  for (const Example& ex : data) {
    Mat64 h = Encode(params, ex.x);
    TeacherForcedResult r = TeacherForcedEval(params, spec, h, ex.y);
    nll += r.nll;
    tokens += r.tokens;
  }
  Require(tokens > 0, "DevCrossEntropy: empty dataset");
  return nll / static_cast<double>(tokens);
}

}  // namespace

TrainOutcome RunTrain(const RunConfig& cfg, std::size_t threads) {
  cfg.Validate();
  std::vector<Example> data =
      MakeDataset(cfg.task, cfg.train.examples,
                  MixSeed(cfg.train.seed, kDataStream));
  std::vector<Example> dev = EvalDataset(cfg);
  TrainOutcome out;
  out.config = cfg;
  out.spec = cfg.attention;
  out.params =
      ModelParams::GlorotInit(cfg.dims, MixSeed(cfg.train.seed, kInitStream));
  TrainConfig tc;
  tc.batch = cfg.train.batch;
  tc.threads = std::max<std::size_t>(1, threads);
  tc.adam.lr = cfg.train.lr;
  AdamOptimizer opt(ParamLayout::For(cfg.dims).total, tc.adam);
  Rng shuffle(MixSeed(cfg.train.seed, kShuffleStream));
  out.epoch_ce.reserve(cfg.train.epochs);
  out.epoch_dev_ce.reserve(cfg.train.epochs);
  for (std::size_t e = 0; e < cfg.train.epochs; ++e) {
    out.epoch_ce.push_back(
        TrainEpoch(&out.params, &opt, out.spec, data, tc, &shuffle));
    out.epoch_dev_ce.push_back(DevCrossEntropy(out.params, out.spec, dev));
  }
  return out;
}

std::vector<LossRow> LossCurve(const TrainOutcome& model) {
  Require(model.epoch_ce.size() == model.epoch_dev_ce.size(),
          "LossCurve: misaligned epoch records");
  std::vector<LossRow> rows(model.epoch_ce.size());
  for (std::size_t e = 0; e < rows.size(); ++e)
    rows[e] = {e + 1, model.epoch_ce[e], model.epoch_dev_ce[e]};
  return rows;
}

SyntheticTask EvalTask(const RunConfig& cfg) {
  SyntheticTask task = cfg.task;
  task.min_len = std::max<std::size_t>(2, task.max_len / 2);
  return task;
}

std::vector<Example> EvalDataset(const RunConfig& cfg) {
  return MakeDataset(EvalTask(cfg), cfg.eval.examples,
                     MixSeed(cfg.train.seed, kEvalStream));
}

TokenSequence StripEnd(const TokenSequence& y) {
  Require(!y.empty() && y.back() == kEosId,
          "StripEnd: target must end with the end id");
  return TokenSequence(y.begin(), y.end() - 1);
}

EvalOutcome RunEval(const TrainOutcome& model) {
  const RunConfig& cfg = model.config;
  std::vector<Example> data = EvalDataset(cfg);
  std::vector<TokenSequence> refs, hyps;
  refs.reserve(data.size());
  hyps.reserve(data.size());
  DecodeOptions opts;
  opts.beam = cfg.eval.beam;
  opts.max_len = cfg.eval.max_len;
  for (const Example& ex : data) {
    Mat64 h = Encode(model.params, ex.x);
    DecodeResult r = Decode(model.params, model.spec, h, opts);
    refs.push_back(StripEnd(ex.y));
    hyps.push_back(r.tokens);
  }
  return {TokenErrorRate(refs, hyps), data.size()};
}

SweepOutcome RunSweep(const TrainOutcome& model, std::span<const double> nus) {
  const RunConfig& cfg = model.config;
  if (model.spec.kind != AttentionKind::kDecGrc)
    throw ConfigError("sweep needs the cumulative-gate attention kind");
  if (nus.empty()) throw ConfigError("sweep: empty threshold list");
  std::vector<double> sorted(nus.begin(), nus.end());
  std::sort(sorted.begin(), sorted.end());
  for (double nu : sorted)
    if (!(nu >= 0.0 && nu <= 1.0))
      throw ConfigError("sweep: thresholds must lie in [0, 1]");
  std::vector<Example> data = EvalDataset(cfg);
  std::vector<Mat64> encoded;
  std::vector<TokenSequence> refs;
  encoded.reserve(data.size());
  refs.reserve(data.size());
  for (const Example& ex : data) {
    encoded.push_back(Encode(model.params, ex.x));
    refs.push_back(StripEnd(ex.y));
  }
  SweepOutcome out;
  for (std::size_t i = 0; i < data.size(); ++i)
    out.utt_ref_len.push_back(refs[i].size());
  for (double nu : sorted) {
    StreamOptions opts;
    opts.nu = nu;
    opts.max_len = cfg.eval.max_len;
    std::vector<TokenSequence> hyps;
    std::vector<double> utt_al, utt_frac;
    std::vector<std::size_t> utt_err;
    hyps.reserve(data.size());
    double al_sum = 0.0, frac_sum = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      VectorSource src(encoded[i]);
      StreamResult r = StreamDecode(model.params, model.spec, &src, opts);
      const std::size_t input_frames = data[i].x.rows();
      std::vector<std::size_t> g =
          ConsumedFrames(r.endpoints, cfg.dims, input_frames);
      const double al = AverageLaggingFrames(g, input_frames);
      const double frac = EndpointFraction(r.endpoints, encoded[i].rows());
      utt_al.push_back(al);
      utt_frac.push_back(frac);
      utt_err.push_back(EditDistance(refs[i], r.tokens));
      al_sum += al;
      frac_sum += frac;
      hyps.push_back(std::move(r.tokens));
    }
    SweepRow row;
    row.nu = nu;
    row.wer = TokenErrorRate(refs, hyps);
    row.al_frames = al_sum / static_cast<double>(data.size());
    row.al_seconds = row.al_frames * cfg.eval.frame_period;
    row.endpoint_fraction = frac_sum / static_cast<double>(data.size());
    out.rows.push_back(row);
    out.utt_al_frames.push_back(std::move(utt_al));
    out.utt_endpoint_fraction.push_back(std::move(utt_frac));
    out.utt_token_errors.push_back(std::move(utt_err));
  }
  return out;
}

std::vector<SweepDetailRow> SweepOutcome::Details() const {
  std::vector<SweepDetailRow> details;
  for (std::size_t n = 0; n < rows.size(); ++n) {
    for (std::size_t i = 0; i < utt_ref_len.size(); ++i) {
      SweepDetailRow d;
      d.nu = rows[n].nu;
      d.utt = i;
      d.al_frames = utt_al_frames[n][i];
      d.endpoint_fraction = utt_endpoint_fraction[n][i];
      d.token_errors = utt_token_errors[n][i];
      d.ref_len = utt_ref_len[i];
      details.push_back(d);
    }
  }
  return details;
}

StreamResult DecodeUtterance(const TrainOutcome& model, const Example& ex,
                             double nu, std::size_t max_len) {
  Mat64 h = Encode(model.params, ex.x);
  VectorSource src(h);
  StreamOptions opts;
  opts.nu = nu;
  opts.max_len = max_len;
  return StreamDecode(model.params, model.spec, &src, opts);
}

TeacherForcedResult AttentionDiagnostics(const TrainOutcome& model,
                                         const Example& ex) {
  Mat64 h = Encode(model.params, ex.x);
  return TeacherForcedEval(model.params, model.spec, h, ex.y);
}

}  // namespace grc
