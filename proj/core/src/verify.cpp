// verify.cpp

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

#include "grc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <vector>

#include "grc/attention.hpp"
#include "grc/baselines.hpp"
#include "grc/checkpoint.hpp"
#include "grc/config.hpp"
#include "grc/error.hpp"
#include "grc/metrics.hpp"
#include "grc/model.hpp"
#include "grc/model_diff.hpp"
#include "grc/rng.hpp"
#include "grc/tape.hpp"
#include "grc/train.hpp"

namespace grc {
namespace {

std::string Sci(double x) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.3e", x);
  return std::string(buf);
}

Vec64 RandomGates(Rng* rng, std::size_t n) {
  Vec64 z(n);
  z[0] = 1.0;
  for (std::size_t t = 1; t < n; ++t) z[t] = rng->Uniform();
  return z;
}

Vec64 RandomSimplex(Rng* rng, std::size_t n) {
  Vec64 e(n);
  for (std::size_t t = 0; t < n; ++t) e[t] = rng->Uniform(-4.0, 4.0);
  return StableSoftmax(e.View());
}

Mat64 RandomStates(Rng* rng, std::size_t rows, std::size_t cols) {
  Mat64 h(rows, cols);
  for (std::size_t t = 0; t < rows; ++t)
    for (std::size_t i = 0; i < cols; ++i) h.At(t, i) = rng->Uniform(-2.0, 2.0);
  return h;
}

// Recurrent gated blend against the explicit weighted sum of the same frames.
VerifyCheck CheckDuality(const VerifyOptions& opts, bool fault) {
  Rng rng(MixSeed(opts.seed, 101));
  double worst = 0.0;
  for (std::size_t trial = 0; trial < opts.trials; ++trial) {
    const std::size_t frames = 1 + rng.UniformInt(0, 63);
    const std::size_t dim = 1 + rng.UniformInt(0, 15);
    Vec64 z = RandomGates(&rng, frames);
    Mat64 h = RandomStates(&rng, frames, dim);
    Vec64 direct = GrcContext(h, z);
    Vec64 alpha = DualWeights(z);
    double mass = 0.0;
    for (std::size_t t = 0; t < frames; ++t) mass += alpha[t];
    worst = std::max(worst, std::fabs(mass - 1.0));
    Vec64 weighted = GsaContext(alpha, h);
    if (fault && trial == 0) weighted[0] += 1e-6;
    for (std::size_t i = 0; i < dim; ++i)
      worst = std::max(worst, std::fabs(direct[i] - weighted[i]));
  }
  return {"duality", worst <= 1e-12, "max abs err " + Sci(worst)};
}

VerifyCheck CheckDualRoundtrip(const VerifyOptions& opts, bool fault) {
  Rng rng(MixSeed(opts.seed, 102));
  double worst = 0.0;
  for (std::size_t trial = 0; trial < opts.trials; ++trial) {
    const std::size_t frames = 1 + rng.UniformInt(0, 63);
    Vec64 alpha = RandomSimplex(&rng, frames);
    Vec64 z = InverseDual(alpha);
    Vec64 back = DualWeights(z);
    if (fault && trial == 0) back[frames - 1] += 1e-6;
    for (std::size_t t = 0; t < frames; ++t)
      worst = std::max(worst, std::fabs(alpha[t] - back[t]));
  }
  return {"dual-roundtrip", worst <= 1e-9, "max abs err " + Sci(worst)};
}

// Cumulative gates may never increase after the first step, and the
// log-domain evaluation has to track the direct formula in its safe range.
VerifyCheck CheckGateMonotone(const VerifyOptions& opts, bool fault) {
  Rng rng(MixSeed(opts.seed, 103));
  bool monotone = true;
  double worst_rel = 0.0;
  for (std::size_t trial = 0; trial < opts.trials; ++trial) {
    const std::size_t frames = 2 + rng.UniformInt(0, 62);
    const bool extreme = trial % 4 == 0;
    ScoreRow row;
    row.bias = rng.Uniform(-1.0, 1.0);
    row.e = Vec64(frames);
    const double span = extreme ? 700.0 : 50.0;
    for (std::size_t t = 0; t < frames; ++t)
      row.e[t] = rng.Uniform(-span, span);
    Vec64 z = DecGrcGates(row);
    if (fault && trial == 0) z[frames - 1] = z[frames - 2] + 0.1;
    for (std::size_t t = 2; t < frames; ++t)
      if (z[t] > z[t - 1]) monotone = false;
    if (!extreme) {
      double cum = 0.0;
      for (std::size_t t = 0; t < frames; ++t) {
        cum += std::exp(row.e[t] + row.bias);
        if (t == 0) continue;
        const double direct = 1.0 / (1.0 + cum);
        worst_rel = std::max(worst_rel, std::fabs(z[t] - direct) /
                                            std::max(direct, 1e-300));
      }
    }
  }
  const bool pass = monotone && worst_rel <= 1e-12;
  return {"gate-monotone",
          pass,
          std::string(monotone ? "monotone" : "violated") + ", direct rel err " +
              Sci(worst_rel)};
}

// After every gate falls below a threshold, the remaining updates can move the
// blend by at most threshold * horizon * largest step magnitude.
VerifyCheck CheckTruncationBound(const VerifyOptions& opts, bool fault) {
  Rng rng(MixSeed(opts.seed, 104));
  double worst_slack = 0.0;
  std::size_t tested = 0;
  const double nus[3] = {1e-3, 1e-2, 1e-1};
  for (std::size_t trial = 0; trial < opts.trials; ++trial) {
    const std::size_t frames = 4 + rng.UniformInt(0, 60);
    const std::size_t dim = 1 + rng.UniformInt(0, 15);
    const double nu = nus[rng.UniformInt(0, 2)];
    ScoreRow row;
    row.bias = 0.0;
    row.e = Vec64(frames);
    for (std::size_t t = 0; t < frames; ++t) row.e[t] = rng.Uniform(-3.0, 3.0);
    Vec64 z = DecGrcGates(row);
    std::size_t tb = frames;
    for (std::size_t t = 1; t < frames; ++t)
      if (z[t] < nu) {
        tb = t;
        break;
      }
    if (tb + 1 >= frames) continue;
    ++tested;
    Mat64 h = RandomStates(&rng, frames, dim);
    // Once past the first sub-threshold gate, all later gates are below it
    // too, so the per-step movement is bounded by nu times the step size.
    ContextTrace trace = GrcRecurse(h, z);
    double gap = 0.0;
    for (std::size_t i = 0; i < dim; ++i)
      gap = std::max(gap, std::fabs(trace.d.At(frames - 1, i) -
                                    trace.d.At(tb, i)));
    double step = 0.0;
    for (std::size_t t = tb + 1; t < frames; ++t) {
      double hmax = 0.0, dmax = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        hmax = std::max(hmax, std::fabs(h.At(t, i)));
        dmax = std::max(dmax, std::fabs(trace.d.At(t - 1, i)));
      }
      step = std::max(step, hmax + dmax);
    }
    double bound = nu * static_cast<double>(frames - 1 - tb) * step;
    if (fault && worst_slack == 0.0) bound = gap * 0.5;
    worst_slack = std::max(worst_slack, gap - bound);
  }
  return {"truncation-bound", worst_slack <= 0.0,
          "tested " + std::to_string(tested) + ", worst slack " +
              Sci(worst_slack)};
}

VerifyCheck CheckMochaMass(const VerifyOptions& opts, bool fault) {
  Rng rng(MixSeed(opts.seed, 105));
  double worst = 0.0;
  for (std::size_t trial = 0; trial < opts.trials; ++trial) {
    const std::size_t frames = 2 + rng.UniformInt(0, 62);
    const std::size_t w = 1 + rng.UniformInt(0, 3);
    Vec64 p(frames);
    for (std::size_t t = 0; t < frames; ++t) p[t] = rng.Uniform();
    Vec64 alpha_prev(frames);
    alpha_prev[0] = 1.0;
    Vec64 alpha = MochaTrainAlpha(p, alpha_prev);
    ScoreRow chunk;
    chunk.bias = rng.Uniform(-1.0, 1.0);
    chunk.e = Vec64(frames);
    for (std::size_t t = 0; t < frames; ++t)
      chunk.e[t] = rng.Uniform(-3.0, 3.0);
    Vec64 beta = MochaTrainBeta(alpha, chunk, w);
    double sa = 0.0, sb = 0.0;
    for (std::size_t t = 0; t < frames; ++t) {
      sa += alpha[t];
      sb += beta[t];
    }
    if (fault && trial == 0) sb += 1e-6;
    worst = std::max(worst, std::fabs(sa - sb));
  }
  return {"mocha-mass", worst <= 1e-9, "max abs mass gap " + Sci(worst)};
}

VerifyCheck CheckMochaEndpoints(const VerifyOptions& opts, bool fault) {
  Rng rng(MixSeed(opts.seed, 106));
  bool monotone = true;
  for (std::size_t trial = 0; trial < opts.trials; ++trial) {
    const std::size_t frames = 2 + rng.UniformInt(0, 30);
    const std::size_t w = 1 + rng.UniformInt(0, 3);
    std::size_t steps = 1 + rng.UniformInt(0, 7);
    if (fault && trial == 0) steps = std::max<std::size_t>(steps, 2);
    Mat64 h = RandomStates(&rng, frames, 3);
    MonotonicState mono;
    std::size_t prev_tau = 0;
    for (std::size_t u = 0; u < steps; ++u) {
      ScoreRow sel, chunk;
      sel.bias = rng.Uniform(-2.0, 2.0);
      chunk.bias = 0.0;
      sel.e = Vec64(frames);
      chunk.e = Vec64(frames);
      for (std::size_t t = 0; t < frames; ++t) {
        sel.e[t] = rng.Uniform(-3.0, 3.0);
        chunk.e[t] = rng.Uniform(-3.0, 3.0);
      }
      if (fault && trial == 0 && u == 0) {
        for (std::size_t t = 0; t < frames; ++t) sel.e[t] = -100.0;
        sel.e[frames - 1] = 100.0;
        sel.bias = 0.0;
      }
      MochaInferResult step = MochaInfer(sel, chunk, h, &mono, w);
      std::size_t tau_now = mono.tau_prev;
      if (fault && trial == 0 && u == 1) tau_now = 0;
      if (u > 0 && tau_now < prev_tau) monotone = false;
      prev_tau = tau_now;
      (void)step;
    }
  }
  return {"mocha-endpoints", monotone,
          monotone ? "non-decreasing" : "regressed"};
}

// Survival-style weights traversed from the far end coincide with the gated
// blend weights of the reversed gate row.
VerifyCheck CheckSmochaDual(const VerifyOptions& opts, bool fault) {
  Rng rng(MixSeed(opts.seed, 107));
  double worst = 0.0;
  for (std::size_t trial = 0; trial < opts.trials; ++trial) {
    const std::size_t frames = 1 + rng.UniformInt(0, 63);
    Vec64 z = RandomGates(&rng, frames);
    Vec64 rev(frames);
    for (std::size_t t = 0; t < frames; ++t) rev[t] = z[frames - 1 - t];
    Vec64 alpha_rev = SmochaAlpha(rev);
    Vec64 alpha = DualWeights(z);
    if (fault && trial == 0) alpha[0] += 1e-6;
    for (std::size_t t = 0; t < frames; ++t)
      worst = std::max(worst,
                       std::fabs(alpha[t] - alpha_rev[frames - 1 - t]));
  }
  return {"smocha-dual", worst <= 1e-12, "max abs err " + Sci(worst)};
}

VerifyCheck CheckLagging(const VerifyOptions& opts, bool fault) {
  bool pass = true;
  std::ostringstream detail;
  {
    std::vector<std::size_t> g = {2, 4, 6, 8, 10};
    double al = AverageLaggingFrames(g, 10);
    if (fault) al += 1.0;
    if (al != 2.0) pass = false;
    detail << "linear " << al;
  }
  {
    std::vector<std::size_t> g = {10, 10, 10};
    double al = AverageLaggingFrames(g, 10);
    if (al != 10.0) pass = false;
    detail << ", full-wait " << al;
  }
  {
    Rng rng(MixSeed(opts.seed, 108));
    for (std::size_t trial = 0; trial < opts.trials; ++trial) {
      const std::size_t frames = 2 + rng.UniformInt(0, 30);
      const std::size_t steps = 1 + rng.UniformInt(0, 10);
      std::vector<std::size_t> g(steps);
      std::size_t cur = 1 + rng.UniformInt(0, static_cast<int>(frames) - 1);
      for (std::size_t u = 0; u < steps; ++u) {
        g[u] = cur;
        cur = std::min(frames,
                       cur + static_cast<std::size_t>(rng.UniformInt(0, 3)));
      }
      double al = AverageLaggingFrames(g, frames);
      if (!(al <= static_cast<double>(frames) + 1e-9)) pass = false;
    }
  }
  return {"lagging", pass, detail.str()};
}

VerifyCheck CheckCheckpointRoundtrip(const VerifyOptions& opts, bool fault) {
  ModelDims dims;
  dims.d_x = 5;
  dims.d_h = 4;
  dims.d_s = 4;
  dims.d_e = 3;
  dims.d_k = 3;
  dims.vocab = 5;
  dims.lookahead = 1;
  dims.stride = 2;
  Checkpoint ckpt;
  ckpt.params = ModelParams::GlorotInit(dims, MixSeed(opts.seed, 109));
  ckpt.spec = {AttentionKind::kDecGrc, 0};
  ckpt.config = RunConfig{};
  ckpt.config.dims = dims;
  ckpt.config.task.vocab = dims.vocab;
  const auto path = std::filesystem::temp_directory_path() /
                    ("grc_verify_ckpt_" + std::to_string(opts.seed) + ".bin");
  SaveCheckpoint(path.string(), ckpt.params, ckpt.spec, ckpt.config);
  Checkpoint back = LoadCheckpoint(path.string());
  std::filesystem::remove(path);
  Vec64 a = ckpt.params.Flatten();
  Vec64 b = back.params.Flatten();
  if (fault && b.size() > 0) b[0] += 1e-9;
  bool same = a.size() == b.size() && back.spec.kind == ckpt.spec.kind;
  if (same)
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i] != b[i]) same = false;
  return {"checkpoint-roundtrip", same, same ? "bitwise equal" : "mismatch"};
}

VerifyCheck CheckGradients(const VerifyOptions& opts, bool fault) {
  ModelDims dims;
  dims.d_x = 5;
  dims.d_h = 4;
  dims.d_s = 4;
  dims.d_e = 3;
  dims.d_k = 3;
  dims.vocab = 5;
  dims.lookahead = 1;
  dims.stride = 2;
  SyntheticTask task;
  task.vocab = dims.vocab;
  task.min_len = 3;
  task.max_len = 3;
  task.repeat = 2;
  task.noise = 0.1;
  Rng data_rng(MixSeed(opts.seed, 113));
  Example ex = GenExample(task, 0, &data_rng);
  const AttentionKind kinds[5] = {AttentionKind::kGsa, AttentionKind::kGrc,
                                  AttentionKind::kDecGrc,
                                  AttentionKind::kWindowed,
                                  AttentionKind::kMocha};
  double worst = 0.0;
  for (AttentionKind kind : kinds) {
    AttentionSpec spec{kind, KindUsesWindow(kind) ? 2u : 0u};
    ModelParams params =
        ModelParams::GlorotInit(dims, MixSeed(opts.seed, 114));
    Vec64 flat = params.Flatten();
    auto build = [&](Tape& tape, Value p) {
      return BuildTeacherForcedNll(tape, p, dims, spec, ex.x, ex.y);
    };
    worst = std::max(worst, GradCheckMaxRelError(build, flat, 1e-5));
  }
  if (fault) worst += 1.0;
  return {"grad-check", worst < 1e-4, "max rel err " + Sci(worst)};
}

VerifyCheck CheckTrainDeterminism(const VerifyOptions& opts, bool fault) {
  ModelDims dims;
  dims.d_x = 6;
  dims.d_h = 6;
  dims.d_s = 6;
  dims.d_e = 4;
  dims.d_k = 4;
  dims.vocab = 6;
  dims.lookahead = 1;
  dims.stride = 2;
  SyntheticTask task;
  task.vocab = dims.vocab;
  task.min_len = 2;
  task.max_len = 4;
  task.repeat = 2;
  task.noise = 0.1;
  std::vector<Example> data = MakeDataset(task, 8, MixSeed(opts.seed, 110));
  AttentionSpec spec{AttentionKind::kDecGrc, 0};
  TrainConfig tc;
  tc.batch = 4;
  tc.threads = 2;
  auto run = [&]() {
    ModelParams params =
        ModelParams::GlorotInit(dims, MixSeed(opts.seed, 111));
    AdamOptimizer opt(ParamLayout::For(dims).total, tc.adam);
    Rng shuffle(MixSeed(opts.seed, 112));
    TrainEpoch(&params, &opt, spec, data, tc, &shuffle);
    return params.Flatten();
  };
  Vec64 a = run();
  Vec64 b = run();
  if (fault && b.size() > 0) b[b.size() - 1] += 1e-12;
  bool same = a.size() == b.size();
  if (same)
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i] != b[i]) same = false;
  return {"train-determinism", same, same ? "bitwise equal" : "mismatch"};
}

}  // namespace

bool VerifyReport::AllPass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

std::vector<std::string> VerifyCheckNames() {
  return {"duality",         "dual-roundtrip",  "gate-monotone",
          "truncation-bound", "grad-check",      "mocha-mass",
          "mocha-endpoints",  "smocha-dual",     "lagging",
          "checkpoint-roundtrip", "train-determinism"};
}

VerifyReport RunVerify(const VerifyOptions& opts) {
  Require(opts.trials > 0, "verify: trials must be positive");
  const std::vector<std::string> names = VerifyCheckNames();
  if (!opts.inject_fault.empty()) {
    bool known = false;
    for (const auto& n : names) known = known || n == opts.inject_fault;
    if (!known) throw ConfigError("verify: unknown check " + opts.inject_fault);
  }
  auto fault = [&](const char* name) { return opts.inject_fault == name; };
  VerifyReport report;
  report.checks.push_back(CheckDuality(opts, fault("duality")));
  report.checks.push_back(CheckDualRoundtrip(opts, fault("dual-roundtrip")));
  report.checks.push_back(CheckGateMonotone(opts, fault("gate-monotone")));
  report.checks.push_back(
      CheckTruncationBound(opts, fault("truncation-bound")));
  report.checks.push_back(CheckGradients(opts, fault("grad-check")));
  report.checks.push_back(CheckMochaMass(opts, fault("mocha-mass")));
  report.checks.push_back(CheckMochaEndpoints(opts, fault("mocha-endpoints")));
  report.checks.push_back(CheckSmochaDual(opts, fault("smocha-dual")));
  report.checks.push_back(CheckLagging(opts, fault("lagging")));
  report.checks.push_back(
      CheckCheckpointRoundtrip(opts, fault("checkpoint-roundtrip")));
  report.checks.push_back(
      CheckTrainDeterminism(opts, fault("train-determinism")));
  return report;
}

}  // namespace grc
