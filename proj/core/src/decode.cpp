// grc/decode.cpp

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

#include "grc/decode.hpp"

#include <algorithm>
#include <cmath>

#include "grc/error.hpp"

namespace grc {

std::pair<int, double> GreedyPick(const Vec64& probs) {
  Require(probs.size() >= 2, "GreedyPick: vocabulary too small");
  int best = 1;
  double best_lp = std::log(probs[1]);
  for (std::size_t v = 2; v < probs.size(); ++v) {
    double lp = std::log(probs[v]);
    if (lp > best_lp) {
      best = static_cast<int>(v);
      best_lp = lp;
    }
  }
  return {best, best_lp};
}

namespace {

double GateAt(const AttnStepOut& att) {
  if (att.gates.empty()) return 1.0;
  return att.gates[att.endpoint - 1];
}

DecodeResult GreedyDecode(const ModelParams& params, const AttentionSpec& spec,
                          const Mat64& h, const DecodeOptions& opts) {
  const ModelDims& d = params.dims;
  DecodeResult out;
  AttnState state(h.rows());
  Vec64 s(d.d_s);
  Vec64 c(d.d_h);
  int y_prev = kSosId;
  for (std::size_t u = 0; u < opts.max_len; ++u) {
    s = DecoderStep(params, s, y_prev, c);
    AttnStepOut att = AttendStep(params, spec, h, s, &state, StepMode::kDecode);
    out.endpoints.push_back({u + 1, att.endpoint, GateAt(att)});
    Vec64 probs = Readout(params, s, y_prev, att.context);
    auto [tok, lp] = GreedyPick(probs);
    out.logp += lp;
    if (tok == kEosId) return out;
    out.tokens.push_back(tok);
    c = att.context;
    y_prev = tok;
  }
  out.truncated = true;
  return out;
}

struct Hyp {
  TokenSequence tokens;
  std::vector<EndpointRecord> endpoints;
  double logp = 0.0;
  bool ended = false;
  Vec64 s;
  Vec64 c;
  int y_prev = kSosId;
  AttnState state;

  Hyp(std::size_t d_s, std::size_t d_h, std::size_t frames)
      : s(d_s), c(d_h), state(frames) {}
};

bool BetterHyp(const Hyp& a, const Hyp& b) {
  if (a.logp != b.logp) return a.logp > b.logp;
  return a.tokens < b.tokens;
}

DecodeResult BeamDecode(const ModelParams& params, const AttentionSpec& spec,
                        const Mat64& h, const DecodeOptions& opts) {
  const ModelDims& d = params.dims;
  std::vector<Hyp> beam;
  beam.emplace_back(d.d_s, d.d_h, h.rows());

  for (std::size_t u = 0; u < opts.max_len; ++u) {
    bool any_live = false;
    std::vector<Hyp> cands;
    for (const Hyp& hyp : beam) {
      if (hyp.ended) {
        cands.push_back(hyp);
        continue;
      }
      any_live = true;
      Hyp base = hyp;
      base.s = DecoderStep(params, hyp.s, hyp.y_prev, hyp.c);
      AttnStepOut att =
          AttendStep(params, spec, h, base.s, &base.state, StepMode::kDecode);
      base.endpoints.push_back({u + 1, att.endpoint, GateAt(att)});
      Vec64 probs = Readout(params, base.s, hyp.y_prev, att.context);
      base.c = att.context;
      for (std::size_t v = 1; v < probs.size(); ++v) {
        Hyp cand = base;
        cand.logp += std::log(probs[v]);
        if (static_cast<int>(v) == kEosId) {
          cand.ended = true;
        } else {
          cand.tokens.push_back(static_cast<int>(v));
          cand.y_prev = static_cast<int>(v);
        }
        cands.push_back(std::move(cand));
      }
    }
    if (!any_live) break;
    std::stable_sort(cands.begin(), cands.end(), BetterHyp);
    if (cands.size() > opts.beam)
      cands.erase(cands.begin() + static_cast<std::ptrdiff_t>(opts.beam),
                  cands.end());
    beam = std::move(cands);
  }

  const Hyp* best = &beam.front();
  for (const Hyp& hyp : beam)
    if (BetterHyp(hyp, *best)) best = &hyp;
  DecodeResult out;
  out.tokens = best->tokens;
  out.endpoints = best->endpoints;
  out.logp = best->logp;
  out.truncated = !best->ended;
  return out;
}

}  // namespace

DecodeResult Decode(const ModelParams& params, const AttentionSpec& spec,
                    const Mat64& h, const DecodeOptions& opts) {
  Require(opts.beam >= 1, "Decode: beam must be positive");
  Require(opts.max_len >= 1, "Decode: max_len must be positive");
  Require(h.rows() >= 1, "Decode: empty encoded input");
  if (opts.beam == 1) return GreedyDecode(params, spec, h, opts);
  return BeamDecode(params, spec, h, opts);
}

}  // namespace grc
