// grc/train.cpp

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

#include "grc/train.hpp"

#include <cmath>
#include <exception>
#include <thread>

#include "grc/error.hpp"
#include "grc/model_diff.hpp"
#include "grc/tape.hpp"

namespace grc {

AdamOptimizer::AdamOptimizer(std::size_t n, const AdamConfig& cfg)
    : cfg_(cfg), m_(n), v_(n) {
  Require(n >= 1, "AdamOptimizer: empty parameter vector");
}

void AdamOptimizer::Step(std::span<const double> grad,
                         std::span<double> params) {
  Require(grad.size() == m_.size() && params.size() == m_.size(),
          "AdamOptimizer::Step: size mismatch");
  ++t_;
  double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < m_.size(); ++i) {
    double g = grad[i];
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g * g;
    double mhat = m_[i] / bc1;
    double vhat = v_[i] / bc2;
    params[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
  }
}

BatchResult BatchGradient(const ModelParams& params, const AttentionSpec& spec,
                          std::span<const Example> batch,
                          std::size_t threads) {
  Require(!batch.empty(), "BatchGradient: empty batch");
  Vec64 flat = params.Flatten();
  std::size_t n = batch.size();
  std::vector<Vec64> grads(n);
  std::vector<double> nlls(n, 0.0);
  std::vector<std::size_t> tokens(n, 0);

  auto run_one = [&](std::size_t i) {
    Tape tape;
    Value leaf = tape.Input(flat);
    Value nll = BuildTeacherForcedNll(tape, leaf, params.dims, spec,
                                      batch[i].x, batch[i].y);
    tape.Backward(nll);
    nlls[i] = tape.ScalarValueOf(nll);
    tokens[i] = batch[i].y.size();
    grads[i] = Vec64::FromSpan(tape.GradOf(leaf));
  };

  std::size_t workers = std::min(threads == 0 ? std::size_t{1} : threads, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) run_one(i);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < n; i += workers) run_one(i);
        } catch (...) {
          errs[w] = std::current_exception();
        }
      });
    }
    for (std::thread& t : pool) t.join();
    for (const std::exception_ptr& e : errs)
      if (e) std::rethrow_exception(e);
  }

  BatchResult out;
  out.grad = Vec64(flat.size());
  // Example-ordered reduction keeps the sum independent of scheduling.
  for (std::size_t i = 0; i < n; ++i) {
    out.nll += nlls[i];
    out.tokens += tokens[i];
    for (std::size_t k = 0; k < out.grad.size(); ++k)
      out.grad[k] += grads[i][k];
  }
  double scale = 1.0 / static_cast<double>(out.tokens);
  for (std::size_t k = 0; k < out.grad.size(); ++k) out.grad[k] *= scale;
  if (!std::isfinite(out.nll) || !out.grad.AllFinite())
    throw DivergenceError("training loss or gradient is not finite");
  return out;
}

double TrainEpoch(ModelParams* params, AdamOptimizer* opt,
                  const AttentionSpec& spec, std::span<const Example> data,
                  const TrainConfig& cfg, Rng* shuffle_rng) {
  Require(params != nullptr && opt != nullptr && shuffle_rng != nullptr,
          "TrainEpoch: null argument");
  Require(!data.empty(), "TrainEpoch: empty dataset");
  Require(cfg.batch >= 1, "TrainEpoch: batch size must be positive");

  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  // Fisher-Yates from the top; the swap partner law is pinned so the visit
  // order never depends on the standard library build.
  for (std::size_t i = order.size(); i-- > 1;) {
    std::size_t j = static_cast<std::size_t>(
        shuffle_rng->UniformInt(0, static_cast<int>(i)));
    std::swap(order[i], order[j]);
  }

  Vec64 flat = params->Flatten();
  double epoch_nll = 0.0;
  std::size_t epoch_tokens = 0;
  std::vector<Example> batch;
  for (std::size_t pos = 0; pos < order.size(); pos += cfg.batch) {
    std::size_t lim = std::min(order.size(), pos + cfg.batch);
    batch.clear();
    for (std::size_t k = pos; k < lim; ++k) batch.push_back(data[order[k]]);
    ModelParams cur = ModelParams::FromFlat(params->dims, flat);
    BatchResult res = BatchGradient(cur, spec, batch, cfg.threads);
    epoch_nll += res.nll;
    epoch_tokens += res.tokens;
    opt->Step(res.grad.View(), flat.MutableView());
  }
  *params = ModelParams::FromFlat(params->dims, flat);
  return epoch_nll / static_cast<double>(epoch_tokens);
}

}  // namespace grc
