// grc/config.hpp

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
// Run configuration, parsed strictly: unknown keys are rejected at every
// level, every section is optional, and missing fields keep the defaults
// below.

#ifndef GRC_CONFIG_HPP_
#define GRC_CONFIG_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "grc/metrics.hpp"
#include "grc/model.hpp"

namespace grc {

struct TrainSection {
  std::size_t examples = 1024;
  std::size_t epochs = 40;
  std::size_t batch = 8;
  double lr = 5e-3;
  std::uint64_t seed = 1;
};

struct EvalSection {
  std::size_t examples = 100;
  std::size_t beam = 1;
  std::size_t max_len = 32;
  double frame_period = 0.01;  // seconds per input frame
};

inline ModelDims DefaultToyDims() {
  ModelDims d;
  d.d_x = 16;
  d.d_h = 32;
  d.d_s = 32;
  d.d_e = 12;
  d.d_k = 16;
  d.vocab = 16;
  d.lookahead = 1;
  d.stride = 2;
  return d;
}

struct RunConfig {
  ModelDims dims = DefaultToyDims();
  AttentionSpec attention{AttentionKind::kDecGrc, 0};
  SyntheticTask task;
  TrainSection train;
  EvalSection eval;
  std::vector<double> sweep_nus = {0.0, 0.01, 0.1, 0.5, 0.9};

  // Cross-field rules: the one-hot task feeds the model directly, so
  // dims.d_x and dims.vocab must equal task.vocab; a window size is
  // required exactly for the windowed kinds.
  void Validate() const;
};

RunConfig ParseRunConfig(const std::string& json_text);
RunConfig LoadRunConfig(const std::string& path);
std::string SerializeRunConfig(const RunConfig& cfg);

}  // namespace grc

#endif  // GRC_CONFIG_HPP_
