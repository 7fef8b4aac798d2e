// grc/checkpoint.hpp

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
// Checkpoint file layout, all integers little-endian:
//   bytes 0..7   magic "GRCCKPT1"
//   u32          JSON header length
//   ...          JSON header: version, dims, attention kind/window, and the
//                originating run configuration
//   u64          parameter count
//   count x u64  flat parameters, IEEE doubles bit-cast per value
// Doubles survive a save/load round trip bit for bit.

#ifndef GRC_CHECKPOINT_HPP_
#define GRC_CHECKPOINT_HPP_

#include <string>

#include "grc/config.hpp"
#include "grc/model.hpp"

namespace grc {

struct Checkpoint {
  ModelParams params;
  AttentionSpec spec;
  RunConfig config;
};

void SaveCheckpoint(const std::string& path, const ModelParams& params,
                    const AttentionSpec& spec, const RunConfig& config);

Checkpoint LoadCheckpoint(const std::string& path);

}  // namespace grc

#endif  // GRC_CHECKPOINT_HPP_
