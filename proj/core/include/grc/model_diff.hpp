// grc/model_diff.hpp

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
// Tape-recorded teacher-forced loss. Mirrors the plain forward pass
// operation for operation, so the recorded loss value is bit-identical to
// TeacherForcedEval and Backward() yields exact reverse-mode gradients.

#ifndef GRC_MODEL_DIFF_HPP_
#define GRC_MODEL_DIFF_HPP_

#include <span>
#include <vector>

#include "grc/model.hpp"
#include "grc/tape.hpp"

namespace grc {

// Parameter blocks sliced out of one flat leaf in ParamLayout order.
struct TapeScoreParams {
  Value v, w, eta, v_beta, bias;
};

struct TapeModel {
  ModelDims dims;
  Value flat;
  Value enc_w_in, enc_w_rec, enc_b;
  Value dec_w_in, dec_w_rec, dec_b;
  Value embed;
  TapeScoreParams score, mono_score;
  Value out_w, out_b;
};

TapeModel BindModel(Tape& tape, Value flat, const ModelDims& dims);

// Encoded frames as one tape value per output row.
std::vector<Value> EncodeOnTape(Tape& tape, const TapeModel& m, const Mat64& x);

struct TapeAttnState {
  Value fb;              // accumulated weights of completed steps
  Value alpha_expected;  // expected-selection row carried by mocha
  Value prev_weights;    // padded weights of the previous step (windowed)
  bool first = true;
};

struct TapeAttnOut {
  Value context;
  Value weights;
};

TapeAttnOut AttendStepOnTape(Tape& tape, const TapeModel& m,
                             const AttentionSpec& spec,
                             std::span<const Value> h, Value s_u,
                             TapeAttnState* state);

// Summed teacher-forced cross entropy of (x, y) as a 1x1 tape value.
// Gradients with respect to every model parameter flow to `flat`.
Value BuildTeacherForcedNll(Tape& tape, Value flat, const ModelDims& dims,
                            const AttentionSpec& spec, const Mat64& x,
                            const TokenSequence& y);

}  // namespace grc

#endif  // GRC_MODEL_DIFF_HPP_
