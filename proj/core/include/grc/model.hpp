// grc/model.hpp

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
// Toy attention-based encoder-decoder: a lookahead-limited recurrent
// encoder with stride subsampling, a tanh recurrent decoder cell, and a
// softmax readout. Token id 0 is the start-of-sequence symbol (decoder
// input only), id 1 is end-of-sequence.

#ifndef GRC_MODEL_HPP_
#define GRC_MODEL_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "grc/attention.hpp"
#include "grc/baselines.hpp"
#include "grc/numerics.hpp"

namespace grc {

inline constexpr int kSosId = 0;
inline constexpr int kEosId = 1;

using TokenSequence = std::vector<int>;

enum class AttentionKind { kGsa, kGrc, kDecGrc, kWindowed, kMocha };

std::string AttentionKindName(AttentionKind kind);
AttentionKind AttentionKindFromName(const std::string& name);
bool KindUsesWindow(AttentionKind kind);
bool KindHasGates(AttentionKind kind);

// Attention kind plus its window size where one applies (windowed, mocha).
struct AttentionSpec {
  AttentionKind kind = AttentionKind::kGsa;
  std::size_t w = 0;
};

struct ModelDims {
  std::size_t d_x = 0;    // input frame dimension
  std::size_t d_h = 0;    // encoder state
  std::size_t d_s = 0;    // decoder state
  std::size_t d_e = 0;    // embedding
  std::size_t d_k = 0;    // score key
  std::size_t vocab = 0;  // includes ids 0 and 1
  std::size_t lookahead = 0;
  std::size_t stride = 1;

  void Validate() const;
  bool operator==(const ModelDims&) const = default;
};

// Flat-parameter layout shared by serialization and the tape bindings.
struct ParamLayout {
  struct Block {
    std::string name;
    std::size_t off = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
  };
  std::vector<Block> blocks;
  std::size_t total = 0;

  static ParamLayout For(const ModelDims& dims);
  const Block& Find(const std::string& name) const;
};

struct ModelParams {
  ModelDims dims;
  Mat64 enc_w_in;   // d_h x d_x*(lookahead+1)
  Mat64 enc_w_rec;  // d_h x d_h
  Vec64 enc_b;      // d_h
  Mat64 dec_w_in;   // d_s x (d_e + d_h)
  Mat64 dec_w_rec;  // d_s x d_s
  Vec64 dec_b;      // d_s
  Mat64 embed;      // vocab x d_e, shared by decoder input and readout
  ScoreParams score;
  // Second score function driving the monotonic stopping probabilities.
  // Only the mocha kind reads it; it is allocated for every kind so the
  // flat layout and checkpoints are kind-independent.
  ScoreParams mono_score;
  Mat64 out_w;  // vocab x (d_s + d_e + d_h)
  Vec64 out_b;  // vocab

  static ModelParams GlorotInit(const ModelDims& dims, std::uint64_t seed);
  static ModelParams Zeros(const ModelDims& dims);
  Vec64 Flatten() const;
  static ModelParams FromFlat(const ModelDims& dims, const Vec64& flat);
};

// Unidirectional recurrent encoding with a lookahead window of future
// frames concatenated into each step's input, then stride subsampling.
// Output row t depends only on input frames up to (t+1)*stride - 1 +
// lookahead (0-based), and the output has ceil(T_in / stride) rows.
Mat64 Encode(const ModelParams& params, const Mat64& x);

// Incremental form of Encode. Frames are pushed one at a time; an encoded
// row appears as soon as every input frame in its lookahead window has
// arrived. Finish() zero-pads the trailing windows and emits the final
// partial row, after which the rows equal Encode() on the whole input.
class StreamingEncoder {
 public:
  explicit StreamingEncoder(const ModelParams& params);

  void Push(std::span<const double> frame);
  void Finish();

  std::size_t Ready() const { return rows_.size(); }
  const Vec64& Row(std::size_t t) const;
  bool Finished() const { return finished_; }
  std::size_t FramesSeen() const { return input_.size(); }

 private:
  void Advance();

  const ModelParams& params_;
  std::vector<Vec64> input_;
  std::vector<Vec64> rows_;
  Vec64 state_;
  Vec64 cat_;
  Vec64 from_in_;
  Vec64 from_rec_;
  std::size_t next_step_ = 0;
  bool finished_ = false;
};

// One decoder cell update on [embed(y_prev); c_prev].
Vec64 DecoderStep(const ModelParams& params, const Vec64& s_prev, int y_prev,
                  const Vec64& c_prev);

Vec64 ReadoutLogits(const ModelParams& params, const Vec64& s, int y_prev,
                    const Vec64& c);

// Softmax over the readout logits.
Vec64 Readout(const ModelParams& params, const Vec64& s, int y_prev,
              const Vec64& c);

// Per-utterance attention state carried across decoder steps.
struct AttnState {
  FeedbackState fb;
  Vec64 prev_weights;   // windowed: last step's padded weights
  Vec64 alpha_expected; // mocha soft path: previous expected selection row
  MonotonicState mono;  // mocha hard path
  bool first = true;

  explicit AttnState(std::size_t frames);
};

struct AttnStepOut {
  Vec64 context;
  Vec64 weights;        // padded attention weights for this step
  Vec64 gates;          // update gates, grc kinds only
  std::size_t endpoint; // 1-based frames read; full length for offline kinds
};

enum class StepMode {
  kTeacherForced,  // soft attention where training defines one (mocha)
  kDecode,         // hard scan attention at inference
};

AttnStepOut AttendStep(const ModelParams& params, const AttentionSpec& spec,
                       const Mat64& h, const Vec64& s_u, AttnState* state,
                       StepMode mode);

struct TeacherForcedResult {
  double nll = 0.0;     // summed over tokens
  std::size_t tokens = 0;
  Mat64 weights;        // |y| x T
  Mat64 gates;          // |y| x T for grc kinds, empty otherwise
  bool has_gates = false;
};

// Teacher-forced pass over target sequence y (which must end with the
// end-of-sequence id). Returns the summed cross entropy and the attention
// diagnostics per step.
TeacherForcedResult TeacherForcedEval(const ModelParams& params,
                                      const AttentionSpec& spec,
                                      const Mat64& h, const TokenSequence& y);

}  // namespace grc

#endif  // GRC_MODEL_HPP_
