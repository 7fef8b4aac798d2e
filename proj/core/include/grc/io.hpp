// grc/io.hpp

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
// Result-file writers. Doubles are printed with %.17g so every value
// round-trips exactly and reruns diff byte for byte.

#ifndef GRC_IO_HPP_
#define GRC_IO_HPP_

#include <ostream>
#include <span>
#include <string>

#include "grc/numerics.hpp"
#include "grc/streaming.hpp"

namespace grc {

std::string FormatDouble(double x);

struct SweepRow {
  double nu = 0.0;
  double wer = 0.0;
  double al_frames = 0.0;
  double al_seconds = 0.0;
  double endpoint_fraction = 0.0;
};

// Header line: nu,wer,al_frames,al_seconds,endpoint_fraction
void WriteSweepCsv(std::ostream& out, std::span<const SweepRow> rows);
void WriteSweepCsv(const std::string& path, std::span<const SweepRow> rows);

// Per-(threshold, utterance) sweep detail, one JSON object per line.
struct SweepDetailRow {
  double nu = 0.0;
  std::size_t utt = 0;
  double al_frames = 0.0;
  double endpoint_fraction = 0.0;
  std::size_t token_errors = 0;
  std::size_t ref_len = 0;
};

void WriteSweepDetail(std::ostream& out, std::span<const SweepDetailRow> rows);
void WriteSweepDetail(const std::string& path,
                      std::span<const SweepDetailRow> rows);

// Header line: epoch,train_ce,dev_ce; epochs are 1-based.
struct LossRow {
  std::size_t epoch = 0;
  double train_ce = 0.0;
  double dev_ce = 0.0;
};

void WriteLossCsv(std::ostream& out, std::span<const LossRow> rows);
void WriteLossCsv(const std::string& path, std::span<const LossRow> rows);

// Raw numeric matrix, one CSV row per matrix row, no header.
void WriteMatrixCsv(std::ostream& out, const Mat64& m);
void WriteMatrixCsv(const std::string& path, const Mat64& m);

// One JSON object per line: {"u":..,"t_end":..,"gate":..}, indices 1-based.
void WriteEndpointLog(std::ostream& out,
                      std::span<const EndpointRecord> endpoints);
void WriteEndpointLog(const std::string& path,
                      std::span<const EndpointRecord> endpoints);

// Binary PGM (P5), width = columns, height = rows, maxval 255; values are
// clamped to [0, 1] and scaled linearly.
void WriteWeightsPgm(std::ostream& out, const Mat64& w);
void WriteWeightsPgm(const std::string& path, const Mat64& w);

}  // namespace grc

#endif  // GRC_IO_HPP_
