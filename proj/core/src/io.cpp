// grc/io.cpp

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

#include "grc/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "grc/error.hpp"

namespace grc {

std::string FormatDouble(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace {

std::ofstream OpenFile(const std::string& path, std::ios::openmode mode) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw ConfigError("cannot open output file: " + path);
  return out;
}

}  // namespace

void WriteSweepCsv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "nu,wer,al_frames,al_seconds,endpoint_fraction\n";
  for (const SweepRow& r : rows) {
    out << FormatDouble(r.nu) << ',' << FormatDouble(r.wer) << ','
        << FormatDouble(r.al_frames) << ',' << FormatDouble(r.al_seconds)
        << ',' << FormatDouble(r.endpoint_fraction) << '\n';
  }
}

void WriteSweepCsv(const std::string& path, std::span<const SweepRow> rows) {
  std::ofstream out = OpenFile(path, std::ios::out);
  WriteSweepCsv(out, rows);
  if (!out) throw ConfigError("write failed: " + path);
}

void WriteSweepDetail(std::ostream& out,
                      std::span<const SweepDetailRow> rows) {
  for (const SweepDetailRow& r : rows) {
    out << "{\"nu\":" << FormatDouble(r.nu) << ",\"utt\":" << r.utt
        << ",\"al_frames\":" << FormatDouble(r.al_frames)
        << ",\"endpoint_fraction\":" << FormatDouble(r.endpoint_fraction)
        << ",\"token_errors\":" << r.token_errors
        << ",\"ref_len\":" << r.ref_len << "}\n";
  }
}

void WriteSweepDetail(const std::string& path,
                      std::span<const SweepDetailRow> rows) {
  std::ofstream out = OpenFile(path, std::ios::out);
  WriteSweepDetail(out, rows);
  if (!out) throw ConfigError("write failed: " + path);
}

void WriteLossCsv(std::ostream& out, std::span<const LossRow> rows) {
  out << "epoch,train_ce,dev_ce\n";
  for (const LossRow& r : rows) {
    out << r.epoch << ',' << FormatDouble(r.train_ce) << ','
        << FormatDouble(r.dev_ce) << '\n';
  }
}

void WriteLossCsv(const std::string& path, std::span<const LossRow> rows) {
  std::ofstream out = OpenFile(path, std::ios::out);
  WriteLossCsv(out, rows);
  if (!out) throw ConfigError("write failed: " + path);
}

void WriteMatrixCsv(std::ostream& out, const Mat64& m) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c > 0) out << ',';
      out << FormatDouble(m.At(r, c));
    }
    out << '\n';
  }
}

void WriteMatrixCsv(const std::string& path, const Mat64& m) {
  std::ofstream out = OpenFile(path, std::ios::out);
  WriteMatrixCsv(out, m);
  if (!out) throw ConfigError("write failed: " + path);
}

void WriteEndpointLog(std::ostream& out,
                      std::span<const EndpointRecord> endpoints) {
  for (const EndpointRecord& r : endpoints) {
    out << "{\"u\":" << r.u << ",\"t_end\":" << r.t_end
        << ",\"gate\":" << FormatDouble(r.gate) << "}\n";
  }
}

void WriteEndpointLog(const std::string& path,
                      std::span<const EndpointRecord> endpoints) {
  std::ofstream out = OpenFile(path, std::ios::out);
  WriteEndpointLog(out, endpoints);
  if (!out) throw ConfigError("write failed: " + path);
}

void WriteWeightsPgm(std::ostream& out, const Mat64& w) {
  Require(w.rows() >= 1 && w.cols() >= 1, "WriteWeightsPgm: empty matrix");
  out << "P5\n" << w.cols() << ' ' << w.rows() << "\n255\n";
  for (std::size_t r = 0; r < w.rows(); ++r) {
    for (std::size_t c = 0; c < w.cols(); ++c) {
      double v = std::min(1.0, std::max(0.0, w.At(r, c)));
      out.put(static_cast<char>(
          static_cast<unsigned char>(std::lround(v * 255.0))));
    }
  }
}

void WriteWeightsPgm(const std::string& path, const Mat64& w) {
  std::ofstream out = OpenFile(path, std::ios::binary);
  WriteWeightsPgm(out, w);
  if (!out) throw ConfigError("write failed: " + path);
}

}  // namespace grc
