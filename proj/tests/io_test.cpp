// io_test.cpp

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

#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "grc/error.hpp"
#include "grc/io.hpp"
#include "grc/rng.hpp"

using namespace grc;

TEST_CASE("formatted doubles parse back to the same bits") {
  Rng rng(401);
  for (int trial = 0; trial < 1000; ++trial) {
    double x = rng.Uniform(-1e6, 1e6);
    if (trial % 7 == 0) x = rng.Uniform(-1e-300, 1e-300);
    if (trial % 11 == 0) x *= 1e300;
    const std::string s = FormatDouble(x);
    const double back = std::strtod(s.c_str(), nullptr);
    CHECK(back == x);
  }
  CHECK(FormatDouble(0.25) == "0.25");
  CHECK(FormatDouble(-0.0) == "-0");
  CHECK(FormatDouble(2.0) == "2");
}

TEST_CASE("sweep csv golden bytes") {
  SweepRow row;
  row.nu = 0.5;
  row.wer = 0.25;
  row.al_frames = 2.0;
  row.al_seconds = 0.125;
  row.endpoint_fraction = 0.75;
  std::ostringstream out;
  WriteSweepCsv(out, std::span<const SweepRow>(&row, 1));
  CHECK(out.str() ==
        "nu,wer,al_frames,al_seconds,endpoint_fraction\n"
        "0.5,0.25,2,0.125,0.75\n");
}

TEST_CASE("sweep detail golden bytes") {
  SweepDetailRow row;
  row.nu = 0.5;
  row.utt = 3;
  row.al_frames = 1.5;
  row.endpoint_fraction = 0.25;
  row.token_errors = 2;
  row.ref_len = 8;
  std::ostringstream out;
  WriteSweepDetail(out, std::span<const SweepDetailRow>(&row, 1));
  CHECK(out.str() ==
        "{\"nu\":0.5,\"utt\":3,\"al_frames\":1.5,"
        "\"endpoint_fraction\":0.25,\"token_errors\":2,\"ref_len\":8}\n");
}

TEST_CASE("loss csv golden bytes") {
  std::vector<LossRow> rows(2);
  rows[0] = {1, 2.75, 3.5};
  rows[1] = {2, 1.25, 1.5};
  std::ostringstream out;
  WriteLossCsv(out, rows);
  CHECK(out.str() ==
        "epoch,train_ce,dev_ce\n"
        "1,2.75,3.5\n"
        "2,1.25,1.5\n");
}

TEST_CASE("matrix csv golden bytes") {
  Mat64 m(2, 3);
  m.At(0, 0) = 1.0;
  m.At(0, 1) = 0.5;
  m.At(0, 2) = -2.0;
  m.At(1, 2) = 0.25;
  std::ostringstream out;
  WriteMatrixCsv(out, m);
  CHECK(out.str() == "1,0.5,-2\n0,0,0.25\n");
}

TEST_CASE("endpoint log golden bytes") {
  std::vector<EndpointRecord> endpoints(2);
  endpoints[0] = {1, 4, 0.5};
  endpoints[1] = {2, 6, 0.25};
  std::ostringstream out;
  WriteEndpointLog(out, endpoints);
  CHECK(out.str() ==
        "{\"u\":1,\"t_end\":4,\"gate\":0.5}\n"
        "{\"u\":2,\"t_end\":6,\"gate\":0.25}\n");
}

TEST_CASE("weight map bytes clamp to the byte range") {
  Mat64 w(1, 3);
  w.At(0, 0) = -0.5;
  w.At(0, 1) = 0.5;
  w.At(0, 2) = 2.0;
  std::ostringstream out;
  WriteWeightsPgm(out, w);
  const std::string bytes = out.str();
  const std::string header = "P5\n3 1\n255\n";
  REQUIRE(bytes.size() == header.size() + 3);
  CHECK(bytes.substr(0, header.size()) == header);
  CHECK(static_cast<unsigned char>(bytes[header.size() + 0]) == 0);
  CHECK(static_cast<unsigned char>(bytes[header.size() + 1]) == 128);
  CHECK(static_cast<unsigned char>(bytes[header.size() + 2]) == 255);
}

TEST_CASE("empty weight maps are rejected") {
  Mat64 empty;
  std::ostringstream out;
  CHECK_THROWS_AS(WriteWeightsPgm(out, empty), ContractViolation);
}

TEST_CASE("unwritable paths are configuration errors") {
  std::vector<LossRow> rows(1);
  CHECK_THROWS_AS(WriteLossCsv("/nonexistent/dir/loss.csv", rows),
                  ConfigError);
}
